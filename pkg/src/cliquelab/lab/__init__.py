"""Monte Carlo experiments, the verification suite and reporting."""

from .experiments import (ExperimentResult, ExperimentSpec, TrialRecord, as_step_graphon,
                          max_window_count, min_gap_check, min_pairwise_gap, run_biclique_scaling,
                          run_clique_scaling, run_concentration, run_experiment, run_oscillation,
                          two_value_mass)
from .report import CSV_COLUMNS, records_csv, result_json, to_json
from .verify import run_verify

__all__ = [
    "ExperimentResult", "ExperimentSpec", "TrialRecord", "as_step_graphon", "max_window_count",
    "min_gap_check", "min_pairwise_gap", "run_biclique_scaling", "run_clique_scaling",
    "run_concentration", "run_experiment", "run_oscillation", "two_value_mass", "CSV_COLUMNS",
    "records_csv", "result_json", "to_json", "run_verify",
]
