"""Clique numbers of inhomogeneous random graphs: rate functionals, samplers, exact solvers."""

from .graphon import (ConstantGraphon, DistanceThreshold, GraphonError, GridStep, LogRateMatrix,
                      StepBigraphon, StepGraphon, SubsetFraction, clip_max, complement,
                      constant_graphon, discretize, evaluate, load_model, loads_model,
                      log_rate_matrix, make_distance_graphon, make_step_graphon, restrict)
from .optimization import (Admissible, Improved, KappaResult, box_admissibility_scan, gamma,
                           is_admissible, kappa, kappa_grid_oracle, kappa_via_sets, log_p_r,
                           optimal_mass_vector, p_r, rebalance, xi, xi_graph, xi_graph_search,
                           xi_grid_oracle, zoom)
from .sampler import (BipartiteSample, SampledGraph, WeightedCompleteGraph, bernoulli_realize,
                      sample_bipartite, sample_graph, sample_weighted)

__version__ = "0.1.0"
