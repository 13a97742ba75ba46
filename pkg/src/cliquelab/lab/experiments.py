"""Monte Carlo experiments: clique and biclique scaling, concentration, oscillation."""

from __future__ import annotations

import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..densities import first_moment_predictor
from ..graphon import (ConstantGraphon, DistanceThreshold, GraphonError, GridStep, StepBigraphon,
                       StepGraphon, constant_graphon)
from ..optimization import kappa
from ..rng import derive_seed
from ..sampler import _open_uniform, sample_bipartite, sample_graph
from ..solvers import DEFAULT_BUDGET, max_biclique, max_clique

KINDS = ("clique_scaling", "biclique_scaling", "concentration", "oscillation", "verify")


@dataclass(frozen=True)
class ExperimentSpec:
    model: object
    kind: str
    n_grid: tuple
    trials: int = 1
    master_seed: int = 0
    budget: int = DEFAULT_BUDGET
    out: str | None = None
    workers: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or list(grid) != sorted(grid) or min(grid) < 0:
            raise ValueError("n_grid must be a nonempty ascending list of sizes")
        object.__setattr__(self, "n_grid", grid)
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class TrialRecord:
    n: int
    trial: int
    seed: int
    omega: int
    predictor: int
    within_one: bool
    complete: bool
    millis: int

    def row(self, timings: bool = False) -> list:
        return [self.n, self.trial, self.seed, self.omega, self.predictor,
                int(self.within_one), int(self.complete), self.millis if timings else 0]


@dataclass
class ExperimentResult:
    records: list
    summary: dict


def as_step_graphon(model) -> StepGraphon:
    """Step graphon view of a model, for families that are step functions."""
    if isinstance(model, StepGraphon):
        return model
    if isinstance(model, ConstantGraphon):
        return constant_graphon(model.p)
    if isinstance(model, GridStep):
        m = model.values.shape[0]
        return StepGraphon(np.full(m, 1.0 / m), model.values)
    raise GraphonError(f"{type(model).__name__} is not a step graphon")


# --------------------------------------------------------------------------
# per-trial jobs (module level so worker processes can unpickle them)


def _clique_job(args):
    model, n, trial, master, budget, predictor = args
    seed = derive_seed(master, n, trial)
    G = sample_graph(model, n, seed)
    t0 = time.perf_counter()
    res = max_clique(G, budget)
    ms = int(round((time.perf_counter() - t0) * 1000))
    return TrialRecord(n, trial, seed, res.size, predictor, abs(res.size - predictor) <= 1, res.complete, ms)


def _biclique_job(args):
    model, n, trial, master, budget, predictor = args
    seed = derive_seed(master, n, trial)
    B = sample_bipartite(model, n, seed)
    t0 = time.perf_counter()
    res = max_biclique(B, budget)
    ms = int(round((time.perf_counter() - t0) * 1000))
    return TrialRecord(n, trial, seed, res.size, predictor, abs(res.size - predictor) <= 1, res.complete, ms)


def _oscillation_job(args):
    model, n, trial, master, budget, threshold, small = args
    seed = derive_seed(master, n, trial)
    G = sample_graph(model, n, seed)
    t0 = time.perf_counter()
    res = max_clique(G, budget)
    ms = int(round((time.perf_counter() - t0) * 1000))
    ok = res.size < threshold if small else res.size > threshold
    x = np.asarray(G.labels)
    extra = {
        "window": max_window_count(x, model.breakpoints[-1]) if len(model.breakpoints) % 2 == 0 else 0,
        "min_gap": min_pairwise_gap(x),
    }
    return TrialRecord(n, trial, seed, res.size, threshold, ok, res.complete, ms), extra


def _run_jobs(fn, jobs, workers):
    if workers == 1 or len(jobs) <= 1:
        out = [fn(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(fn, jobs, chunksize=1))
    # gather order is irrelevant: sort by (n, trial)
    key = (lambda r: (r[0].n, r[0].trial)) if out and isinstance(out[0], tuple) else (lambda r: (r.n, r.trial))
    return sorted(out, key=key)


def _mean(xs):
    return float(np.mean(xs)) if len(xs) else None


def _per_n_summary(records, n):
    recs = [r for r in records if r.n == n]
    omegas = [r.omega for r in recs]
    logn = math.log(n) if n > 1 else None
    return {
        "n": n,
        "trials": len(recs),
        "predictor": recs[0].predictor if recs else None,
        "mean_omega": _mean(omegas),
        "mean_omega_over_log_n": _mean([w / logn for w in omegas]) if logn else None,
        "within_one_fraction": _mean([r.within_one for r in recs]),
        "complete_fraction": _mean([r.complete for r in recs]),
        "above_predictor_plus_one_fraction": _mean([r.omega > r.predictor + 1 for r in recs]),
    }


# --------------------------------------------------------------------------
# experiments


def run_clique_scaling(spec: ExperimentSpec) -> ExperimentResult:
    """Exact clique numbers of G(n,W) against the first-moment predictor."""
    W = as_step_graphon(spec.model)
    kap = kappa(W).value
    jobs = []
    preds = {}
    for n in spec.n_grid:
        preds[n] = first_moment_predictor("clique", W, n)
        jobs += [(W, n, t, spec.master_seed, spec.budget, preds[n]) for t in range(spec.trials)]
    records = _run_jobs(_clique_job, jobs, spec.workers)
    per_n = []
    for n in spec.n_grid:
        row = _per_n_summary(records, n)
        row["kappa_log_n"] = kap * math.log(n) if n > 1 else None
        per_n.append(row)
    summary = {"kind": "clique_scaling", "kappa": kap, "per_n": per_n}
    summary.update(_sandwich(W, spec.n_grid, per_n))
    return ExperimentResult(records, summary)


def _sandwich(W: StepGraphon, n_grid, per_n) -> dict:
    """Mean omega between the predictors of the constant min and max densities (+-1)."""
    p1, p2 = float(W.P.min()), float(W.P.max())
    if not (0 < p1 and p2 < 1) or W.k == 1:
        return {}
    ok = True
    for row in per_n:
        n = row["n"]
        lo = first_moment_predictor("clique", constant_graphon(p1), n) - 1
        hi = first_moment_predictor("clique", constant_graphon(p2), n) + 1
        row["sandwich"] = [lo, hi]
        ok &= lo <= row["mean_omega"] <= hi
    return {"sandwich_ok": bool(ok)}


def run_biclique_scaling(spec: ExperimentSpec) -> ExperimentResult:
    """Balanced biclique numbers of B(n,U) against the biclique predictor."""
    U = spec.model
    if not isinstance(U, StepBigraphon):
        raise GraphonError("biclique experiments need a step bigraphon model")
    p = float(U.D.max())
    rate = math.inf if p >= 1 else (0.0 if p == 0 else 2.0 / math.log(1.0 / p))
    jobs = []
    for n in spec.n_grid:
        pred = first_moment_predictor("biclique", U, n)
        jobs += [(U, n, t, spec.master_seed, spec.budget, pred) for t in range(spec.trials)]
    records = _run_jobs(_biclique_job, jobs, spec.workers)
    per_n = []
    for n in spec.n_grid:
        row = _per_n_summary(records, n)
        row["rate_log_n"] = rate * math.log(n) if n > 1 else None
        per_n.append(row)
    return ExperimentResult(records, {"kind": "biclique_scaling", "reference_rate": rate, "per_n": per_n})


def two_value_mass(values) -> tuple:
    """Largest fraction of values on two consecutive integers, and the lower one."""
    counts = Counter(int(v) for v in values)
    total = sum(counts.values())
    best, at = 0, None
    for v in sorted(counts):
        mass = counts[v] + counts.get(v + 1, 0)
        if mass > best:
            best, at = mass, v
    return (best / total if total else 0.0), at


def run_concentration(spec: ExperimentSpec) -> ExperimentResult:
    """Empirical distribution of the clique number at a single n."""
    if len(spec.n_grid) != 1:
        raise ValueError("concentration runs at a single n")
    W = as_step_graphon(spec.model)
    n = spec.n_grid[0]
    pred = first_moment_predictor("clique", W, n)
    jobs = [(W, n, t, spec.master_seed, spec.budget, pred) for t in range(spec.trials)]
    records = _run_jobs(_clique_job, jobs, spec.workers)
    omegas = np.array([r.omega for r in records], dtype=float)
    mass, at = two_value_mass(omegas)
    mean = float(omegas.mean())
    summary = {
        "kind": "concentration",
        "n": n,
        "distribution": {str(k): v for k, v in sorted(Counter(int(w) for w in omegas).items())},
        "two_value_mass": mass,
        "two_value_lower": at,
        "mean": mean,
        "cv": float(omegas.std() / mean) if mean > 0 else None,
        "complete_fraction": _mean([r.complete for r in records]),
    }
    return ExperimentResult(records, summary)


def max_window_count(x, width: float) -> int:
    """Most points of ``x`` inside one closed window of the given width."""
    x = np.sort(np.asarray(x, dtype=float))
    if x.size == 0:
        return 0
    hi = np.searchsorted(x, x + width, side="right")
    return int((hi - np.arange(x.size)).max())


def min_pairwise_gap(x) -> float:
    x = np.sort(np.asarray(x, dtype=float))
    return float(np.diff(x).min()) if x.size > 1 else math.inf


def min_gap_check(n: int, trials: int, master_seed: int) -> tuple:
    """Fraction of trials whose n latent coordinates have min gap > n^-3, and the exact probability."""
    g = float(n) ** -3
    hits = 0
    for t in range(trials):
        x = _open_uniform(derive_seed(master_seed, n, t), "labels", n)
        hits += min_pairwise_gap(x) > g
    # n uniform points on [0,1] have all gaps > g with probability (1 - (n-1) g)^n
    exact = max(0.0, 1.0 - (n - 1) * g) ** n
    return hits / trials, exact


def run_oscillation(spec: ExperimentSpec) -> ExperimentResult:
    """Clique numbers of a distance-threshold graphon at two lists of scales.

    ``params``: ``small_n`` and ``large_n`` (lists of sizes), ``small_below``
    (omega must be strictly smaller at small scales) and ``large_above``
    (omega must be strictly larger at large scales). In the records the
    predictor column holds the threshold and within_one the pass flag.
    """
    F = spec.model
    if not isinstance(F, DistanceThreshold):
        raise GraphonError("oscillation needs a distance-threshold model")
    prm = spec.params
    small = [int(n) for n in prm.get("small_n", [])]
    large = [int(n) for n in prm.get("large_n", [])]
    jobs = [(F, n, t, spec.master_seed, spec.budget, int(prm["small_below"]), True)
            for n in small for t in range(spec.trials)]
    jobs += [(F, n, t, spec.master_seed, spec.budget, int(prm["large_above"]), False)
             for n in large for t in range(spec.trials)]
    out = _run_jobs(_oscillation_job, jobs, spec.workers)
    records = [r for r, _ in out]
    extras = [e for _, e in out]
    rows = []
    for n in sorted(set(small) | set(large)):
        recs = [(r, e) for r, e in out if r.n == n]
        rows.append({
            "n": n,
            "scale": "small" if n in small else "large",
            "omega": [r.omega for r, _ in recs],
            "pass_fraction": _mean([r.within_one for r, _ in recs]),
            "window_bound_holds": all(r.omega >= e["window"] for r, e in recs),
        })
    summary = {
        "kind": "oscillation",
        "per_n": rows,
        "all_pass": all(r.within_one for r in records),
        "window_bound_holds": all(r.omega >= e["window"] for r, e in zip(records, extras)),
    }
    return ExperimentResult(records, summary)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    runners = {
        "clique_scaling": run_clique_scaling,
        "biclique_scaling": run_biclique_scaling,
        "concentration": run_concentration,
        "oscillation": run_oscillation,
    }
    if spec.kind not in runners:
        raise ValueError(f"{spec.kind} is not a Monte Carlo experiment")
    return runners[spec.kind](spec)
