"""Step graphons, step bigraphons and a few function graphons.

Step graphons are laid out canonically on (0,1): block ``i`` is the interval
``(c_{i-1}, c_i]`` with ``c = cumsum(beta)``, so a boundary point belongs to
the lower-index block.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

MEASURE_TOL = 1e-12


class GraphonError(ValueError):
    """Raised for malformed graphon data."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_measure(beta: np.ndarray, name: str) -> None:
    if beta.ndim != 1 or beta.size == 0:
        raise GraphonError(f"{name} must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(beta)) or np.any(beta <= 0):
        raise GraphonError(f"{name} entries must be positive")
    total = float(beta.sum())
    if abs(total - 1.0) > MEASURE_TOL:
        raise GraphonError(f"{name} sums to {total!r}, expected 1")


def _check_density(P: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(P)) or np.any(P < 0) or np.any(P > 1):
        raise GraphonError(f"{name} entries must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class LogRateMatrix:
    """Entrywise ``log(1/P)``; ``+inf`` where the density is zero."""

    values: np.ndarray

    def __post_init__(self):
        L = _frozen(self.values)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise GraphonError("log-rate matrix must be square")
        if np.any(np.isnan(L)) or np.any(L < 0):
            raise GraphonError("log-rate entries must be in [0, +inf]")
        if not np.array_equal(L, L.T):
            raise GraphonError("log-rate matrix must be symmetric")
        object.__setattr__(self, "values", L)

    def densities(self) -> np.ndarray:
        return np.exp(-self.values)


@dataclass(frozen=True, eq=False)
class StepGraphon:
    """Block measures ``beta`` and a symmetric density matrix ``P``."""

    beta: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        beta = _frozen(self.beta)
        P = _frozen(self.P)
        _check_measure(beta, "beta")
        if P.shape != (beta.size, beta.size):
            raise GraphonError(f"P has shape {P.shape}, expected {(beta.size, beta.size)}")
        _check_density(P, "P")
        if not np.array_equal(P, P.T):
            raise GraphonError("P must be symmetric")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "P", P)

    @property
    def k(self) -> int:
        return int(self.beta.size)

    @cached_property
    def L(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            L = -np.log(self.P)
        L[self.P == 0] = np.inf
        L[self.P == 1] = 0.0
        L.setflags(write=False)
        return L

    @cached_property
    def edges(self) -> np.ndarray:
        return np.cumsum(self.beta)

    def block_of(self, x):
        """Block index of points in (0,1); boundaries go to the lower block."""
        x = np.asarray(x, dtype=float)
        if np.any((x <= 0) | (x >= 1)):
            raise GraphonError("coordinates must lie in the open interval (0, 1)")
        idx = np.searchsorted(self.edges, x, side="left")
        return np.minimum(idx, self.k - 1)

    def __call__(self, x, y):
        return evaluate(self, x, y)

    def to_dict(self) -> dict:
        return {"beta": self.beta.tolist(), "P": self.P.tolist()}

    def __eq__(self, other):
        if not isinstance(other, StepGraphon):
            return NotImplemented
        return np.array_equal(self.beta, other.beta) and np.array_equal(self.P, other.P)

    def __hash__(self):
        return hash((self.beta.tobytes(), self.P.tobytes()))

    def __repr__(self):
        return f"StepGraphon(beta={self.beta.tolist()}, P={self.P.tolist()})"


@dataclass(frozen=True, eq=False)
class StepBigraphon:
    """Left/right block measures and a (not necessarily square) density matrix."""

    betaL: np.ndarray
    betaR: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        bl, br, D = _frozen(self.betaL), _frozen(self.betaR), _frozen(self.D)
        _check_measure(bl, "betaL")
        _check_measure(br, "betaR")
        if D.shape != (bl.size, br.size):
            raise GraphonError(f"D has shape {D.shape}, expected {(bl.size, br.size)}")
        _check_density(D, "D")
        object.__setattr__(self, "betaL", bl)
        object.__setattr__(self, "betaR", br)
        object.__setattr__(self, "D", D)

    @property
    def kL(self) -> int:
        return int(self.betaL.size)

    @property
    def kR(self) -> int:
        return int(self.betaR.size)

    def mean(self) -> float:
        return float(self.betaL @ self.D @ self.betaR)

    def conjugate(self) -> StepBigraphon:
        return StepBigraphon(self.betaR, self.betaL, self.D.T)

    def to_dict(self) -> dict:
        return {"betaL": self.betaL.tolist(), "betaR": self.betaR.tolist(), "D": self.D.tolist()}

    def __eq__(self, other):
        if not isinstance(other, StepBigraphon):
            return NotImplemented
        return (np.array_equal(self.betaL, other.betaL) and np.array_equal(self.betaR, other.betaR)
                and np.array_equal(self.D, other.D))

    def __hash__(self):
        return hash((self.betaL.tobytes(), self.betaR.tobytes(), self.D.tobytes()))


@dataclass(frozen=True, eq=False)
class SubsetFraction:
    """A subset of a step graphon, up to measure: ``t_i`` is its mass in block ``i``."""

    t: np.ndarray

    def __post_init__(self):
        t = _frozen(self.t)
        if t.ndim != 1 or np.any(~np.isfinite(t)) or np.any(t < 0):
            raise GraphonError("subset fractions must be finite and nonnegative")
        if t.sum() <= 0:
            raise GraphonError("subset must have positive measure")
        object.__setattr__(self, "t", t)

    @property
    def mass(self) -> float:
        return float(self.t.sum())

    def check_within(self, W: StepGraphon) -> None:
        if self.t.size != W.k:
            raise GraphonError("subset dimension does not match block count")
        if np.any(self.t > W.beta * (1 + 1e-12)):
            raise GraphonError("subset exceeds a block measure")


# --------------------------------------------------------------------------
# Function graphons


class FunctionGraphon:
    """A symmetric measurable function on (0,1)^2, vectorized over arrays."""

    family: str = ""

    def __call__(self, x, y):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantGraphon(FunctionGraphon):
    p: float
    family: str = field(default="constant", init=False)

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise GraphonError("constant density must lie in [0, 1]")

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return np.full(x.shape, float(self.p))

    def to_dict(self):
        return {"family": self.family, "p": self.p}


@dataclass(frozen=True, eq=False)
class DistanceThreshold(FunctionGraphon):
    """0/1 graphon depending on ``|x-y|`` through alternating bands.

    With breakpoints ``1 = a_1 > a_2 > ... > a_m``, the band
    ``a_i >= |x-y| > a_{i+1}`` (``a_{m+1} = 0``) has value 0 for odd ``i`` and
    1 for even ``i``. The diagonal ``x = y`` has value 1.
    """

    breakpoints: tuple
    family: str = field(default="distance_threshold", init=False)

    def __post_init__(self):
        a = np.asarray(self.breakpoints, dtype=float)
        if a.ndim != 1 or a.size == 0:
            raise GraphonError("need at least one breakpoint")
        if a[0] != 1.0:
            raise GraphonError("the first breakpoint must be 1")
        if np.any(np.diff(a) >= 0) or a[-1] <= 0:
            raise GraphonError("breakpoints must be strictly decreasing in (0, 1]")
        object.__setattr__(self, "breakpoints", tuple(float(v) for v in a))

    def band(self, d):
        """1-based band index of distances ``d`` (0 for ``d == 0``)."""
        a = np.asarray(self.breakpoints)
        d = np.asarray(d, dtype=float)
        # number of breakpoints >= d
        idx = a.size - np.searchsorted(a[::-1], d, side="left")
        return np.where(d == 0, 0, idx)

    def __call__(self, x, y):
        d = np.abs(np.asarray(x, float) - np.asarray(y, float))
        b = self.band(d)
        return np.where((b % 2 == 0), 1.0, 0.0)

    def to_dict(self):
        return {"family": self.family, "breakpoints": list(self.breakpoints)}


@dataclass(frozen=True, eq=False)
class GridStep(FunctionGraphon):
    """Piecewise-constant function on an ``m x m`` uniform grid of (0,1)^2."""

    values: np.ndarray
    family: str = field(default="grid_step", init=False)

    def __post_init__(self):
        V = _frozen(self.values)
        if V.ndim != 2 or V.shape[0] != V.shape[1] or V.size == 0:
            raise GraphonError("grid values must form a nonempty square matrix")
        _check_density(V, "grid values")
        if not np.array_equal(V, V.T):
            raise GraphonError("grid values must be symmetric")
        object.__setattr__(self, "values", V)

    def __call__(self, x, y):
        m = self.values.shape[0]
        i = np.clip((np.asarray(x, float) * m).astype(int), 0, m - 1)
        j = np.clip((np.asarray(y, float) * m).astype(int), 0, m - 1)
        return self.values[i, j]

    def to_dict(self):
        return {"family": self.family, "values": self.values.tolist()}


# --------------------------------------------------------------------------
# Operations


def make_step_graphon(beta: Sequence[float], P) -> StepGraphon:
    return StepGraphon(np.asarray(beta, float), np.asarray(P, float))


def constant_graphon(p: float) -> StepGraphon:
    return StepGraphon([1.0], [[p]])


def make_distance_graphon(breakpoints: Sequence[float]) -> DistanceThreshold:
    return DistanceThreshold(tuple(breakpoints))


def evaluate(W: StepGraphon, x, y):
    """Density at ``(x, y)``; scalar in, scalar out."""
    bx, by = W.block_of(x), W.block_of(y)
    out = W.P[bx, by]
    return float(out) if np.ndim(out) == 0 else out


def complement(W: StepGraphon) -> StepGraphon:
    """Entrywise ``1 - P``; applying it twice returns the original object.

    ``1 - (1 - p)`` is not always ``p`` in floating point, so the result
    remembers its source to keep the involution exact.
    """
    source = W.__dict__.get("_complement_of")
    if source is not None:
        return source
    out = StepGraphon(W.beta, 1.0 - W.P)
    object.__setattr__(out, "_complement_of", W)
    return out


def clip_max(W: StepGraphon, j: int) -> StepGraphon:
    if j < 2:
        raise GraphonError("clip level j must be at least 2")
    return StepGraphon(W.beta, np.minimum(W.P, 1.0 - 1.0 / j))


def restrict(W: StepGraphon, t) -> StepGraphon:
    """Subgraphon on a subset with per-block masses ``t``, measure rescaled to 1."""
    if not isinstance(t, SubsetFraction):
        t = SubsetFraction(np.asarray(t, float))
    t.check_within(W)
    keep = np.flatnonzero(t.t > 0)
    beta = t.t[keep] / t.t.sum()
    # renormalize away rounding so the measure check holds
    beta = beta / beta.sum()
    return StepGraphon(beta, W.P[np.ix_(keep, keep)])


def log_rate_matrix(W: StepGraphon) -> LogRateMatrix:
    return LogRateMatrix(np.array(W.L))


def discretize(F, m: int, s: int = 16) -> StepGraphon:
    """Average ``F`` over an ``m x m`` grid with ``s x s`` midpoints per cell."""
    if m < 1 or s < 1:
        raise GraphonError("grid and subsample sizes must be positive")
    pts = (np.arange(m * s) + 0.5) / (m * s)
    P = np.empty((m, m))
    # row-blocked to keep the evaluation grid small
    for i in range(m):
        xs = pts[i * s:(i + 1) * s]
        vals = np.asarray(F(xs[:, None], pts[None, :]), dtype=float)
        P[i] = vals.reshape(s, m, s).mean(axis=(0, 2))
    P = 0.5 * (P + P.T)
    return StepGraphon(np.full(m, 1.0 / m), np.clip(P, 0.0, 1.0))


# --------------------------------------------------------------------------
# JSON documents


def model_from_dict(doc: dict):
    """Build a step graphon, step bigraphon or function graphon from a document."""
    if "P" in doc:
        return StepGraphon(np.asarray(doc["beta"], float), np.asarray(doc["P"], float))
    if "D" in doc:
        return StepBigraphon(np.asarray(doc["betaL"], float), np.asarray(doc["betaR"], float),
                             np.asarray(doc["D"], float))
    family = doc.get("family")
    if family == "constant":
        return ConstantGraphon(float(doc["p"]))
    if family == "distance_threshold":
        return DistanceThreshold(tuple(doc["breakpoints"]))
    if family == "grid_step":
        return GridStep(np.asarray(doc["values"], float))
    raise GraphonError(f"unrecognized model document with keys {sorted(doc)}")


def _reject_strings(obj):
    if isinstance(obj, str):
        raise GraphonError(f"densities must be numbers, got string {obj!r}")
    if isinstance(obj, list):
        for v in obj:
            _reject_strings(v)


def loads_model(text: str):
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise GraphonError("model document must be a JSON object")
    for key in ("beta", "P", "betaL", "betaR", "D", "breakpoints", "values"):
        if key in doc:
            _reject_strings(doc[key])
    return model_from_dict(doc)


def load_model(path):
    with open(path) as fh:
        return loads_model(fh.read())


def dumps_model(model) -> str:
    return json.dumps(model.to_dict())
