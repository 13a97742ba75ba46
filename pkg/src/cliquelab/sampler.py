"""Seeded samplers for G(n,W), H(n,W) and B(n,U).

Latent labels use stream ``labels`` (``labels_right`` for the right side of a
bipartite sample); the coin of pair ``(i, j)``, ``i < j``, is the uniform at
stream ``edges`` and counters ``(i, j)``. The edge is present iff the coin is
below the pair's density. ``sample_graph(W, n, s)`` is therefore *pathwise*
equal to ``bernoulli_realize(sample_weighted(W, n, s), s)``, and two graphons
with ``P <= P'`` yield nested edge sets under the same seed.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .graphon import FunctionGraphon, StepBigraphon, StepGraphon
from .rng import random_u64, uniform


def _frozen(a, dtype):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampledGraph:
    n: int
    adjacency: np.ndarray
    labels: np.ndarray
    seed: int

    def __post_init__(self):
        A = _frozen(self.adjacency, bool)
        if A.shape != (self.n, self.n):
            raise ValueError("adjacency shape does not match n")
        if not np.array_equal(A, A.T) or A.diagonal().any():
            raise ValueError("adjacency must be symmetric without self-loops")
        object.__setattr__(self, "adjacency", A)
        object.__setattr__(self, "labels", np.array(self.labels))

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def edges(self):
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def complement(self) -> SampledGraph:
        A = ~self.adjacency
        np.fill_diagonal(A, False)
        return SampledGraph(self.n, A, self.labels, self.seed)


@dataclass(frozen=True, eq=False)
class WeightedCompleteGraph:
    n: int
    w: np.ndarray
    labels: np.ndarray
    seed: int

    def __post_init__(self):
        w = _frozen(self.w, float)
        if w.shape != (self.n, self.n):
            raise ValueError("weight matrix shape does not match n")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        if np.any(w < 0) or np.any(w > 1):
            raise ValueError("weights must lie in [0, 1]")
        if not np.all(w.diagonal() == 1):
            raise ValueError("self-weights must be 1")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "labels", np.array(self.labels))


@dataclass(frozen=True, eq=False)
class BipartiteSample:
    nL: int
    nR: int
    biadjacency: np.ndarray
    left_labels: np.ndarray
    right_labels: np.ndarray
    seed: int

    def __post_init__(self):
        B = _frozen(self.biadjacency, bool)
        if B.shape != (self.nL, self.nR):
            raise ValueError("biadjacency shape does not match (nL, nR)")
        object.__setattr__(self, "biadjacency", B)

    @property
    def num_edges(self) -> int:
        return int(self.biadjacency.sum())


def _coins(seed: int, n: int) -> np.ndarray:
    idx = np.arange(n, dtype=np.uint64)
    lo = np.minimum(idx[:, None], idx[None, :])
    hi = np.maximum(idx[:, None], idx[None, :])
    return uniform(seed, "edges", lo, hi)


def _open_uniform(seed: int, stream: str, n: int) -> np.ndarray:
    # midpoint of the 2^-53 cell, so never exactly 0
    bits = random_u64(seed, stream, np.arange(n, dtype=np.uint64))
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


def _labels(model, seed: int, n: int, stream: str, beta=None):
    u = _open_uniform(seed, stream, n)
    if isinstance(model, FunctionGraphon):
        return u
    cum = np.cumsum(beta)
    return np.minimum(np.searchsorted(cum, u, side="left"), len(beta) - 1).astype(np.int64)


def _pair_densities(W, labels) -> np.ndarray:
    if isinstance(W, StepGraphon):
        D = W.P[labels[:, None], labels[None, :]]
    elif isinstance(W, FunctionGraphon):
        D = np.asarray(W(labels[:, None], labels[None, :]), dtype=float)
        D = np.broadcast_to(D, (labels.size, labels.size)).copy()
    else:
        raise TypeError(f"cannot sample from {type(W).__name__}")
    np.fill_diagonal(D, 1.0)
    return D


def sample_weighted(W, n: int, seed: int) -> WeightedCompleteGraph:
    """H(n,W): pair weights are the densities at the latent labels."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    beta = W.beta if isinstance(W, StepGraphon) else None
    labels = _labels(W, seed, n, "labels", beta)
    return WeightedCompleteGraph(n, _pair_densities(W, labels), labels, seed)


def bernoulli_realize(H: WeightedCompleteGraph, seed: int) -> SampledGraph:
    A = _coins(seed, H.n) < H.w
    np.fill_diagonal(A, False)
    return SampledGraph(H.n, A, H.labels, seed)


def sample_graph(W, n: int, seed: int) -> SampledGraph:
    """G(n,W) with all randomness derived from ``seed``."""
    return bernoulli_realize(sample_weighted(W, n, seed), seed)


def sample_bipartite(U: StepBigraphon, n: int, seed: int, nR: int | None = None) -> BipartiteSample:
    if n < 0:
        raise ValueError("n must be nonnegative")
    nR = n if nR is None else nR
    left = _labels(U, seed, n, "labels", U.betaL)
    right = _labels(U, seed, nR, "labels_right", U.betaR)
    coins = uniform(seed, "edges", np.arange(n, dtype=np.uint64)[:, None],
                    np.arange(nR, dtype=np.uint64)[None, :])
    B = coins < U.D[left[:, None], right[None, :]]
    return BipartiteSample(n, nR, B, left, right, seed)


# --------------------------------------------------------------------------
# Edge-list export


def format_edgelist(G) -> str:
    """``n=<n> seed=<seed>`` header, then ``u v`` (or ``u v w``) lines, 0-indexed."""
    out = io.StringIO()
    out.write(f"n={G.n} seed={G.seed}\n")
    if isinstance(G, WeightedCompleteGraph):
        for i in range(G.n):
            for j in range(i + 1, G.n):
                out.write(f"{i} {j} {G.w[i, j]:.17g}\n")
    else:
        for i, j in G.edges():
            out.write(f"{i} {j}\n")
    return out.getvalue()


def parse_edgelist(text: str):
    """Inverse of :func:`format_edgelist`; returns ``(n, seed, rows)``."""
    lines = text.strip().splitlines()
    header = dict(part.split("=") for part in lines[0].split())
    rows = []
    for line in lines[1:]:
        parts = line.split()
        if len(parts) == 2:
            rows.append((int(parts[0]), int(parts[1])))
        else:
            rows.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return int(header["n"]), int(header["seed"]), rows
