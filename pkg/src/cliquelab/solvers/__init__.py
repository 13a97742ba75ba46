"""Exact maximum clique, clique counting, maximum balanced biclique."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import biclique_bb, clique_bb, pack_rows

DEFAULT_BUDGET = 10**8
BRUTEFORCE_MAX_N = 20
BICLIQUE_BRUTEFORCE_MAX = 15


@dataclass(frozen=True)
class CliqueWitness:
    size: int
    vertices: tuple
    complete: bool = True
    nodes: int = 0


@dataclass(frozen=True)
class BicliqueWitness:
    size: int
    left: tuple
    right: tuple
    complete: bool = True
    nodes: int = 0


def _adjacency(G) -> np.ndarray:
    A = getattr(G, "adjacency", G)
    A = np.asarray(A, dtype=bool)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("adjacency must be square")
    return A


def _biadjacency(B) -> np.ndarray:
    return np.asarray(getattr(B, "biadjacency", B), dtype=bool)


def degeneracy_order(A: np.ndarray) -> np.ndarray:
    """Vertices in reverse smallest-last order (densest core first)."""
    n = A.shape[0]
    deg = A.sum(axis=1).astype(np.int64)
    alive = np.ones(n, dtype=bool)
    removed = np.empty(n, dtype=np.int64)
    big = np.iinfo(np.int64).max
    for t in range(n):
        v = int(np.argmin(np.where(alive, deg, big)))
        removed[t] = v
        alive[v] = False
        deg -= A[v]
    return removed[::-1].copy()


def max_clique(G, budget: int = DEFAULT_BUDGET) -> CliqueWitness:
    """Exact clique number with a witness; flagged incomplete if the node budget runs out."""
    A = _adjacency(G)
    n = A.shape[0]
    if n == 0:
        return CliqueWitness(0, ())
    perm = degeneracy_order(A)
    adj = pack_rows(A[np.ix_(perm, perm)])
    size, verts, nodes, complete = clique_bb(adj, n, int(budget), 0)
    if size == 0:
        # budget ran out before any leaf: a single vertex is still a clique
        return CliqueWitness(1, (int(perm[0]),), bool(complete and n <= 1), int(nodes))
    return CliqueWitness(int(size), tuple(sorted(int(perm[v]) for v in verts)), bool(complete), int(nodes))


def clique_number(G, budget: int = DEFAULT_BUDGET) -> int:
    return max_clique(G, budget).size


def max_clique_bruteforce(G) -> int:
    """Clique number by marking every vertex subset (n <= 20)."""
    A = _adjacency(G)
    n = A.shape[0]
    if n > BRUTEFORCE_MAX_N:
        raise ValueError(f"brute force supports n <= {BRUTEFORCE_MAX_N}")
    if n == 0:
        return 0
    nbr = [int(sum(1 << j for j in np.flatnonzero(A[i]))) for i in range(n)]
    is_clique = np.zeros(1 << n, dtype=bool)
    is_clique[0] = True
    for b in range(n):
        lo = np.arange(1 << b, dtype=np.int64)
        # subset = lo + {b} is a clique iff lo is one and b sees all of lo
        is_clique[(1 << b) + lo] = is_clique[lo] & ((lo & nbr[b]) == lo)
    masks = np.flatnonzero(is_clique)
    sizes = np.zeros(masks.size, dtype=np.int64)
    for b in range(n):
        sizes += (masks >> b) & 1
    return int(sizes.max())


def count_cliques(G, k: int) -> int:
    """Number of k-vertex cliques, extending along the degeneracy order."""
    if k < 1:
        raise ValueError("k must be at least 1")
    A = _adjacency(G)
    n = A.shape[0]
    if k == 1:
        return n
    order = degeneracy_order(A)[::-1]
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    # forward neighbours: later in the smallest-last order
    fwd = []
    for v in range(n):
        nb = np.flatnonzero(A[v] & (rank > rank[v]))
        fwd.append(sum(1 << int(u) for u in nb))

    def extend(cands: int, need: int) -> int:
        if need == 0:
            return 1
        if need == 1:
            return bin(cands).count("1")
        total = 0
        rest = cands
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            rest ^= low
            # fwd[v] keeps only later vertices, so each clique is counted once
            total += extend(cands & fwd[v], need - 1)
        return total

    return sum(extend(fwd[v], k - 1) for v in range(n))


def independence_number(G, budget: int = DEFAULT_BUDGET) -> int:
    A = _adjacency(G)
    C = ~A
    np.fill_diagonal(C, False)
    return max_clique(C, budget).size


def clique_weight_product(H, C) -> float:
    w = np.asarray(getattr(H, "w", H), dtype=float)
    idx = np.asarray(sorted(set(int(c) for c in C)), dtype=np.int64)
    if idx.size < 2:
        return 1.0
    sub = w[np.ix_(idx, idx)]
    return float(np.prod(sub[np.triu_indices(idx.size, 1)]))


def max_biclique(B, budget: int = DEFAULT_BUDGET) -> BicliqueWitness:
    """Largest l with a complete K_{l,l} across the sides; 0 without edges."""
    M = _biadjacency(B)
    swapped = M.shape[0] > M.shape[1]
    if swapped:
        M = M.T
    nL, nR = M.shape
    if nL == 0 or nR == 0 or not M.any():
        return BicliqueWitness(0, (), ())
    # branch on the smaller side; seed with a single edge
    size, X, Rbits, nodes, complete = biclique_bb(pack_rows(M), pack_rows(M.T), nL, nR, int(budget), 0)
    left = tuple(sorted(int(x) for x in X))
    if size:
        common = np.logical_and.reduce(M[list(left)], axis=0)
        right = tuple(np.flatnonzero(common)[:size].tolist())
    else:
        i, j = np.argwhere(M)[0]
        size, left, right = 1, (int(i),), (int(j),)
    if swapped:
        left, right = right, left
    return BicliqueWitness(int(size), left, right, bool(complete), int(nodes))


def biclique_number(B, budget: int = DEFAULT_BUDGET) -> int:
    return max_biclique(B, budget).size


def max_biclique_bruteforce(B) -> int:
    """Balanced biclique number over all left subsets (smaller side <= 15)."""
    M = _biadjacency(B)
    if M.shape[0] > M.shape[1]:
        M = M.T
    nL, nR = M.shape
    if nL > BICLIQUE_BRUTEFORCE_MAX:
        raise ValueError(f"brute force supports a side of at most {BICLIQUE_BRUTEFORCE_MAX}")
    if nL == 0:
        return 0
    rows = [int(sum(1 << j for j in np.flatnonzero(M[i]))) for i in range(nL)]
    full = (1 << nR) - 1
    common = [full] * (1 << nL)
    best = 0
    for mask in range(1, 1 << nL):
        low = mask & -mask
        common[mask] = common[mask ^ low] & rows[low.bit_length() - 1]
        best = max(best, min(bin(mask).count("1"), bin(common[mask]).count("1")))
    return best


__all__ = [
    "CliqueWitness", "BicliqueWitness", "DEFAULT_BUDGET", "max_clique", "clique_number",
    "max_clique_bruteforce", "count_cliques", "independence_number", "clique_weight_product",
    "max_biclique", "biclique_number", "max_biclique_bruteforce", "degeneracy_order", "pack_rows",
]
