"""Homomorphism densities, expected (bi)clique counts and second moments.

Two independent routes are provided for clique and biclique densities:
``hom_density``/``bip_density`` sum over every block assignment with
``einsum``; ``log_clique_density``/``log_biclique_density`` sum over block
*profiles* (how many vertices land in each block) in log space, which is what
the expected-count predictors use at large k.
"""

from __future__ import annotations

import itertools
import json
import math
import string
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import BudgetExceeded
from .graphon import StepBigraphon, StepGraphon
from .optimization import _compositions

TERM_BUDGET = 10**8
PROFILE_BUDGET = 10**6
_LETTERS = string.ascii_letters


def _edges_of(H):
    """``(num_vertices, edge list)`` from a networkx graph or a ``(n, edges)`` pair."""
    if hasattr(H, "number_of_nodes"):
        nodes = list(H.nodes())
        index = {v: i for i, v in enumerate(nodes)}
        return len(nodes), [(index[u], index[v]) for u, v in H.edges()]
    n, edges = H
    return int(n), [(int(u), int(v)) for u, v in edges]


def complete_graph(k: int):
    return k, list(itertools.combinations(range(k), 2))


def hom_density(H, W: StepGraphon) -> float:
    """t(H, W) summed over all block assignments of the vertices of H."""
    nv, edges = _edges_of(H)
    if nv > 10:
        raise ValueError("hom_density supports at most 10 vertices")
    if W.k ** nv > TERM_BUDGET:
        raise BudgetExceeded("block assignment count exceeds the term budget")
    if nv == 0:
        return 1.0
    terms, ops = [], []
    for v in range(nv):
        terms.append(_LETTERS[v])
        ops.append(W.beta)
    for u, v in edges:
        if u == v:
            raise ValueError("H must be simple")
        terms.append(_LETTERS[u] + _LETTERS[v])
        ops.append(W.P)
    return float(np.einsum(",".join(terms) + "->", *ops, optimize=True))


@dataclass(frozen=True)
class Bigraph:
    """Bipartite graph with a distinguished (left, right) side order."""

    p: int
    q: int
    edges: tuple = field(default_factory=tuple)

    def __post_init__(self):
        edges = tuple(sorted(set((int(i), int(j)) for i, j in self.edges)))
        for i, j in edges:
            if not (0 <= i < self.p and 0 <= j < self.q):
                raise ValueError(f"edge {(i, j)} out of range for sides ({self.p}, {self.q})")
        object.__setattr__(self, "edges", edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def flipped(self) -> Bigraph:
        return Bigraph(self.q, self.p, tuple((j, i) for i, j in self.edges))

    def disjoint_union(self, other: Bigraph) -> Bigraph:
        shifted = tuple((i + self.p, j + self.q) for i, j in other.edges)
        return Bigraph(self.p + other.p, self.q + other.q, self.edges + shifted)


def complete_bigraph(n: int, m: int) -> Bigraph:
    return Bigraph(n, m, tuple(itertools.product(range(n), range(m))))


def bip_density(H: Bigraph, U: StepBigraphon) -> float:
    """t_B(H, U): left vertices of H take left blocks, right vertices right blocks."""
    if U.kL ** H.p * U.kR ** H.q > TERM_BUDGET:
        raise BudgetExceeded("block assignment count exceeds the term budget")
    if H.p + H.q > len(_LETTERS):
        raise ValueError("bigraph too large")
    left = _LETTERS[:H.p]
    right = _LETTERS[H.p:H.p + H.q]
    terms = [c for c in left] + [c for c in right] + [left[i] + right[j] for i, j in H.edges]
    ops = [U.betaL] * H.p + [U.betaR] * H.q + [U.D] * len(H.edges)
    if not terms:
        return 1.0
    return float(np.einsum(",".join(terms) + "->", *ops, optimize=True))


def sidorenko_gap(U: StepBigraphon, n: int, m: int) -> float:
    """t_B(K_{n,m}, U) - (mean U)^{nm}; nonnegative for every U."""
    return bip_density(complete_bigraph(n, m), U) - U.mean() ** (n * m)


def glued_bigraph(ell: int, p: int, q: int) -> Bigraph:
    """Two copies of K_{ell,ell} sharing p left and q right vertices."""
    if not (0 <= p <= ell and 0 <= q <= ell) or ell < 0:
        raise ValueError("need 0 <= p, q <= ell")
    left1, right1 = range(ell), range(ell)
    left2 = list(range(p)) + list(range(ell, 2 * ell - p))
    right2 = list(range(q)) + list(range(ell, 2 * ell - q))
    edges = set(itertools.product(left1, right1)) | set(itertools.product(left2, right2))
    return Bigraph(2 * ell - p, 2 * ell - q, tuple(edges))


# --------------------------------------------------------------------------
# profile sums in log space


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(x, dtype=float))


def _log_multinomials(C: np.ndarray) -> np.ndarray:
    total = C.sum(axis=1)
    return gammaln(total + 1.0) - gammaln(C + 1.0).sum(axis=1)


def _xlogy(count, logv):
    # count * log v with 0 * (-inf) = 0
    return np.where(count > 0, count * np.where(count > 0, logv, 0.0), 0.0)


def _logsumexp(v: np.ndarray) -> float:
    top = np.max(v)
    if not np.isfinite(top):
        return float(top)
    return float(top + math.log(np.sum(np.exp(v - top))))


def log_clique_density(W: StepGraphon, k: int, budget: int = PROFILE_BUDGET) -> float:
    """log t(K_k, W) as a sum over block profiles of the k vertices."""
    if k <= 1:
        return 0.0
    if math.comb(k + W.k - 1, W.k - 1) > budget:
        raise BudgetExceeded("profile count exceeds the enumeration budget")
    C = _compositions(k, W.k).astype(float)
    logP, logb = _log(W.P), _log(W.beta)
    terms = _log_multinomials(C) + _xlogy(C, logb[None, :]).sum(axis=1)
    terms = terms + _xlogy(C * (C - 1) / 2, np.diag(logP)[None, :]).sum(axis=1)
    for i, j in zip(*np.triu_indices(W.k, 1)):
        terms = terms + _xlogy(C[:, i] * C[:, j], logP[i, j])
    return _logsumexp(terms)


def log_biclique_density(U: StepBigraphon, ell: int, budget: int = PROFILE_BUDGET) -> float:
    """log t_B(K_{ell,ell}, U) as a sum over left and right block profiles."""
    if ell == 0:
        return 0.0
    nA = math.comb(ell + U.kL - 1, U.kL - 1)
    nB = math.comb(ell + U.kR - 1, U.kR - 1)
    if nA * nB > budget:
        raise BudgetExceeded("profile count exceeds the enumeration budget")
    A = _compositions(ell, U.kL).astype(float)
    B = _compositions(ell, U.kR).astype(float)
    la = _log_multinomials(A) + _xlogy(A, _log(U.betaL)[None, :]).sum(axis=1)
    lb = _log_multinomials(B) + _xlogy(B, _log(U.betaR)[None, :]).sum(axis=1)
    logD = _log(U.D)
    # edge term: sum_ij a_i b_j log D_ij
    cnt = A[:, None, :, None] * B[None, :, None, :]
    edge = _xlogy(cnt, logD[None, None, :, :]).sum(axis=(2, 3))
    return _logsumexp((la[:, None] + lb[None, :] + edge).ravel())


def _log_comb(n: int, k: int) -> float:
    c = math.comb(n, k)
    return math.log(c) if c else -math.inf


def expected_clique_count(W: StepGraphon, n: int, k: int) -> float:
    """E[number of k-cliques in G(n,W)] = C(n,k) t(K_k, W)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > n:
        return 0.0
    return math.exp(_log_comb(n, k) + log_clique_density(W, k))


def expected_profile_count(W: StepGraphon, n: int, m1: int, m2: int) -> float:
    """E[number of cliques with m1 vertices in block 1 and m2 in block 2]."""
    if W.k != 2:
        raise ValueError("profile counts are defined for 2-block graphons")
    if m1 < 0 or m2 < 0 or m1 + m2 > n:
        raise ValueError("need m1, m2 >= 0 and m1 + m2 <= n")
    b1, b2 = W.beta
    P = W.P
    return (math.comb(n, m1 + m2) * math.comb(m1 + m2, m1) * b1 ** m1 * b2 ** m2
            * P[0, 0] ** math.comb(m1, 2) * P[1, 1] ** math.comb(m2, 2) * P[0, 1] ** (m1 * m2))


def expected_biclique_count(U: StepBigraphon, n: int, ell: int) -> float:
    """E[number of (X, Y), |X| = |Y| = ell, complete in B(n,U)] = C(n,ell)^2 t_B(K_{ell,ell})."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    if ell == 0:
        return 1.0
    if ell > n:
        return 0.0
    return math.comb(n, ell) ** 2 * bip_density(complete_bigraph(ell, ell), U)


def _log_multinomial_int(n: int, parts) -> float:
    rest = n - sum(parts)
    if rest < 0 or min(parts) < 0:
        return -math.inf
    return math.lgamma(n + 1) - sum(math.lgamma(x + 1) for x in parts) - math.lgamma(rest + 1)


def _multinomial_int(n: int, parts) -> int:
    rest = n - sum(parts)
    if rest < 0 or min(parts) < 0:
        return 0
    out = math.factorial(n) // math.factorial(rest)
    for x in parts:
        out //= math.factorial(x)
    return out


def _constant_density(U: StepBigraphon):
    vals = np.unique(U.D)
    return float(vals[0]) if vals.size == 1 else None


def expected_overlap_count(U: StepBigraphon, n: int, ell: int, p: int, q: int) -> float:
    """E[ordered pairs of ell-bicliques sharing exactly p left and q right vertices]."""
    if not (0 <= p <= ell and 0 <= q <= ell):
        raise ValueError("need 0 <= p, q <= ell")
    ways = _multinomial_int(n, (ell - p, ell - p, p)) * _multinomial_int(n, (ell - q, ell - q, q))
    if ways == 0:
        return 0.0
    d = _constant_density(U)
    t = d ** (2 * ell * ell - p * q) if d is not None else bip_density(glued_bigraph(ell, p, q), U)
    return ways * t


@dataclass(frozen=True)
class MomentReport:
    n: int
    ell: int
    ex: float
    ex2: float
    ratio: float | None
    table: dict

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "ell": self.ell,
            "ex": self.ex,
            "ex2": self.ex2,
            "ratio": self.ratio,
            "table": [{"p": p, "q": q, "value": v} for (p, q), v in sorted(self.table.items())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def second_moment_report(U: StepBigraphon, n: int, ell: int) -> MomentReport:
    ex = expected_biclique_count(U, n, ell)
    table = {}
    ex2 = 0.0
    for p in range(ell + 1):
        for q in range(ell + 1):
            table[(p, q)] = expected_overlap_count(U, n, ell, p, q)
            ex2 += table[(p, q)]
    ratio = ex2 / ex ** 2 if ex > 0 else None
    return MomentReport(n, ell, ex, ex2, ratio, table)


# --------------------------------------------------------------------------
# bounded clique limit and the first-moment predictor


def bounded_clique_limit(W: StepGraphon) -> float:
    """sup{k : t(K_k, W) > 0}; infinite as soon as some block has positive self-density."""
    P = W.P
    if np.any(np.diag(P) > 0):
        return math.inf
    support = P > 0
    best = 1
    for size in range(2, W.k + 1):
        found = any(all(support[i, j] for i, j in itertools.combinations(S, 2))
                    for S in itertools.combinations(range(W.k), size))
        if not found:
            break
        best = size
    return best


def _log_expected(kind: str, model, n: int, k: int) -> float:
    if kind == "clique":
        return _log_comb(n, k) + log_clique_density(model, k)
    return 2.0 * _log_comb(n, k) + log_biclique_density(model, k)


def first_moment_predictor(kind: str, model, n: int) -> int:
    """Largest k >= 1 with expected (bi)clique count at least 1; 0 if none."""
    if kind not in ("clique", "biclique"):
        raise ValueError("kind must be 'clique' or 'biclique'")
    if kind == "clique" and not isinstance(model, StepGraphon):
        raise TypeError("clique predictor needs a step graphon")
    if kind == "biclique" and not isinstance(model, StepBigraphon):
        raise TypeError("biclique predictor needs a step bigraphon")
    pmax = float(np.max(model.P if kind == "clique" else model.D))
    logp = math.log(pmax) if pmax > 0 else -math.inf
    best = 0
    for k in range(1, n + 1):
        if _log_expected(kind, model, n, k) >= 0:
            best = k
        # crude bound on the expected count and on its growth from k to k + 1
        if kind == "clique":
            bound = _log_comb(n, k) + _xlogy(math.comb(k, 2), logp)
            growth = math.log((n - k) / (k + 1)) + k * logp if k < n else -math.inf
        else:
            bound = 2 * _log_comb(n, k) + _xlogy(k * k, logp)
            growth = 2 * math.log((n - k) / (k + 1)) + (2 * k + 1) * logp if k < n else -math.inf
        if bound < 0 and growth < 0:
            break
    return best
