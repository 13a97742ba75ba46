"""Cross-checks of every module against independent oracles, one verdict per property."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .. import densities as dn
from .. import optimization as op
from ..graphon import (StepBigraphon, StepGraphon, clip_max, complement, log_rate_matrix,
                       make_step_graphon, restrict)
from ..sampler import bernoulli_realize, sample_bipartite, sample_graph, sample_weighted
from ..solvers import (clique_weight_product, count_cliques, max_biclique, max_biclique_bruteforce,
                       max_clique, max_clique_bruteforce)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def random_step_graphon(rng, k: int, lo: float = 0.05, hi: float = 0.95) -> StepGraphon:
    beta = rng.dirichlet(np.ones(k))
    beta = beta / beta.sum()
    P = rng.uniform(lo, hi, (k, k))
    P = np.triu(P) + np.triu(P, 1).T
    return make_step_graphon(beta, P)


def random_step_bigraphon(rng, kL: int, kR: int) -> StepBigraphon:
    bl = rng.dirichlet(np.ones(kL))
    br = rng.dirichlet(np.ones(kR))
    return StepBigraphon(bl / bl.sum(), br / br.sum(), rng.uniform(0, 1, (kL, kR)))


def random_graph(rng, n: int, p: float | None = None) -> np.ndarray:
    p = rng.random() if p is None else p
    A = np.triu(rng.random((n, n)) < p, 1)
    return A | A.T


def exhaustive_biclique_moments(d: float, n: int, ell: int) -> tuple:
    """E[X] and E[X^2] for X = #K_{ell,ell} in B(n, d) by summing over all n x n bipartite graphs."""
    m = n * n
    graphs = ((np.arange(1 << m)[:, None] >> np.arange(m)) & 1).astype(bool)
    e = graphs.sum(axis=1)
    prob = d ** e * (1 - d) ** (m - e)
    X = np.zeros(graphs.shape[0])
    for L in itertools.combinations(range(n), ell):
        for R in itertools.combinations(range(n), ell):
            cells = [i * n + j for i in L for j in R]
            X += graphs[:, cells].all(axis=1)
    return float(prob @ X), float(prob @ (X * X))


def _check(name, fn):
    try:
        ok, detail = fn()
        return Check(name, bool(ok), detail)
    except Exception as exc:  # a crash is a failed property, not a crashed suite
        return Check(name, False, f"{type(exc).__name__}: {exc}")


def run_verify(seed: int = 0, sizes=(16, 64), model=None) -> list:
    """Run the property suite; returns one :class:`Check` per property."""
    rng = np.random.default_rng(seed)
    graphons = [random_step_graphon(rng, int(rng.integers(1, 4))) for _ in range(8)]
    if isinstance(model, StepGraphon):
        graphons.insert(0, model)
    checks = []

    def graphon_identities():
        for W in graphons:
            if complement(complement(W)) != W:
                return False, "complement is not an involution"
            if restrict(W, W.beta) != W:
                return False, "full restriction changed W"
            L = log_rate_matrix(W).values
            pos = W.P > 0
            if not np.allclose(np.exp(-L[pos]), W.P[pos], rtol=1e-14, atol=0):
                return False, "log-rate round trip"
        return True, f"{len(graphons)} graphons"

    def kappa_routes():
        worst = 0.0
        for W in graphons:
            a, b = op.kappa(W).value, op.kappa_via_sets(W)
            if math.isfinite(a):
                worst = max(worst, abs(a - b))
        return worst <= 1e-9, f"max |kappa - kappa_via_sets| = {worst:.2e}"

    def kappa_grid():
        worst = 0.0
        for W in graphons:
            worst = max(worst, abs(op.kappa(W).value - op.kappa_grid_oracle(W, 200)))
        return worst <= 5e-2, f"max grid gap at resolution 200 = {worst:.2e}"

    def p_r_bound():
        worst = math.inf
        for W in graphons:
            bound = -2.0 / op.kappa(W).value
            for r in range(2, 7):
                worst = min(worst, op.log_p_r(W, r) - bound)
        return worst >= -1e-12, f"min log p_r + 2/kappa = {worst:.2e}"

    def zoom_sandwich():
        for W in graphons:
            kap = op.kappa(W).value
            val = 1.0 / op.xi(restrict(W, op.zoom(W, 0.05)))
            if not kap - 0.05 <= val <= kap + 1e-9:
                return False, f"1/xi = {val}, kappa = {kap}"
        return True, ""

    def xi_grid():
        worst = 0.0
        for W in graphons:
            worst = max(worst, abs(op.xi(W) - op.xi_grid_oracle(W, 100)))
        return worst <= 1e-6, f"max |xi - grid| = {worst:.2e}"

    def box_scan():
        worst = min(op.box_admissibility_scan(op.optimal_mass_vector(W), W, 2000, seed) for W in graphons)
        return worst >= -1e-6, f"min Gamma = {worst:.2e}"

    def rebalance_grows():
        done = 0
        e3, e14 = math.exp(-3.0), math.exp(-0.25)
        pool = [make_step_graphon([0.5, 0.5], [[e3, e14], [e14, e14]])]
        pool += [random_step_graphon(rng, int(rng.integers(2, 4))) for _ in range(8)]
        for W in pool:
            for _ in range(200):
                a = rng.dirichlet(np.ones(W.k))
                c0 = 2.0 * a.sum() / op.quad_form(a, W.L)
                g = a * c0 * rng.uniform(0.5, 1.0)
                # keep (part of) the block with the largest self log-rate
                g1 = np.zeros(W.k)
                heavy = int(np.argmax(np.diag(W.L)))
                g1[heavy] = g[heavy] * rng.uniform(0.5, 1.0)
                g2 = g - g1
                if op.gamma(g1, W) >= 0 or g2.sum() == 0:
                    continue
                res = op.rebalance(g1, g2, W)
                if not (op.gamma(res.g_star, W) >= 0 and res.g_star.sum() > g.sum()):
                    return False, "rebalanced vector is not admissible or not larger"
                done += 1
        return done > 0, f"{done} cases"

    def product_bound():
        for _ in range(10):
            n = int(rng.integers(2, 7))
            H = sample_weighted(random_step_graphon(rng, 2), n, int(rng.integers(2**32)))
            x = op.xi_graph(H)
            for r in range(1, n + 1):
                for C in itertools.combinations(range(n), r):
                    if clique_weight_product(H, C) < math.exp(-x * n * len(C)) * (1 - 1e-9):
                        return False, f"subset {C}"
        return True, ""

    def sidorenko():
        worst = math.inf
        for _ in range(10):
            U = random_step_bigraphon(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            for a in range(1, 4):
                for b in range(1, 4):
                    worst = min(worst, dn.sidorenko_gap(U, a, b))
        return worst >= -1e-12, f"min gap = {worst:.2e}"

    def moments():
        for d in (0.25, 0.5):
            U = StepBigraphon([1.0], [1.0], [[d]])
            ex, ex2 = exhaustive_biclique_moments(d, 3, 1)
            rep = dn.second_moment_report(U, 3, 1)
            if not (math.isclose(rep.ex, ex, rel_tol=1e-9) and math.isclose(rep.ex2, ex2, rel_tol=1e-9)):
                return False, f"d={d}"
        return True, ""

    def solvers():
        for _ in range(30):
            A = random_graph(rng, int(rng.integers(0, 11)))
            w = max_clique(A).size
            if w != max_clique_bruteforce(A):
                return False, "max_clique"
            if A.shape[0] and (count_cliques(A, w) < 1 or count_cliques(A, w + 1) != 0):
                return False, "count_cliques"
            M = rng.random((int(rng.integers(0, 8)), int(rng.integers(0, 8)))) < rng.random()
            if max_biclique(M).size != max_biclique_bruteforce(M):
                return False, "max_biclique"
        return True, ""

    def sampler():
        for n in sizes:
            W = graphons[-1]
            s = int(rng.integers(2**63))
            G1, G2 = sample_graph(W, n, s), sample_graph(W, n, s)
            if not np.array_equal(G1.adjacency, G2.adjacency):
                return False, "not deterministic"
            if not np.array_equal(G1.adjacency, bernoulli_realize(sample_weighted(W, n, s), s).adjacency):
                return False, "two-stage coupling"
            lo = sample_graph(clip_max(W, 2), n, s)
            if np.any(lo.adjacency & ~G1.adjacency):
                return False, "clip coupling not monotone"
            if max_clique(lo).size > max_clique(G1).size:
                return False, "clique number not monotone"
        return True, f"n in {tuple(sizes)}"

    def bipartite():
        U = random_step_bigraphon(rng, 2, 2)
        B = sample_bipartite(U, max(sizes), seed)
        return B.biadjacency.shape == (max(sizes), max(sizes)), ""

    def bounded_limit():
        for _ in range(20):
            k = int(rng.integers(1, 5))
            P = np.triu(rng.random((k, k)) < 0.5, 1).astype(float)
            P = P + P.T
            W = make_step_graphon(np.full(k, 1.0 / k), P)
            L = dn.bounded_clique_limit(W)
            direct = max(j for j in range(1, 9) if dn.hom_density(dn.complete_graph(j), W) > 0)
            if L != direct:
                return False, f"limit {L} vs direct {direct}"
        return True, ""

    def clique_density_routes():
        worst = 0.0
        for W in graphons:
            for k in range(2, 6):
                a = dn.hom_density(dn.complete_graph(k), W)
                b = math.exp(dn.log_clique_density(W, k))
                worst = max(worst, abs(a - b) / max(a, 1e-300))
        return worst <= 1e-9, f"max relative gap {worst:.2e}"

    for name, fn in [
        ("graphon identities", graphon_identities),
        ("kappa equals set formula", kappa_routes),
        ("kappa grid oracle", kappa_grid),
        ("P_r lower bound", p_r_bound),
        ("zoom sandwich", zoom_sandwich),
        ("xi box-grid oracle", xi_grid),
        ("box admissibility of optimal mass", box_scan),
        ("rebalance grows admissible mass", rebalance_grows),
        ("weight product bound", product_bound),
        ("Sidorenko sign", sidorenko),
        ("biclique moments vs enumeration", moments),
        ("solvers vs brute force", solvers),
        ("sampler determinism and coupling", sampler),
        ("bipartite sampler shape", bipartite),
        ("bounded clique limit", bounded_limit),
        ("clique density routes agree", clique_density_routes),
    ]:
        checks.append(_check(name, fn))
    return checks
