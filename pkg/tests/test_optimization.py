import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from cliquelab import (Admissible, Improved, constant_graphon, gamma, is_admissible, kappa,
                       kappa_grid_oracle, kappa_via_sets, log_p_r, make_step_graphon,
                       optimal_mass_vector, box_admissibility_scan, p_r, rebalance, restrict,
                       xi, xi_graph, xi_graph_search, xi_grid_oracle, zoom)
from cliquelab.errors import BudgetExceeded
from cliquelab.graphon import StepGraphon
from cliquelab.optimization import RebalanceError, ZoomError, quad_form, xi_subset
from cliquelab.sampler import WeightedCompleteGraph

from conftest import E14
from test_graphon import step_graphons


def brute_min_q(W, steps=60):
    """Min of a^T L a over a simplex grid, written without the library."""
    k = W.k
    best = math.inf
    for c in itertools.product(range(steps + 1), repeat=k - 1):
        if sum(c) > steps:
            continue
        a = np.array(list(c) + [steps - sum(c)]) / steps
        with np.errstate(invalid="ignore"):
            q = sum(a[i] * a[j] * W.L[i, j] for i in range(k) for j in range(k) if a[i] * a[j] > 0)
        best = min(best, q)
    return best


# ---------------------------------------------------------------- gamma


def test_gamma_examples(w62):
    assert gamma([1, 1], w62) == pytest.approx(0.125, abs=1e-15)
    assert gamma([1, 0], w62) == pytest.approx(-0.5, abs=1e-15)
    assert gamma([0, 0], w62) == 0.0
    with pytest.raises(ValueError):
        gamma([1, 1, 1], w62)
    with pytest.raises(ValueError):
        gamma([-1, 1], w62)


def test_gamma_infinite_rates():
    W = make_step_graphon([0.5, 0.5], [[0.5, 0.0], [0.0, 0.5]])
    assert gamma([1, 1], W) == -math.inf
    assert gamma([1, 0], W) == pytest.approx(1 - 0.5 * math.log(2))


def test_is_admissible_examples(w62):
    assert is_admissible([1, 1], w62, 0)
    assert not is_admissible([1, 0], w62, 0)
    assert is_admissible([0, 0], w62, 0)
    assert is_admissible([1, 0], w62, 0.6)


@given(step_graphons(), st.lists(st.floats(0, 3), min_size=4, max_size=4), st.floats(0, 5))
def test_gamma_scale_covariance(W, a, c):
    a = np.array(a[:W.k])
    q = quad_form(a, W.L)
    assert gamma(c * a, W) == pytest.approx(c * a.sum() - c * c * q / 2, rel=1e-9, abs=1e-9)
    if q > 0 and a.sum() > 0:
        c0 = 2 * a.sum() / q
        assert gamma(c0 * a, W) == pytest.approx(0, abs=1e-9 * max(1, c0 * a.sum()))


# ---------------------------------------------------------------- kappa


def test_kappa_examples(w62):
    assert kappa(constant_graphon(math.exp(-1))).value == pytest.approx(2, abs=1e-12)
    r = kappa(w62)
    assert r.value == pytest.approx(8, abs=1e-12)
    assert np.allclose(r.minimizer, [0, 1])
    assert r.min_quadratic == pytest.approx(0.25)
    assert kappa(constant_graphon(1.0)).value == math.inf
    assert not r.approximate


def test_kappa_degenerate_supports():
    # a unit block gives infinite kappa; zero self-densities put +inf on every support
    W = make_step_graphon([0.5, 0.5], [[1.0, 0.2], [0.2, 0.3]])
    assert kappa(W).value == math.inf
    assert kappa(make_step_graphon([0.5, 0.5], [[0.0, 0.5], [0.5, 0.0]])).value == 0.0
    W = make_step_graphon([0.5, 0.5], [[0.0, 0.5], [0.5, 0.4]])
    assert kappa(W).value == pytest.approx(2 / math.log(1 / 0.4))
    assert kappa(constant_graphon(0.0)).value == 0.0


@given(step_graphons(max_k=3))
def test_kappa_result_invariants(W):
    r = kappa(W)
    assert r.value == pytest.approx(2 / quad_form(r.minimizer, W.L), rel=1e-9)
    assert r.minimizer.sum() == pytest.approx(1, abs=1e-12) and np.all(r.minimizer >= 0)
    assert gamma(r.optimal_mass, W) == pytest.approx(0, abs=1e-9 * r.value)
    assert r.optimal_mass.sum() == pytest.approx(r.value, rel=1e-9)


@given(step_graphons(max_k=3))
def test_kappa_matches_independent_grid(W):
    q = brute_min_q(W)
    # a grid point is feasible, so it can only overshoot the true minimum
    assert 2 / kappa(W).value <= q + 1e-12
    assert kappa(W).value == pytest.approx(kappa_grid_oracle(W, 300), rel=0.05)


@given(step_graphons(max_k=4, zeros=True))
def test_kappa_equals_set_formula(W):
    a, b = kappa(W).value, kappa_via_sets(W)
    if math.isinf(a):
        assert math.isinf(b)
    else:
        assert a == pytest.approx(b, abs=1e-9, rel=1e-12)


@given(step_graphons(max_k=3), st.data())
def test_kappa_monotone(W, data):
    bump = np.array(data.draw(st.lists(st.floats(0, 0.5), min_size=W.k * W.k, max_size=W.k * W.k)))
    B = np.triu(bump.reshape(W.k, W.k))
    P2 = np.minimum(W.P + B + np.triu(B, 1).T, 0.999)
    W2 = StepGraphon(W.beta, P2)
    assert kappa(W).value <= kappa(W2).value * (1 + 1e-12)
    assert xi(W) >= xi(W2) * (1 - 1e-12)


def test_frank_wolfe_fallback():
    rng = np.random.default_rng(3)
    k = 14
    P = rng.uniform(0.1, 0.9, (k, k))
    P = np.triu(P) + np.triu(P, 1).T
    W = make_step_graphon(np.full(k, 1 / k), P)
    r = kappa(W)
    assert r.approximate
    # compare with exact enumeration on the support found
    S = r.minimizer > 1e-9
    exact = kappa(restrict(W, np.where(S, W.beta, 0.0))).value
    assert r.value == pytest.approx(exact, rel=1e-6)


def test_kappa_grid_oracle_examples(w62):
    assert kappa_grid_oracle(constant_graphon(math.exp(-1)), 7) == pytest.approx(2, abs=1e-12)
    assert kappa_grid_oracle(w62, 1000) == pytest.approx(8, abs=0.01)
    with pytest.raises(ValueError):
        kappa_grid_oracle(make_step_graphon(np.full(5, 0.2), np.full((5, 5), 0.5)), 10)


def test_kappa_via_sets_examples(w62):
    assert kappa_via_sets(constant_graphon(0.3)) == pytest.approx(2 / math.log(1 / 0.3))
    assert kappa_via_sets(w62) == pytest.approx(8)
    assert kappa_via_sets(constant_graphon(1.0)) == math.inf


# ---------------------------------------------------------------- P_r


def test_p_r_examples(w62):
    for r in range(2, 7):
        assert p_r(constant_graphon(0.3), r) == pytest.approx(0.3, rel=1e-12)
    assert p_r(w62, 2) == pytest.approx(E14, rel=1e-12)
    with pytest.raises(BudgetExceeded):
        log_p_r(make_step_graphon(np.full(10, 0.1), np.full((10, 10), 0.5)), 40, budget=1000)
    with pytest.raises(ValueError):
        p_r(w62, 1)


def test_p_r_matches_point_enumeration(w62):
    # maximize over assignments of r labelled points to blocks
    for r in range(2, 6):
        best = -math.inf
        for lab in itertools.product(range(2), repeat=r):
            s = sum(math.log(w62.P[lab[i], lab[j]]) for i, j in itertools.combinations(range(r), 2))
            best = max(best, s / math.comb(r, 2))
        assert log_p_r(w62, r) == pytest.approx(best, rel=1e-12)


@given(step_graphons(max_k=3), st.integers(2, 8))
def test_p_r_lower_bound(W, r):
    assert log_p_r(W, r) >= -2 / kappa(W).value - 1e-12


# ---------------------------------------------------------------- optimal mass and box scan


def test_optimal_mass_examples(w62):
    assert np.allclose(optimal_mass_vector(constant_graphon(math.exp(-1))), [2])
    a = optimal_mass_vector(w62)
    assert np.allclose(a, [0, 8]) and gamma(a, w62) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        optimal_mass_vector(constant_graphon(1.0))


def test_box_scan_examples(w62):
    assert box_admissibility_scan([2.0], constant_graphon(math.exp(-1)), 500, 0) == pytest.approx(0, abs=1e-12)
    assert box_admissibility_scan([0.0, 8.0], w62, 500, 0) >= -1e-12
    assert box_admissibility_scan([1.0, 1.0], w62, 500, 0) == pytest.approx(-0.5, abs=1e-12)


@given(step_graphons(max_k=3), st.integers(0, 2**32))
def test_subhistograms_of_optimum_admissible(W, seed):
    a = optimal_mass_vector(W)
    assert box_admissibility_scan(a, W, 300, seed) >= -1e-6


# ---------------------------------------------------------------- rebalance


def test_rebalance_examples(w62):
    res = rebalance([1, 0], [0, 1], w62)
    assert isinstance(res, Improved)
    assert res.g_star.sum() > 2 and gamma(res.g_star, w62) >= 0
    assert isinstance(rebalance([0, 1], [1, 0], w62), Admissible)
    with pytest.raises(RebalanceError):
        rebalance([1, 0], [0, 0], w62)
    with pytest.raises(RebalanceError):
        rebalance([5, 0], [0, 5], w62)


@given(step_graphons(max_k=3).filter(lambda W: W.k >= 2), st.data())
def test_rebalance_property(W, data):
    a = np.array(data.draw(st.lists(st.floats(0.05, 1), min_size=W.k, max_size=W.k)))
    c = data.draw(st.floats(0.3, 1.0))
    g = a * c * 2 * a.sum() / quad_form(a, W.L)
    split = np.array(data.draw(st.lists(st.floats(0, 1), min_size=W.k, max_size=W.k)))
    g1, g2 = g * split, g * (1 - split)
    assume(g2.sum() > 1e-9 and gamma(g, W) >= 0)
    res = rebalance(g1, g2, W)
    if gamma(g1, W) >= 0:
        assert isinstance(res, Admissible)
    else:
        assert isinstance(res, Improved)
        assert gamma(res.g_star, W) >= 0 and res.g_star.sum() > g.sum()
        assert np.allclose(res.g_star, (1 - res.eps1) * g1 + (1 + res.eps2) * g2)


# ---------------------------------------------------------------- xi


def test_xi_examples(w62):
    for p in (0.1, 0.5, 0.9):
        assert xi(constant_graphon(p)) == pytest.approx(0.5 * math.log(1 / p), rel=1e-15)
    assert xi(w62) == 0.75
    val, t = xi_subset(w62)
    assert np.allclose(t, [0.5, 0])
    assert 1 / xi(w62) <= kappa(w62).value
    assert xi(make_step_graphon([0.5, 0.5], [[0.5, 0.0], [0.0, 0.5]])) == math.inf


def brute_xi(W):
    best = 0.0
    for mask in itertools.product((0, 1), repeat=W.k):
        t = np.array(mask) * W.beta
        if t.sum() > 0:
            best = max(best, quad_form(t, W.L) / (2 * t.sum()))
    return best


@given(step_graphons(max_k=6))
def test_xi_vertex_formula(W):
    assert xi(W) == pytest.approx(brute_xi(W), rel=1e-12)


@given(step_graphons(max_k=3))
def test_xi_grid_oracle(W):
    assert xi(W) == pytest.approx(xi_grid_oracle(W, 60), abs=1e-6)


@given(step_graphons(max_k=4), st.data())
def test_inverse_xi_below_kappa(W, data):
    fr = np.array(data.draw(st.lists(st.floats(0, 1), min_size=W.k, max_size=W.k)))
    assume(fr.max() > 0)
    U = restrict(W, fr * W.beta)
    assert 1 / xi(U) <= kappa(W).value + 1e-9


def test_xi_graph_examples():
    H = WeightedCompleteGraph(3, np.ones((3, 3)), np.zeros(3, int), 0)
    assert xi_graph(H) == 0.0
    w = np.array([[1, math.exp(-2)], [math.exp(-2), 1]])
    assert xi_graph(WeightedCompleteGraph(2, w, np.zeros(2, int), 0)) == pytest.approx(0.5)
    w0 = np.array([[1, 0.0], [0.0, 1]])
    assert xi_graph(WeightedCompleteGraph(2, w0, np.zeros(2, int), 0)) == math.inf


def test_xi_graph_search_is_lower_bound():
    rng = np.random.default_rng(5)
    n = 14
    w = rng.uniform(0.05, 1, (n, n))
    w = np.triu(w, 1) + np.triu(w, 1).T + np.eye(n)
    H = WeightedCompleteGraph(n, w, np.zeros(n, int), 0)
    exact = xi_graph_search(H, exact_limit=20)
    approx = xi_graph_search(H, exact_limit=4, restarts=8)
    assert exact.exact and not approx.exact
    assert approx.value <= exact.value + 1e-12
    assert approx.value >= 0.9 * exact.value


# ---------------------------------------------------------------- zoom


def test_zoom_examples(w62):
    W = constant_graphon(0.4)
    t = zoom(W, 0.1)
    assert np.allclose(t.t, W.beta)
    assert 1 / xi(restrict(W, t)) == pytest.approx(kappa(W).value, rel=1e-12)
    t = zoom(w62, 0.05)
    assert np.allclose(t.t, [0, 0.5])
    assert 1 / xi(restrict(w62, t)) == pytest.approx(8, abs=1e-12)
    with pytest.raises(ValueError):
        zoom(w62, 10.0)
    with pytest.raises(ValueError):
        zoom(constant_graphon(1.0), 0.1)


@given(step_graphons(max_k=4))
def test_zoom_sandwich(W):
    k = kappa(W).value
    eps = min(0.05, k / 2)
    v = 1 / xi(restrict(W, zoom(W, eps)))
    assert k - eps <= v <= k + 1e-9


def test_zoom_error_carries_best():
    err = ZoomError("unreachable", best=None)
    assert isinstance(err, RuntimeError) and err.best is None
