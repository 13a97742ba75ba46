"""The Gamma functional, kappa and xi of step graphons, zoom and rebalancing.

Histograms constant on blocks are handled in mass coordinates: ``a_i`` is the
mass a histogram puts on block ``i``. Then

    Gamma(a) = sum(a) - 1/2 * a^T L a,   L = log(1/P),

with ``0 * inf = 0``, and

    kappa = 2 / min{ a^T L a : a in the probability simplex },
    xi    = max{ t^T L t / (2 sum(t)) : 0 <= t <= beta, t != 0 }.

Mass vectors are plain float arrays.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded
from .graphon import GraphonError, StepGraphon, SubsetFraction, restrict

EXACT_KAPPA_MAX_K = 12
XI_MAX_K = 24
FW_GAP_TOL = 1e-10
FW_MAX_ITER = 200_000
ADMISSIBLE_TOL = 1e-9


class ZoomError(RuntimeError):
    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


class RebalanceError(ValueError):
    pass


def _as_mass(a, k: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (k,):
        raise GraphonError(f"mass vector has shape {a.shape}, expected ({k},)")
    if np.any(a < 0):
        raise GraphonError("mass vectors must be nonnegative")
    return a


def quad_form(a, L) -> float:
    """``a^T L a`` with ``0 * inf = 0``; +inf if a positive pair meets an infinite entry."""
    a = np.asarray(a, dtype=float)
    pos = a > 0
    Ls = L[np.ix_(pos, pos)]
    if np.isinf(Ls).any():
        return math.inf
    ap = a[pos]
    return float(ap @ Ls @ ap)


def quad_forms(G, L) -> np.ndarray:
    """Row-wise ``g^T L g`` for a batch of mass vectors ``G`` (shape ``(m, k)``)."""
    G = np.asarray(G, dtype=float)
    inf = np.isinf(L)
    Lf = np.where(inf, 0.0, L)
    q = np.einsum("ni,ij,nj->n", G, Lf, G)
    if inf.any():
        pos = G > 0
        for i, j in zip(*np.nonzero(inf)):
            q[pos[:, i] & pos[:, j]] = math.inf
    return q


def gamma(a, W: StepGraphon) -> float:
    """Entropy-plus-energy functional in mass coordinates."""
    a = _as_mass(a, W.k)
    q = quad_form(a, W.L)
    if math.isinf(q):
        return -math.inf
    return float(a.sum() - 0.5 * q)


def gamma_many(G, W: StepGraphon) -> np.ndarray:
    G = np.asarray(G, dtype=float)
    return G.sum(axis=1) - 0.5 * quad_forms(G, W.L)


def is_admissible(a, W: StepGraphon, tol: float = 0.0) -> bool:
    return gamma(a, W) >= -tol


# --------------------------------------------------------------------------
# kappa


@dataclass(frozen=True)
class KappaResult:
    value: float
    minimizer: np.ndarray | None
    optimal_mass: np.ndarray | None
    approximate: bool = False

    @property
    def min_quadratic(self) -> float:
        if self.value == 0:
            return math.inf
        return 2.0 / self.value


def _supports(k: int):
    for mask in range(1, 1 << k):
        yield mask, np.array([(mask >> i) & 1 == 1 for i in range(k)])


def _kkt_minimum(L: np.ndarray):
    """Exact min of a^T L a over the simplex by enumerating supports.

    On each support S the stationary point solves ``L_S a = mu * 1`` and
    ``sum(a) = 1``. Singular systems are skipped: their value is attained on
    a smaller support. Returns ``(q, a)`` or ``(inf, None)`` if every support
    touches an infinite entry. Ties keep the lowest support mask.
    """
    k = L.shape[0]
    best_q, best_a = math.inf, None
    for _, S in _supports(k):
        Ls = L[np.ix_(S, S)]
        if np.isinf(Ls).any():
            continue
        m = int(S.sum())
        M = np.zeros((m + 1, m + 1))
        M[:m, :m] = Ls
        M[:m, m] = -1.0
        M[m, :m] = 1.0
        rhs = np.zeros(m + 1)
        rhs[m] = 1.0
        try:
            sol = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            continue
        x = sol[:m]
        if not np.all(np.isfinite(x)) or np.any(x < -1e-12):
            continue
        x = np.clip(x, 0.0, None)
        x /= x.sum()
        a = np.zeros(k)
        a[S] = x
        q = quad_form(a, L)
        if best_a is None or q < best_q - 1e-15 * max(1.0, best_q):
            best_q, best_a = q, a
    return best_q, best_a


def _frank_wolfe(L: np.ndarray):
    k = L.shape[0]
    finite = L[np.isfinite(L)]
    big = (finite.max() if finite.size else 1.0) * 1e6 + 1.0
    Lf = np.where(np.isinf(L), big, L)
    a = np.zeros(k)
    a[int(np.argmin(np.diag(Lf)))] = 1.0
    for _ in range(FW_MAX_ITER):
        grad = 2.0 * Lf @ a
        s = int(np.argmin(grad))
        d = -a.copy()
        d[s] += 1.0
        gap = -grad @ d
        if gap <= FW_GAP_TOL:
            break
        curv = d @ Lf @ d
        step = 1.0 if curv <= 0 else min(1.0, gap / (2.0 * curv))
        a = a + step * d
    a = np.clip(a, 0.0, None)
    a /= a.sum()
    return quad_form(a, L), a


def kappa(W: StepGraphon) -> KappaResult:
    """kappa(W) by exact KKT enumeration (k <= 12) or Frank-Wolfe above that."""
    L = W.L
    approximate = W.k > EXACT_KAPPA_MAX_K
    q, a = _frank_wolfe(L) if approximate else _kkt_minimum(L)
    if a is None or math.isinf(q):
        # every block has zero self-density: only the empty histogram is admissible
        return KappaResult(0.0, None, None, approximate)
    if q <= 0:
        return KappaResult(math.inf, a, None, approximate)
    value = 2.0 / q
    return KappaResult(value, a, value * a, approximate)


def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 1:
        return np.array([[total]])
    bars = np.array(list(itertools.combinations(range(total + parts - 1), parts - 1)))
    if bars.size == 0:
        return np.zeros((1, parts), dtype=np.int64)
    ext = np.hstack([np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), total + parts - 1)])
    return np.diff(ext, axis=1) - 1


def kappa_grid_oracle(W: StepGraphon, resolution: int) -> float:
    """2 / min of a^T L a over the simplex grid of step ``1/resolution``."""
    k = W.k
    if k > 4:
        raise ValueError("grid oracle supports at most 4 blocks")
    best = math.inf
    # slice on the first coordinate to bound memory
    for c0 in range(resolution + 1):
        if k == 1:
            rest = np.zeros((1, 0), dtype=np.int64)
            if c0 != resolution:
                continue
        else:
            rest = _compositions(resolution - c0, k - 1)
        G = np.hstack([np.full((rest.shape[0], 1), c0), rest]) / resolution
        best = min(best, float(quad_forms(G, W.L).min()))
    if best == 0:
        return math.inf
    return 2.0 / best


def kappa_via_sets(W: StepGraphon) -> float:
    """2 / inf over subset fractions t of t^T L t / (sum t)^2.

    Independent of :func:`kappa`: on each support the stationary points of
    the scale-free ratio solve ``L_S x = 1`` (ratio ``1/sum(x)``); each
    candidate is scaled into the box ``0 <= t <= beta`` and the ratio is
    evaluated on the actual subset fraction.
    """
    L, beta = W.L, W.beta
    if np.any(np.diag(L) == 0):
        return math.inf
    best = math.inf
    for _, S in _supports(W.k):
        Ls = L[np.ix_(S, S)]
        if np.isinf(Ls).any():
            continue
        try:
            x = np.linalg.solve(Ls, np.ones(int(S.sum())))
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(x)) or np.any(x <= 0):
            continue
        c = np.min(beta[S] / x)
        t = np.zeros(W.k)
        t[S] = np.minimum(c * x, beta[S])
        ratio = quad_form(t, L) / t.sum() ** 2
        if ratio < best:
            best = ratio
    if math.isinf(best):
        return 0.0
    if best <= 0:
        return math.inf
    return 2.0 / best


def log_p_r(W: StepGraphon, r: int, budget: int = 10**6) -> float:
    """Log of the best mean pair log-density over r-point block compositions."""
    if r < 2:
        raise ValueError("r must be at least 2")
    k = W.k
    if math.comb(r + k - 1, k - 1) > budget:
        raise BudgetExceeded("composition count exceeds the enumeration budget")
    C = _compositions(r, k).astype(float)
    L = W.L
    diag = np.diag(L)
    # sum_i C(c_i,2) L_ii + sum_{i<j} c_i c_j L_ij  ==  1/2 (c^T L c - sum_i c_i L_ii)
    within = C * (C - 1) / 2
    inf_diag = np.isinf(diag)
    total = np.zeros(C.shape[0])
    total += within[:, ~inf_diag] @ diag[~inf_diag]
    if inf_diag.any():
        total[np.any(within[:, inf_diag] > 0, axis=1)] = math.inf
    off = np.triu(L, 1)
    for i, j in zip(*np.triu_indices(k, 1)):
        cij = C[:, i] * C[:, j]
        if np.isinf(off[i, j]):
            total[cij > 0] = math.inf
        else:
            total += cij * off[i, j]
    return float(-2.0 * total.min() / (r * r - r))


def p_r(W: StepGraphon, r: int, budget: int = 10**6) -> float:
    return math.exp(log_p_r(W, r, budget))


def optimal_mass_vector(W: StepGraphon) -> np.ndarray:
    res = kappa(W)
    if res.optimal_mass is None:
        raise ValueError(f"kappa is {res.value}; no finite optimal mass vector")
    return res.optimal_mass


def box_admissibility_scan(a_star, W: StepGraphon, n_samples: int, seed: int) -> float:
    """Minimum Gamma over uniform samples from the box [0, a*] and all its corners."""
    a_star = _as_mass(a_star, W.k)
    rng = np.random.default_rng(seed)
    G = rng.random((n_samples, W.k)) * a_star
    corners = np.array(list(itertools.product((0.0, 1.0), repeat=W.k))) * a_star
    return float(gamma_many(np.vstack([G, corners]), W).min())


# --------------------------------------------------------------------------
# rebalancing of an admissible histogram split into two parts


@dataclass(frozen=True)
class Admissible:
    g_prime: np.ndarray


@dataclass(frozen=True)
class Improved:
    eps1: float
    eps2: float
    g_star: np.ndarray


def _gamma_parts(A, B, C, D, E, e1, e2):
    u, v = 1.0 - e1, 1.0 + e2
    return u * A + v * B - u * u * C - v * v * D - u * v * E


def rebalance(g_prime, g_doubleprime, W: StepGraphon, tol: float = 1e-12):
    """Shift mass from g' to g'' so the result stays admissible and grows.

    ``g* = (1-e1) g' + (1+e2) g''``. With ``e2 = (A/B) e1`` the total mass is
    unchanged and, for small ``e1``, Gamma strictly increases when
    ``Gamma(g') < 0``; afterwards ``e2`` is raised while Gamma stays
    nonnegative, which strictly increases the mass.
    """
    g1 = _as_mass(g_prime, W.k)
    g2 = _as_mass(g_doubleprime, W.k)
    B = float(g2.sum())
    if B == 0:
        raise RebalanceError("g'' must be nonzero")
    g = g1 + g2
    gam_g = gamma(g, W)
    if gam_g < -tol:
        raise RebalanceError(f"g = g' + g'' is not admissible (Gamma = {gam_g})")
    if gamma(g1, W) >= 0:
        return Admissible(g1)
    L = W.L
    A = float(g1.sum())
    if math.isinf(quad_form(g, L)):
        raise RebalanceError("g touches an infinite log-rate")
    C = 0.5 * quad_form(g1, L)
    D = 0.5 * quad_form(g2, L)
    E = float(g1 @ np.where(np.isinf(L), 0.0, L) @ g2)
    ratio = A / B
    target = max(gam_g, 0.0)

    e1 = min(1.0, 1.0 / ratio) / 2.0
    for _ in range(200):
        if _gamma_parts(A, B, C, D, E, e1, ratio * e1) > target:
            break
        e1 /= 2.0
    else:
        raise RebalanceError("no improving e1 found")
    e2_0 = ratio * e1

    delta = (1.0 - e2_0) / 2.0
    norm_g = float(g.sum())
    for _ in range(200):
        e2 = e2_0 + delta
        g_star = (1.0 - e1) * g1 + (1.0 + e2) * g2
        if gamma(g_star, W) >= 0 and float(g_star.sum()) > norm_g:
            return Improved(e1, e2, g_star)
        delta /= 2.0
    raise RebalanceError("could not grow e2 while keeping Gamma nonnegative")


# --------------------------------------------------------------------------
# xi


def _subset_table(L: np.ndarray, beta: np.ndarray):
    """Quadratic forms and masses of all 2^m vertex subsets of a block range."""
    m = beta.size
    masks = np.arange(1 << m, dtype=np.int64)
    T = ((masks[:, None] >> np.arange(m)) & 1) * beta
    Q = np.einsum("ni,ij,nj->n", T, L, T) if m else np.zeros(1)
    return T, Q, T.sum(axis=1)


def _xi_vertices(L: np.ndarray, beta: np.ndarray, chunk: int = 256):
    """Max over nonempty box vertices of t^T L t / (2 sum t); ties keep the lowest mask."""
    k = beta.size
    h = k // 2
    Tlo, Qlo, Slo = _subset_table(L[:h, :h], beta[:h])
    Thi, Qhi, Shi = _subset_table(L[h:, h:], beta[h:])
    X = L[:h, h:]
    best, best_mask = -math.inf, 0
    for start in range(0, Tlo.shape[0], chunk):
        stop = min(start + chunk, Tlo.shape[0])
        cross = Tlo[start:stop] @ X @ Thi.T
        num = Qlo[start:stop, None] + Qhi[None, :] + 2.0 * cross
        den = 2.0 * (Slo[start:stop, None] + Shi[None, :])
        with np.errstate(invalid="ignore", divide="ignore"):
            val = num / den
        if start == 0:
            val[0, 0] = -math.inf
        # mask = lo | hi << h; argmax over hi-major order keeps the lowest mask
        flat = val.T.reshape(-1)
        idx = int(np.argmax(flat))
        if flat[idx] > best:
            hi_i, lo_i = divmod(idx, stop - start)
            best, best_mask = float(flat[idx]), (start + lo_i) | (hi_i << h)
        elif flat[idx] == best:
            hi_i, lo_i = divmod(idx, stop - start)
            best_mask = min(best_mask, (start + lo_i) | (hi_i << h))
    return best, best_mask


def xi_subset(W: StepGraphon):
    """``(xi, t)`` with ``t`` the maximizing box vertex."""
    if W.k > XI_MAX_K:
        raise ValueError(f"xi enumeration supports at most {XI_MAX_K} blocks")
    if np.isinf(W.L).any():
        i, j = map(int, np.argwhere(np.isinf(W.L))[0])
        t = np.zeros(W.k)
        t[[i, j]] = W.beta[[i, j]]
        return math.inf, t
    val, mask = _xi_vertices(np.asarray(W.L, float), W.beta)
    t = np.where((mask >> np.arange(W.k)) & 1, W.beta, 0.0)
    return val, t


def xi(W: StepGraphon) -> float:
    return xi_subset(W)[0]


def xi_grid_oracle(W: StepGraphon, steps: int = 200) -> float:
    """Max of the xi ratio over the box grid ``t_i in beta_i * {0, 1/steps, ..., 1}``."""
    if W.k > 3:
        raise ValueError("box-grid oracle supports at most 3 blocks")
    if np.isinf(W.L).any():
        return math.inf
    axis = np.arange(steps + 1) / steps
    best = -math.inf
    rest = np.array(list(itertools.product(axis, repeat=W.k - 1))) if W.k > 1 else np.zeros((1, 0))
    for c0 in axis:
        T = np.hstack([np.full((rest.shape[0], 1), c0), rest]) * W.beta
        s = T.sum(axis=1)
        ok = s > 0
        vals = quad_forms(T[ok], W.L) / (2.0 * s[ok])
        if vals.size:
            best = max(best, float(vals.max()))
    return best


@dataclass(frozen=True)
class XiGraphResult:
    value: float
    subset: tuple
    exact: bool


def _graph_logs(H) -> np.ndarray:
    w = np.asarray(H.w, dtype=float)
    with np.errstate(divide="ignore"):
        L = -np.log(w)
    L[w == 0] = math.inf
    L[w == 1] = 0.0
    np.fill_diagonal(L, 0.0)
    return L


def _local_search(L: np.ndarray, n: int, restarts: int, seed: int):
    rng = np.random.default_rng(seed)
    best_val, best_set = -math.inf, None

    def value(S, size):
        return S / (n * size) if size else -math.inf

    for _ in range(restarts):
        inC = np.zeros(n, dtype=bool)
        inC[int(rng.integers(n))] = True
        s = L[:, inC].sum(axis=1)  # s_v = sum_{u in C} L_vu
        total, size = 0.0, 1
        while True:
            cur = value(total, size)
            cand = []
            out = np.flatnonzero(~inC)
            ins = np.flatnonzero(inC)
            if out.size:
                gains = (total + s[out]) / (n * (size + 1))
                j = int(np.argmax(gains))
                cand.append((gains[j], "add", out[j], -1))
            if size > 1:
                gains = (total - s[ins]) / (n * (size - 1))
                j = int(np.argmax(gains))
                cand.append((gains[j], "remove", ins[j], -1))
            if out.size and ins.size:
                sw = total - s[ins][:, None] + s[out][None, :] - L[np.ix_(ins, out)]
                a, b = np.unravel_index(int(np.argmax(sw)), sw.shape)
                cand.append((sw[a, b] / (n * size), "swap", out[b], ins[a]))
            v, move, x, y = max(cand, key=lambda c: c[0])
            if not v > cur * (1 + 1e-12) + 1e-15:
                break
            if move in ("add", "swap"):
                total += s[x]
                inC[x] = True
                s += L[:, x]
                size += 1
            if move in ("remove", "swap"):
                r = x if move == "remove" else y
                inC[r] = False
                s -= L[:, r]
                total -= s[r]
                size -= 1
        v = value(total, size)
        if v > best_val:
            best_val, best_set = v, tuple(np.flatnonzero(inC).tolist())
    return best_val, best_set


def xi_graph_search(H, exact_limit: int = 20, restarts: int = 32, seed: int = 0) -> XiGraphResult:
    """xi of the graphon of a weighted complete graph, with the maximizing vertex set."""
    n = H.n
    if n == 0:
        return XiGraphResult(0.0, (), True)
    L = _graph_logs(H)
    if np.isinf(L).any():
        i, j = map(int, np.argwhere(np.isinf(L))[0])
        return XiGraphResult(math.inf, (min(i, j), max(i, j)), True)
    if n <= exact_limit:
        val, mask = _xi_vertices(L, np.full(n, 1.0 / n))
        return XiGraphResult(val, tuple(i for i in range(n) if (mask >> i) & 1), True)
    val, subset = _local_search(L, n, restarts, seed)
    return XiGraphResult(val, subset, False)


def xi_graph(H, exact_limit: int = 20) -> float:
    """Exact for ``n <= exact_limit``; a local-search lower bound above."""
    return xi_graph_search(H, exact_limit).value


# --------------------------------------------------------------------------
# zoom


def zoom(W: StepGraphon, eps: float, max_halvings: int = 40) -> SubsetFraction:
    """A subset whose restriction U has ``1/xi(U) >= kappa(W) - eps``."""
    res = kappa(W)
    if not math.isfinite(res.value) or res.minimizer is None:
        raise ValueError(f"zoom needs a finite positive kappa, got {res.value}")
    if not 0 < eps < res.value:
        raise ValueError("eps must lie in (0, kappa)")
    a = res.minimizer
    S = a > 0
    c = np.min(W.beta[S] / a[S])
    t = np.minimum(c * a, W.beta)
    t[~S] = 0.0
    best_t, best_val = t, -math.inf
    for _ in range(max_halvings + 1):
        val = 1.0 / xi(restrict(W, t))
        if val >= res.value - eps:
            return SubsetFraction(t)
        if val > best_val:
            best_t, best_val = t, val
        t = t / 2.0
    raise ZoomError(f"1/xi stayed below kappa - eps (best {best_val})", SubsetFraction(best_t))
