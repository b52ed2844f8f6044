"""Dimension-reduction solver: cutting planes without a Lipschitz constant.

The localization polytope is shrunk with stochastic subgradient cuts until
its volume certificate drops below (d'!)^-1 / 2; at that point all integral
points of the polytope lie on a single hyperplane, which is found by
testing the integer width along LLL-short directions. The problem is then
re-parametrized on that hyperplane (a unimodular change of coordinates, so
the integer grid maps onto an integer grid) and the dimension drops by one.
The final one-dimensional line is finished by enhanced adaptive sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cutplane import (
    CutEngineState,
    EngineKind,
    EngineNumericError,
    InfeasibleRegionError,
    Polytope,
    analytic_center,
    barrier_hessian,
    ellipsoid_volume_bound,
    engine_step,
    finalist_pgs,
    support_lp,
)
from .lovasz import lovasz_value, round_to_integer, so_sample_count, stochastic_subgradient
from .onedim import enhanced_adaptive_sampling
from .oracle import (
    DEFAULT_SAMPLE_CAP,
    BudgetExceededError,
    Guarantee,
    SolverFailedError,
    StochasticOracle,
    hoeffding_halfwidth,
)

__all__ = [
    "lll_reduce",
    "AffineSubgrid",
    "find_integral_hyperplane",
    "project_polytope",
    "dimension_reduction_solve",
    "unimodular_completion",
    "HYPERPLANE",
    "EMPTY",
    "TOO_BIG",
]

LP_TOL = 1e-9

HYPERPLANE = "HYPERPLANE"
EMPTY = "EMPTY"
TOO_BIG = "TOO_BIG"


# ---------------------------------------------------------------------------
# Lattice basis reduction
# ---------------------------------------------------------------------------


def _gso(B, dot, exact: bool):
    """Gram-Schmidt data for the current basis: star vectors, norms, mu."""
    star, norms, mu = [], [], []
    for i, b in enumerate(B):
        v = [Fraction(x) for x in b] if exact else [float(x) for x in b]
        row = []
        for j in range(i):
            m = dot(b, star[j]) / norms[j]
            row.append(m)
            v = [vi - m * sj for vi, sj in zip(v, star[j])]
        nv = dot(v, v)
        if nv == 0:
            raise ValueError("input vectors are linearly dependent")
        star.append(v)
        norms.append(nv)
        mu.append(row)
    return star, norms, mu


def lll_reduce(basis, delta: float = 0.75, gram=None):
    """LLL reduction of a lattice basis (rows of ``basis``).

    With integer entries and no quadratic form the computation is exact
    (rational arithmetic), so the size condition |mu_ij| <= 1/2 and the
    Lovasz condition hold exactly on the output. ``gram`` optionally
    supplies a positive-definite form Q defining the inner product
    u^T Q v; that path runs in floats.
    """
    if not 0.25 < delta < 1.0:
        raise ValueError("delta must lie in (1/4, 1)")
    B = [list(row) for row in np.asarray(basis).tolist()]
    n = len(B)
    if n == 0:
        raise ValueError("empty basis")
    exact = gram is None and all(float(x).is_integer() for row in B for x in row)
    if exact:
        B = [[int(x) for x in row] for row in B]
        delta_f = Fraction(delta).limit_denominator(10**6)

        def dot(u, v):
            return sum(Fraction(a) * Fraction(b) for a, b in zip(u, v))

        def nearest(m):
            return math.floor(m + Fraction(1, 2))

        cond = lambda k, norms, mu: norms[k] >= (delta_f - mu[k][k - 1] ** 2) * norms[k - 1]
    else:
        Q = np.eye(len(B[0])) if gram is None else np.asarray(gram, dtype=float)

        def dot(u, v):
            return float(np.asarray(u, dtype=float) @ Q @ np.asarray(v, dtype=float))

        def nearest(m):
            return round(m)

        cond = lambda k, norms, mu: norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]

    star, norms, mu = _gso(B, dot, exact)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = nearest(mu[k][j])
            if q != 0:
                B[k] = [a - q * b for a, b in zip(B[k], B[j])]
                # earlier coefficients mu[k][j'] (j' < j) shift too
                star, norms, mu = _gso(B, dot, exact)
        if cond(k, norms, mu):
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            star, norms, mu = _gso(B, dot, exact)
            k = max(k - 1, 1)
    if exact:
        return np.array(B, dtype=np.int64)
    return np.array(B, dtype=float)


# ---------------------------------------------------------------------------
# Integral hyperplanes and unimodular reparametrization
# ---------------------------------------------------------------------------


@dataclass
class AffineSubgrid:
    """Integral affine map t -> offset + M t from Z^{d'} into Z^d."""

    M: np.ndarray  # d x d' integer matrix
    offset: np.ndarray  # length-d integer vector

    @classmethod
    def identity(cls, d: int) -> "AffineSubgrid":
        return cls(M=np.eye(d, dtype=np.int64), offset=np.zeros(d, dtype=np.int64))

    @property
    def dim(self) -> int:
        return self.M.shape[1]

    def point(self, t) -> np.ndarray:
        return self.offset + self.M @ np.asarray(t)

    def compose(self, x0, W) -> "AffineSubgrid":
        """Append the inner map t -> x0 + W t."""
        return AffineSubgrid(M=self.M @ W, offset=self.offset + self.M @ x0)


def unimodular_completion(v) -> np.ndarray:
    """Unimodular U with v . U[:, 0] = 1 and v . U[:, j] = 0 for j >= 1.

    Requires v primitive (gcd 1). Exact integer arithmetic throughout.
    """
    v = [int(x) for x in v]
    d = len(v)
    if all(x == 0 for x in v):
        raise ValueError("v must be nonzero")
    if math.gcd(*[abs(x) for x in v]) != 1:
        raise ValueError("v must be primitive (gcd 1)")
    U = [[1 if i == j else 0 for j in range(d)] for i in range(d)]  # columns U[i][j] = (col j)_i
    w = list(v)
    for j in range(1, d):
        a, b = w[0], w[j]
        if b == 0:
            continue
        g = math.gcd(a, b)
        if a == 0:
            s, t = 0, 1 if b > 0 else -1
        else:
            # extended gcd: s*a + t*b = g
            s, t = _xgcd(a, b)
        for i in range(d):
            c0 = s * U[i][0] + t * U[i][j]
            cj = -(b // g) * U[i][0] + (a // g) * U[i][j]
            U[i][0], U[i][j] = c0, cj
        w[0], w[j] = g, 0
    if w[0] == -1:
        for i in range(d):
            U[i][0] = -U[i][0]
        w[0] = 1
    if w[0] != 1:
        raise ValueError("v must be primitive (gcd 1)")
    return np.array(U, dtype=np.int64)


def _xgcd(a: int, b: int) -> tuple[int, int]:
    """(s, t) with s*a + t*b = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_s, old_t = -old_s, -old_t
    return old_s, old_t


def _primitive(v) -> np.ndarray:
    v = np.asarray(np.rint(v), dtype=np.int64)
    g = math.gcd(*[int(abs(x)) for x in v]) if len(v) > 1 else int(abs(v[0]))
    if g == 0:
        raise ValueError("zero direction")
    return v // g


def find_integral_hyperplane(poly: Polytope, embed: AffineSubgrid | None = None):
    """Locate a hyperplane containing every integral point of the polytope.

    Tests the integer width of the polytope along each vector of an
    LLL-reduced basis shaped by the inverse barrier Hessian at the analytic
    center. Returns (HYPERPLANE, v, k), (EMPTY, None, None) when some
    direction admits no integer level, or (TOO_BIG, None, None) when every
    candidate has width > 1.
    """
    d = poly.dim
    try:
        z = analytic_center(poly)
        H = barrier_hessian(poly, z)
        Q = np.linalg.inv(H)
        basis = lll_reduce(np.eye(d, dtype=np.int64), gram=Q)
        cand = [np.asarray(np.rint(row), dtype=np.int64) for row in basis]
    except (EngineNumericError, InfeasibleRegionError, np.linalg.LinAlgError):
        cand = [np.eye(d, dtype=np.int64)[i] for i in range(d)]
    try:
        for v in cand:
            v = _primitive(v)
            hi, _ = support_lp(poly, v)
            neg, _ = support_lp(poly, -v)
            lo = -neg
            k_lo = math.ceil(lo - LP_TOL)
            k_hi = math.floor(hi + LP_TOL)
            if k_lo > k_hi:
                return (EMPTY, None, None)
            if k_lo == k_hi:
                return (HYPERPLANE, v, k_lo)
    except InfeasibleRegionError:
        return (EMPTY, None, None)
    return (TOO_BIG, None, None)


def project_polytope(poly: Polytope, v, k: int, embed: AffineSubgrid) -> tuple[Polytope, AffineSubgrid]:
    """Restrict the polytope to the hyperplane v . x = k, one dimension down.

    The hyperplane's integer points are parametrized by t -> x0 + W t with
    x0 = k * c and W from a unimodular completion of v, so the integral
    points correspond bijectively to Z^{d'-1}.
    """
    v = _primitive(v)
    U = unimodular_completion(v)
    x0 = k * U[:, 0]
    W = U[:, 1:]
    new = Polytope(poly.dim - 1)
    for r in poly.rows:
        a_new = W.T @ r.a
        b_new = float(r.b - r.a @ x0)
        if np.linalg.norm(a_new) < 1e-12:
            if b_new > 1e-9:
                raise InfeasibleRegionError("hyperplane misses the polytope")
            continue
        new.rows.append(type(r)(a=np.asarray(a_new, dtype=float), b=b_new, origin=r.origin))
    return new, embed.compose(x0, W)


# ---------------------------------------------------------------------------
# The solver
# ---------------------------------------------------------------------------


class _BudgetSignal(Exception):
    pass


def dimension_reduction_solve(
    oracle: StochasticOracle,
    d: int,
    N: int,
    guarantee: Guarantee,
    rng: np.random.Generator,
    engine_kind: EngineKind = EngineKind.VAIDYA,
    so_relax_factor: float = 1.0,
    early_stop: bool = False,
    cap: int = DEFAULT_SAMPLE_CAP,
    info: dict | None = None,
) -> np.ndarray:
    """PGS solver requiring no Lipschitz constant.

    Per dimension: cut with stochastic subgradient separation until the
    volume certificate allows hyperplane detection, then reparametrize on
    the detected hyperplane. The 1-d remainder goes to enhanced adaptive
    sampling; query points plus the line winner enter a finalist stage.
    ``early_stop`` ends the whole descent as soon as a localization set
    empties out.
    """
    if guarantee.is_iz:
        raise ValueError("dimension_reduction_solve expects PGS mode")
    if (d, N) != (oracle.dim, max(oracle.domain_dims)):
        raise ValueError("d, N must match the oracle domain")
    eps, delta = guarantee.epsilon, guarantee.delta
    if d == 1:
        return np.array([enhanced_adaptive_sampling(oracle, N, guarantee, rng, cap=cap)])

    sigma = math.sqrt(oracle.sigma2)
    budget = math.ceil(10.0 * d * (d + math.log(N)))
    so_calls = 0
    S: list[np.ndarray] = []  # full-space query points for the finalist stage
    S_values: list[float] = []
    h_so_max = 0.0
    line_winner: np.ndarray | None = None
    empty_found = False

    def so_at(embed: AffineSubgrid, t):
        nonlocal so_calls, h_so_max
        if so_calls >= budget:
            raise _BudgetSignal
        so_calls += 1
        alpha = delta / (4.0 * budget)
        n = so_sample_count(d, N, sigma, so_relax_factor * eps / 4.0, alpha)
        if n > cap:
            raise SolverFailedError(f"separation oracle needs {n} samples per chain point")
        x = embed.point(np.asarray(t, dtype=float))
        x = np.clip(x, 1.0, np.asarray(oracle.domain_dims, dtype=float))
        est = stochastic_subgradient(oracle, x, n, rng)
        S.append(x.copy())
        S_values.append(float(lovasz_value(est.chain_means, est.chain)))
        h_so_max = max(h_so_max, hoeffding_halfwidth(n, sigma, alpha))
        return embed.M.T @ est.g

    poly = Polytope.box(np.ones(d), np.full(d, float(N)))
    embed = AffineSubgrid.identity(d)
    d_cur = d
    iterations = 0
    while d_cur >= 2 and not empty_found:
        phase_rows = [type(r)(a=r.a.copy(), b=r.b, origin=r.origin, query=r.query) for r in poly.rows]
        while True:  # retried with a doubled budget on exhaustion
            try:
                poly, result = _cut_phase(poly, embed, so_at, d_cur, engine_kind, rng)
                break
            except _BudgetSignal:
                budget *= 2
                so_calls = 0
                restored = Polytope(poly.dim)
                restored.rows = [
                    type(r)(a=r.a.copy(), b=r.b, origin=r.origin, query=r.query) for r in phase_rows
                ]
                poly = restored
        iterations += 1
        if result[0] == EMPTY:
            empty_found = True
            break
        if result[0] == "ZERO_GRAD":
            break
        _, v, k = result
        try:
            poly, embed = project_polytope(poly, v, k, embed)
        except InfeasibleRegionError:
            empty_found = True
            break
        d_cur -= 1

    fine = Guarantee(epsilon=eps / 4.0, delta=delta / 4.0)
    if d_cur == 1 and not empty_found:
        line_winner = _solve_line(oracle, poly, embed, fine, rng, cap)
    if info is not None:
        info["so_calls"] = so_calls
        info["dimensions_reduced"] = d - d_cur
    candidates = list(S)
    prior_vals = list(S_values)
    if line_winner is not None:
        candidates.append(np.asarray(line_winner, dtype=float))
        # no prior estimate for the line winner: never prune it
        prior_vals.append(-math.inf)
    if not candidates:
        candidates = [np.full(d, (N + 1) / 2.0)]
        prior_vals = [0.0]
    x_hat = finalist_pgs(oracle, candidates, fine, rng, cap, prior=(prior_vals, h_so_max))
    return round_to_integer(oracle, x_hat, guarantee, rng)


def _cut_phase(poly, embed, so_at, d_cur, engine_kind, rng):
    """Cut until hyperplane detection succeeds; returns the updated polytope.

    The returned result is (HYPERPLANE, v, k), (EMPTY, None, None), or
    ("ZERO_GRAD", None, None) when a vanishing subgradient certifies the
    current center.
    """
    threshold = 0.5 / math.factorial(d_cur)
    try:
        center = analytic_center(poly)
    except (EngineNumericError, InfeasibleRegionError):
        return poly, (EMPTY, None, None)
    state = CutEngineState(poly, center, engine_kind, rng)
    zero_grad = False

    def cut_request(z):
        nonlocal zero_grad
        g = so_at(embed, z)
        if np.max(np.abs(g)) <= 1e-12:
            zero_grad = True
            return None
        return g

    while True:
        try:
            vol = ellipsoid_volume_bound(state.polytope)
        except (EngineNumericError, InfeasibleRegionError):
            return state.polytope, (EMPTY, None, None)
        if vol < threshold:
            result = find_integral_hyperplane(state.polytope)
            if result[0] != TOO_BIG:
                return state.polytope, result
        try:
            state, action = engine_step(state, cut_request)
        except EngineNumericError:
            # numeric collapse: the region is tiny, go straight to detection
            result = find_integral_hyperplane(state.polytope)
            if result[0] == TOO_BIG:
                result = (EMPTY, None, None)
            return state.polytope, result
        if zero_grad:
            return state.polytope, ("ZERO_GRAD", None, None)


def _solve_line(oracle, poly, embed, guarantee, rng, cap):
    """Finish the 1-d restricted problem with enhanced adaptive sampling."""
    one = np.ones(1)
    try:
        hi, _ = support_lp(poly, one)
        neg, _ = support_lp(poly, -one)
    except InfeasibleRegionError:
        return None
    t_lo = math.ceil(-neg - LP_TOL)
    t_hi = math.floor(hi + LP_TOL)
    dims = np.asarray(oracle.domain_dims)
    ts = [
        t
        for t in range(t_lo, t_hi + 1)
        if np.all(embed.point([t]) >= 1) and np.all(embed.point([t]) <= dims)
    ]
    if not ts:
        return None
    n_line = len(ts)
    if n_line == 1:
        return embed.point([ts[0]])

    def line_embed(label):
        return embed.point([ts[label - 1]])

    win = enhanced_adaptive_sampling(oracle, n_line, guarantee, rng, cap=cap, embed=line_embed)
    return embed.point([ts[win - 1]])
