"""Cutting-plane machinery and the stochastic cutting-plane solvers.

A :class:`Polytope` holds half-spaces a_i . x >= b_i: the initial box rows
plus cuts added through successive centers. Three interchangeable centering
engines drive the localization:

* VAIDYA -- approximate volumetric center (log det of the barrier Hessian)
  with leverage-score-based removal of shallow cuts;
* ANALYTIC_CENTER -- plain log-barrier center, used as the numeric fallback;
* RANDOM_WALK -- hit-and-run centroid estimate.

On top of the engines sit the noisy solvers: :func:`stochastic_vaidya`
(PGS via averaged stochastic subgradients of the convex extension) and
:func:`accelerated_vaidya_iz` (PCS-IZ via a geometric epoch schedule of
shrinking boxes).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .lovasz import (
    lovasz_value,
    neighbor_chain,
    round_to_integer,
    so_sample_count,
    stochastic_subgradient,
)
from .oracle import (
    DEFAULT_SAMPLE_CAP,
    Guarantee,
    SolverFailedError,
    StochasticOracle,
    hoeffding_halfwidth,
    samples_for_width,
)

__all__ = [
    "Polytope",
    "CutEngineState",
    "EngineKind",
    "EngineNumericError",
    "InfeasibleRegionError",
    "engine_step",
    "out_of_box_cut",
    "stochastic_vaidya",
    "finalist_pgs",
    "accelerated_vaidya_iz",
    "support_lp",
    "analytic_center",
    "barrier_hessian",
    "ellipsoid_volume_bound",
    "hit_and_run",
]

LEVERAGE_REMOVAL_THRESHOLD = 1e-3
NEWTON_GRAD_TOL = 1e-8
NEWTON_MAX_ITER = 200
ZERO_GRAD_TOL = 1e-12
VAIDYA_STEPS_CONST = 5.0


class EngineNumericError(RuntimeError):
    """Centering failed numerically (ill-conditioned barrier Hessian)."""


class InfeasibleRegionError(RuntimeError):
    """The localization polytope has no feasible point."""


class EngineKind(enum.Enum):
    VAIDYA = "VAIDYA"
    ANALYTIC_CENTER = "ANALYTIC_CENTER"
    RANDOM_WALK = "RANDOM_WALK"


@dataclass
class CutRow:
    a: np.ndarray
    b: float
    origin: str  # "BOX" or "CUT"
    query: np.ndarray | None = None  # center the cut was requested at


class Polytope:
    """Half-space intersection {x : a_i . x >= b_i}, box rows plus cuts."""

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[CutRow] = []

    @classmethod
    def box(cls, lo, hi) -> "Polytope":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise ValueError("box needs lo < hi componentwise")
        p = cls(len(lo))
        for i in range(p.dim):
            e = np.zeros(p.dim)
            e[i] = 1.0
            p.rows.append(CutRow(a=e.copy(), b=float(lo[i]), origin="BOX"))
            p.rows.append(CutRow(a=-e, b=float(-hi[i]), origin="BOX"))
        return p

    @property
    def A(self) -> np.ndarray:
        return np.array([r.a for r in self.rows])

    @property
    def b(self) -> np.ndarray:
        return np.array([r.b for r in self.rows])

    def slacks(self, x) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) - self.b

    def contains(self, x, tol: float = 0.0) -> bool:
        return bool(np.all(self.slacks(x) >= -tol))

    def add_cut(self, g, z) -> CutRow:
        """Add the half-space keeping {x : g . (x - z) <= 0}; passes through z."""
        g = np.asarray(g, dtype=float)
        z = np.asarray(z, dtype=float)
        norm = np.linalg.norm(g)
        if norm == 0.0:
            raise ValueError("cut direction must be nonzero")
        a = -g / norm
        row = CutRow(a=a, b=float(a @ z), origin="CUT", query=z.copy())
        self.rows.append(row)
        return row

    def remove(self, idx: int) -> CutRow:
        return self.rows.pop(idx)

    def cut_queries(self) -> list[np.ndarray]:
        return [r.query for r in self.rows if r.origin == "CUT" and r.query is not None]


# ---------------------------------------------------------------------------
# Barrier calculus and centering
# ---------------------------------------------------------------------------


def _barrier_parts(A, b, x):
    s = A @ x - b
    if np.any(s <= 0):
        raise EngineNumericError("point left the feasible region during centering")
    H = (A / s[:, None] ** 2).T @ A
    return s, H


def barrier_hessian(poly: Polytope, x) -> np.ndarray:
    """Hessian of the log barrier -sum ln(a_i . x - b_i) at x."""
    _, H = _barrier_parts(poly.A, poly.b, np.asarray(x, dtype=float))
    return H


def _leverages(A, s, H) -> np.ndarray:
    """Leverage score of each row: a_i^T H^{-1} a_i / s_i^2."""
    try:
        X = np.linalg.solve(H, A.T)
    except np.linalg.LinAlgError as e:
        raise EngineNumericError(str(e)) from e
    lev = np.einsum("ij,ji->i", A, X) / s**2
    if not np.all(np.isfinite(lev)):
        raise EngineNumericError("non-finite leverage scores")
    return lev


def _newton_center(A, b, x0, volumetric: bool) -> np.ndarray:
    """Damped Newton minimization of the log or volumetric barrier."""

    def value(x):
        s = A @ x - b
        if np.any(s <= 0):
            return math.inf
        if volumetric:
            sign, logdet = np.linalg.slogdet((A / s[:, None] ** 2).T @ A)
            if sign <= 0:
                return math.inf
            return 0.5 * logdet
        return float(-np.sum(np.log(s)))

    x = np.asarray(x0, dtype=float).copy()
    for _ in range(NEWTON_MAX_ITER):
        s, H = _barrier_parts(A, b, x)
        if volumetric:
            lev = _leverages(A, s, H)
            grad = -(A.T @ (lev / s))
            metric = (A * (lev / s**2)[:, None]).T @ A
        else:
            grad = -(A.T @ (1.0 / s))
            metric = H
        gnorm = float(np.linalg.norm(grad, ord=np.inf))
        if gnorm <= NEWTON_GRAD_TOL:
            return x
        try:
            step = np.linalg.solve(metric, -grad)
        except np.linalg.LinAlgError as e:
            raise EngineNumericError(str(e)) from e
        if not np.all(np.isfinite(step)):
            raise EngineNumericError("non-finite Newton step")
        v0 = value(x)
        t = 1.0
        while t > 1e-14 and value(x + t * step) >= v0 - 1e-16:
            t *= 0.5
        if t <= 1e-14:
            return x  # stationary to machine precision
        x = x + t * step
    return x


def _interior_nudge(poly: Polytope, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Move a boundary point strictly inside along the new row's normal."""
    u = a / np.linalg.norm(a)
    s = poly.slacks(z)
    au = poly.A @ u
    neg = au < -1e-14
    t_max = np.min(s[neg] / -au[neg]) if np.any(neg) else 1.0
    if t_max <= 0:
        raise EngineNumericError("cut left no interior room")
    return z + 0.5 * min(t_max, 1.0) * u


def hit_and_run(poly: Polytope, x0, steps: int, rng, collect: int = 0) -> np.ndarray:
    """Hit-and-run walk; returns the last `collect` points (or the endpoint)."""
    A, b = poly.A, poly.b
    x = np.asarray(x0, dtype=float).copy()
    out = []
    for k in range(steps):
        u = rng.normal(size=poly.dim)
        u /= np.linalg.norm(u)
        s = A @ x - b
        au = A @ u
        pos, neg = au > 1e-14, au < -1e-14
        lo = np.max(-s[pos] / au[pos]) if np.any(pos) else -1.0
        hi = np.min(-s[neg] / au[neg]) if np.any(neg) else 1.0
        if hi <= lo:
            continue
        x = x + rng.uniform(lo, hi) * u
        if collect and k >= steps - collect:
            out.append(x.copy())
    if collect:
        return np.array(out) if out else np.array([x])
    return x


def _recenter(poly: Polytope, start, kind: EngineKind, rng=None) -> np.ndarray:
    if kind is EngineKind.VAIDYA:
        return _newton_center(poly.A, poly.b, start, volumetric=True)
    if kind is EngineKind.ANALYTIC_CENTER:
        return _newton_center(poly.A, poly.b, start, volumetric=False)
    d = poly.dim
    burn = 10 * d**3
    keep = 50 * d
    pts = hit_and_run(poly, start, burn + keep, rng, collect=keep)
    return np.mean(pts, axis=0)


def analytic_center(poly: Polytope, start=None) -> np.ndarray:
    if start is None:
        start = _feasible_start(poly)
    return _newton_center(poly.A, poly.b, start, volumetric=False)


def _feasible_start(poly: Polytope) -> np.ndarray:
    """A strictly interior point, via the Chebyshev-center LP."""
    A, b = poly.A, poly.b
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(poly.dim + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-A, norms[:, None]])
    res = linprog(c, A_ub=A_ub, b_ub=-b, bounds=[(None, None)] * poly.dim + [(0, None)], method="highs")
    if not res.success or res.x[-1] <= 1e-12:
        raise InfeasibleRegionError("polytope has empty interior")
    return res.x[:-1]


def ellipsoid_volume_bound(poly: Polytope, center=None) -> float:
    """Upper bound on vol(P): the outer ellipsoid at the analytic center.

    At the analytic center the polytope sits inside the Dikin ellipsoid
    scaled by the row count m, so vol(P) <= vol(B_d) m^d / sqrt(det H).
    """
    if center is None:
        center = analytic_center(poly)
    s, H = _barrier_parts(poly.A, poly.b, np.asarray(center, dtype=float))
    m, d = len(poly.rows), poly.dim
    sign, logdet = np.linalg.slogdet(H)
    if sign <= 0:
        raise EngineNumericError("barrier Hessian not positive definite")
    ball = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
    return float(ball * math.exp(d * math.log(m) - 0.5 * logdet))


# ---------------------------------------------------------------------------
# Engine state machine
# ---------------------------------------------------------------------------


@dataclass
class CutEngineState:
    polytope: Polytope
    center: np.ndarray
    engine_kind: EngineKind = EngineKind.VAIDYA
    rng: np.random.Generator | None = None  # used by RANDOM_WALK only


def engine_step(state: CutEngineState, cut_request) -> tuple[CutEngineState, tuple]:
    """One localization step: remove a shallow cut or add a fresh one.

    ``cut_request(center)`` returns the cut direction g (half-space
    {g . (x - z) <= 0} is kept) or None for a recenter-only step. Box rows
    are never removed, so the region stays bounded.
    """
    poly, z = state.polytope, state.center
    s, H = _barrier_parts(poly.A, poly.b, z)
    lev = _leverages(poly.A, s, H)
    cut_idx = [i for i, r in enumerate(poly.rows) if r.origin == "CUT"]
    shallow = [i for i in cut_idx if lev[i] < LEVERAGE_REMOVAL_THRESHOLD]
    if shallow:
        worst = min(shallow, key=lambda i: lev[i])
        removed = poly.remove(worst)
        start = z
        action = ("REMOVED", removed)
    else:
        g = cut_request(z)
        if g is None:
            action = ("CENTER_ONLY",)
            start = z
        else:
            row = poly.add_cut(g, z)
            start = _interior_nudge(poly, z, row.a)
            action = ("ADDED", z.copy())
    center = _recenter(poly, start, state.engine_kind, state.rng)
    return CutEngineState(poly, center, state.engine_kind, state.rng), action


def out_of_box_cut(z, N) -> np.ndarray | None:
    """Separating direction for a center outside [1, N]^d, else None.

    Returns +e_i if z_i < 1, -e_i if z_i > N (lowest violated index); the
    feasible side is {x : v . x >= v . z}.
    """
    z = np.asarray(z, dtype=float)
    for i in range(len(z)):
        if z[i] < 1.0:
            e = np.zeros(len(z))
            e[i] = 1.0
            return e
        if z[i] > N:
            e = np.zeros(len(z))
            e[i] = -1.0
            return e
    return None


# ---------------------------------------------------------------------------
# Stochastic solvers
# ---------------------------------------------------------------------------


def finalist_pgs(
    oracle: StochasticOracle,
    S: list,
    guarantee: Guarantee,
    rng: np.random.Generator,
    cap: int = DEFAULT_SAMPLE_CAP,
    prior: tuple[list, float] | None = None,
) -> np.ndarray:
    """Near-best point of a small finalist set of fractional points.

    Each candidate's extension value is estimated through its neighbor
    chain, every chain point sampled to half-width epsilon/2 at level
    1 - delta/|S|; the empirical argmin wins.

    ``prior`` optionally carries (values, halfwidth) collected while the
    candidates were generated; candidates whose prior value exceeds the
    prior best by more than twice the halfwidth plus epsilon are provably
    not within epsilon of the set minimum and are dropped before the fine
    sampling stage.
    """
    if not S:
        raise ValueError("finalist set must be nonempty")
    if prior is not None:
        vals, hw = prior
        if len(vals) != len(S):
            raise ValueError("prior values must align with the candidate set")
        lim = min(vals) + 2.0 * hw + guarantee.epsilon
        S = [x for x, v in zip(S, vals) if v <= lim]
    if len(S) == 1:
        return np.asarray(S[0], dtype=float)
    eps, delta = guarantee.epsilon, guarantee.delta
    sigma = math.sqrt(oracle.sigma2)
    alpha = delta / len(S)
    n = samples_for_width(eps / 2.0, sigma, alpha)
    if n > cap:
        raise SolverFailedError(f"finalist stage needs {n} samples per point")
    best, best_val = None, math.inf
    for x in S:
        chain = neighbor_chain(x, oracle.domain_dims)
        means = np.array([oracle.sample_mean(p, n, rng) for p in chain.points])
        v = lovasz_value(means, chain)
        if v < best_val:
            best, best_val = np.asarray(x, dtype=float), v
    return best


def _vaidya_core(
    oracle: StochasticOracle,
    box_lo,
    box_hi,
    guarantee: Guarantee,
    lipschitz_L: float,
    rng: np.random.Generator,
    engine_kind: EngineKind,
    so_relax_factor: float,
    early_stop: bool,
    cap: int,
    info: dict | None,
) -> np.ndarray:
    """Cutting-plane localization over a box; returns the finalist point."""
    d = oracle.dim
    N = max(oracle.domain_dims)
    eps, delta = guarantee.epsilon, guarantee.delta
    L = lipschitz_L
    t_max = max(1, math.ceil(VAIDYA_STEPS_CONST * d * math.log(max(8.0 * d * L * N / eps, 2.0))))
    alpha_so = delta / (4.0 * t_max)
    n_so = so_sample_count(d, N, math.sqrt(oracle.sigma2), so_relax_factor * eps / 8.0, alpha_so)
    if n_so > cap:
        raise SolverFailedError(f"separation oracle needs {n_so} samples per chain point")

    poly = Polytope.box(box_lo, box_hi)
    center = (np.asarray(box_lo, dtype=float) + np.asarray(box_hi, dtype=float)) / 2.0
    state = CutEngineState(poly, center, engine_kind, rng)
    S: list[np.ndarray] = []
    values: list[float] = []
    stop_threshold = 2.0 * eps / (d * math.sqrt(N))
    fell_back = False

    def cut_request(z):
        v = out_of_box_cut(z, N)
        if v is not None:
            return -v
        est = stochastic_subgradient(oracle, z, n_so, rng)
        S.append(z.copy())
        values.append(lovasz_value(est.chain_means, est.chain))
        if np.max(np.abs(est.g)) <= ZERO_GRAD_TOL:
            return None
        return est.g

    steps = 0
    while steps < t_max:
        try:
            state, action = engine_step(state, cut_request)
        except EngineNumericError:
            if fell_back:
                break  # region numerically collapsed in both engines
            fell_back = True
            state = CutEngineState(state.polytope, state.center, EngineKind.ANALYTIC_CENTER, rng)
            try:
                state.center = analytic_center(state.polytope)
            except (EngineNumericError, InfeasibleRegionError):
                break  # region numerically collapsed: localization is done
            continue
        steps += 1
        if action[0] == "CENTER_ONLY":
            break  # zero gradient: current center is a minimizer of the extension
        if early_stop and len(values) >= 6:
            recent = float(np.mean(values[-3:]))
            earlier = float(np.mean(values[-6:-3]))
            if recent >= earlier - stop_threshold:
                break

    if info is not None:
        info["iterations"] = steps
        info["queries"] = len(S)
    fine = Guarantee(epsilon=eps / 4.0, delta=delta / 4.0)
    if not S:
        return state.center.copy()
    h_so = hoeffding_halfwidth(n_so, math.sqrt(oracle.sigma2), alpha_so)
    x_hat = finalist_pgs(oracle, S, fine, rng, cap, prior=(values, h_so))
    return x_hat


def stochastic_vaidya(
    oracle: StochasticOracle,
    d: int,
    N: int,
    guarantee: Guarantee,
    lipschitz_L: float,
    rng: np.random.Generator,
    engine_kind: EngineKind = EngineKind.VAIDYA,
    so_relax_factor: float = 1.0,
    early_stop: bool = False,
    cap: int = DEFAULT_SAMPLE_CAP,
    info: dict | None = None,
) -> np.ndarray:
    """Cutting-plane solver with (epsilon, delta)-PGS guarantee.

    Needs the ell-infinity Lipschitz constant of the objective; without one
    use the dimension-reduction solver instead.
    """
    if guarantee.is_iz:
        raise ValueError("stochastic_vaidya expects PGS mode (no iz_c)")
    if lipschitz_L is None or lipschitz_L < 0:
        raise ValueError("a nonnegative Lipschitz constant is required")
    if (d, N) != (oracle.dim, max(oracle.domain_dims)):
        raise ValueError("d, N must match the oracle domain")
    if lipschitz_L == 0.0:
        center = np.full(d, (N + 1) / 2.0)
        return round_to_integer(oracle, center, guarantee, rng)
    x_hat = _vaidya_core(
        oracle,
        np.ones(d),
        np.full(d, float(N)),
        guarantee,
        lipschitz_L,
        rng,
        engine_kind,
        so_relax_factor,
        early_stop,
        cap,
        info,
    )
    return round_to_integer(oracle, x_hat, guarantee, rng)


def accelerated_vaidya_iz(
    oracle: StochasticOracle,
    d: int,
    N: int,
    guarantee: Guarantee,
    lipschitz_L: float,
    rng: np.random.Generator,
    engine_kind: EngineKind = EngineKind.VAIDYA,
    so_relax_factor: float = 1.0,
    cap: int = DEFAULT_SAMPLE_CAP,
    info: dict | None = None,
) -> np.ndarray:
    """Epoch-accelerated cutting-plane solver with (c, delta)-PCS-IZ guarantee.

    Epoch e solves to accuracy eps_0 / 2^e on an ell-infinity box of radius
    2^{-e-2} N around the previous answer, halving both each epoch; the last
    epoch's accuracy is below c/2, which pins down the unique optimum.
    """
    if not guarantee.is_iz:
        raise ValueError("accelerated_vaidya_iz expects IZ mode (iz_c set)")
    if lipschitz_L is None or lipschitz_L <= 0:
        raise ValueError("a positive Lipschitz constant is required")
    c, delta = guarantee.iz_c, guarantee.delta
    epochs = max(1, math.ceil(math.log2(max(N, 2)))) + 1
    eps0 = c * N / 4.0
    lo = np.ones(d)
    hi = np.full(d, float(N))
    x_e = None
    total_iters = 0
    for e in range(epochs):
        eps_e = eps0 / 2.0**e
        g_e = Guarantee(epsilon=eps_e, delta=delta / (2.0 * epochs))
        sub_info: dict = {}
        x_frac = _vaidya_core(
            oracle, lo, hi, g_e, lipschitz_L, rng, engine_kind, so_relax_factor, False, cap, sub_info
        )
        x_e = round_to_integer(oracle, x_frac, g_e, rng)
        total_iters += sub_info.get("iterations", 0)
        radius = 2.0 ** (-e - 2) * N
        lo = np.maximum(np.ones(d), x_e - radius)
        hi = np.minimum(np.full(d, float(N)), x_e + radius)
        hi = np.maximum(hi, lo + 1e-6)  # keep a nonempty box even at radius < 1/2
        if np.all(hi - lo < 1.0) and eps_e <= c / 2.0:
            break
    if info is not None:
        info["epochs"] = e + 1
        info["iterations"] = total_iters
    return x_e


def support_lp(poly: Polytope, v) -> tuple[float, np.ndarray]:
    """Maximize v . x over the polytope (dense LP, exact to solver tolerance)."""
    v = np.asarray(v, dtype=float)
    res = linprog(-v, A_ub=-poly.A, b_ub=-poly.b, bounds=[(None, None)] * poly.dim, method="highs")
    if res.status == 2:
        raise InfeasibleRegionError("support LP infeasible: localization set is empty")
    if not res.success:
        raise SolverFailedError(f"support LP failed: {res.message}")
    return float(v @ res.x), res.x
