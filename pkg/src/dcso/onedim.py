"""One-dimensional localization solvers on {1..N}.

Three sequential-sampling solvers for noisy discrete convex minimization:

* :func:`adaptive_sampling` -- trisection with confidence-interval
  comparisons, PGS guarantee, O(log N) iterations.
* :func:`adaptive_sampling_iz` -- the indifference-zone variant whose
  flat-exit width scales with the quantile gap, PCS-IZ guarantee.
* :func:`enhanced_adaptive_sampling` -- active-set solver whose width
  targets scale with the set size, making the total cost asymptotically
  independent of N.

All of them retain every sample ever drawn at a point and compare points
exclusively through inclusive interval ordering (see ``oracle.compare_ci``).
"""

from __future__ import annotations

import math

import numpy as np

from .oracle import (
    DEFAULT_SAMPLE_CAP,
    BudgetExceededError,
    Comparison,
    Guarantee,
    SampleStats,
    StochasticOracle,
    compare_ci,
    samples_for_width,
)

__all__ = [
    "trisection_quantiles",
    "adaptive_sampling",
    "adaptive_sampling_iz",
    "enhanced_adaptive_sampling",
    "finalist_subproblem",
]

INITIAL_BATCH = 8
BATCH_GROWTH = 1.5


def trisection_quantiles(L: int, U: int) -> tuple[int, int]:
    """The two inner 3-quantile points of the integer interval [L, U]."""
    if U - L <= 2:
        raise ValueError("trisection needs U - L > 2")
    n13 = (2 * L + U) // 3
    n23 = -((-(L + 2 * U)) // 3)  # ceil division
    return n13, n23


def _next_batch(count: int, target: int) -> int:
    """Geometric batch schedule, clipped so we never overshoot target."""
    if count == 0:
        step = INITIAL_BATCH
    else:
        step = max(1, math.ceil(count * (BATCH_GROWTH - 1.0)))
    return min(step, target - count)


def finalist_subproblem(
    oracle: StochasticOracle,
    points: list[int],
    width: float,
    alpha: float,
    rng: np.random.Generator,
    stats: dict[int, SampleStats] | None = None,
    cap: int = DEFAULT_SAMPLE_CAP,
    embed=None,
) -> int:
    """Sample each finalist to half-width <= width, return empirical argmin.

    Ties go to the smallest point. ``embed`` optionally maps the 1-d label
    to the oracle's grid point (used by restricted solvers).
    """
    if not points:
        raise ValueError("finalist set must be nonempty")
    sigma = math.sqrt(oracle.sigma2)
    stats = {} if stats is None else stats
    target = samples_for_width(width, sigma, alpha)
    if target > cap:
        raise BudgetExceededError(f"finalist width {width} needs {target} samples")
    for x in sorted(points):
        st = stats.setdefault(x, SampleStats(sigma=sigma, alpha=alpha))
        deficit = target - st.count
        if deficit > 0:
            pt = embed(x) if embed is not None else [x]
            st.update(oracle.sample_mean(pt, deficit, rng), deficit)
    return min(sorted(points), key=lambda x: (stats[x].mean, x))


def _adaptive_sampling_core(
    oracle,
    N,
    delta,
    flat_width,
    final_width,
    rng,
    cap,
    info,
    embed=None,
):
    """Shared trisection loop.

    ``flat_width(n13, n23)`` gives the both-flat exit threshold for the
    current quantile pair; ``final_width`` the finalist stage target.
    """
    if N < 1:
        raise ValueError("N must be positive")
    sigma = math.sqrt(oracle.sigma2)
    t_max = math.log(max(N, 2)) / math.log(1.5) + 2.0
    alpha = delta / (2.0 * t_max)
    stats: dict[int, SampleStats] = {}
    L, U = 1, N
    iterations = 0
    while U - L > 2:
        iterations += 1
        n13, n23 = trisection_quantiles(L, U)
        th = flat_width(n13, n23)
        n_flat = samples_for_width(th, sigma, alpha)
        if n_flat > cap:
            raise BudgetExceededError(f"flat-exit width {th} needs {n_flat} samples")
        sa = stats.setdefault(n13, SampleStats(sigma=sigma, alpha=alpha))
        sb = stats.setdefault(n23, SampleStats(sigma=sigma, alpha=alpha))
        while True:
            for x, st in ((n13, sa), (n23, sb)):
                batch = _next_batch(st.count, max(n_flat, 1))
                if batch > 0:
                    pt = embed(x) if embed is not None else [x]
                    st.update(oracle.sample_mean(pt, batch, rng), batch)
            cmp = compare_ci(sa, sb)
            if cmp is Comparison.B_BELOW:  # left quantile decisively worse
                L = n13
                break
            if cmp is Comparison.A_BELOW:  # right quantile decisively worse
                U = n23
                break
            if sa.halfwidth() <= th and sb.halfwidth() <= th:
                L, U = n13, n23
                break
    if info is not None:
        info["iterations"] = iterations
    return finalist_subproblem(
        oracle, list(range(L, U + 1)), final_width, alpha, rng, stats, cap, embed
    )


def adaptive_sampling(
    oracle: StochasticOracle,
    N: int,
    guarantee: Guarantee,
    rng: np.random.Generator,
    cap: int = DEFAULT_SAMPLE_CAP,
    info: dict | None = None,
    embed=None,
) -> int:
    """Trisection solver with (epsilon, delta)-PGS guarantee."""
    if guarantee.is_iz:
        raise ValueError("adaptive_sampling expects PGS mode (no iz_c)")
    eps = guarantee.epsilon
    return _adaptive_sampling_core(
        oracle,
        N,
        guarantee.delta,
        flat_width=lambda a, b: eps / 8.0,
        final_width=eps / 2.0,
        rng=rng,
        cap=cap,
        info=info,
        embed=embed,
    )


def adaptive_sampling_iz(
    oracle: StochasticOracle,
    N: int,
    guarantee: Guarantee,
    rng: np.random.Generator,
    cap: int = DEFAULT_SAMPLE_CAP,
    info: dict | None = None,
) -> int:
    """Trisection solver with (c, delta)-PCS-IZ guarantee.

    The both-flat exit width scales with the quantile gap, which keeps the
    cost independent of N when the indifference-zone gap c is known.
    """
    if not guarantee.is_iz:
        raise ValueError("adaptive_sampling_iz expects IZ mode (iz_c set)")
    c = guarantee.iz_c
    return _adaptive_sampling_core(
        oracle,
        N,
        guarantee.delta,
        flat_width=lambda a, b: (b - a) * c / 5.0,
        final_width=c / 3.0,
        rng=rng,
        cap=cap,
        info=info,
    )


def _separating_pair(S, stats):
    """The (empirical argmin, empirical argmax) pair if decisively ordered."""
    lo = min(S, key=lambda x: (stats[x].mean, x))
    hi = max(S, key=lambda x: (stats[x].mean, -x))
    if lo == hi:
        return None
    if compare_ci(stats[lo], stats[hi]) is Comparison.A_BELOW:
        return lo, hi
    return None


def enhanced_adaptive_sampling(
    oracle: StochasticOracle,
    N: int,
    guarantee: Guarantee,
    rng: np.random.Generator,
    cap: int = DEFAULT_SAMPLE_CAP,
    info: dict | None = None,
    embed=None,
) -> int:
    """Active-set solver with cost asymptotically independent of N.

    Each iteration samples every active point to confidence half-width
    |S| * eps / 80 (a moving target: it tightens as the set shrinks), then
    applies one shrink move: removing a decisively-worse tail if the
    extreme empirical pair separates (Type-I), otherwise doubling the
    stride while keeping every other point (Type-II). A point discarded
    when |S| = k has cost O(1/k^2), so the total sum is bounded
    independently of N.
    """
    if guarantee.is_iz:
        raise ValueError("enhanced_adaptive_sampling expects PGS mode")
    if N < 1:
        raise ValueError("N must be positive")
    eps, delta = guarantee.epsilon, guarantee.delta
    sigma = math.sqrt(oracle.sigma2)
    alpha = delta / (2.0 * max(N, 2))
    S = list(range(1, N + 1))
    stride = 1
    stats = {x: SampleStats(sigma=sigma, alpha=alpha) for x in S}
    type2_count = 0
    iterations = 0
    while len(S) >= 3:
        iterations += 1
        h_target = len(S) * eps / 80.0
        n_target = samples_for_width(h_target, sigma, alpha)
        if n_target > cap:
            raise BudgetExceededError(f"width target {h_target} needs {n_target} samples")
        for x in S:
            st = stats[x]
            deficit = n_target - st.count
            if deficit > 0:
                pt = embed(x) if embed is not None else [x]
                st.update(oracle.sample_mean(pt, deficit, rng), deficit)
        pair = _separating_pair(S, stats)
        if pair is not None:
            x, y = pair
            if x < y:
                S = [z for z in S if z < y]
            else:
                S = [z for z in S if z > y]
        else:
            type2_count += 1
            stride *= 2
            x_min, x_max = S[0], S[-1]
            k = math.ceil(len(S) / 2) - 1
            S = [x_min + j * stride for j in range(k + 1) if x_min + j * stride <= x_max]
    if info is not None:
        info["iterations"] = iterations
        info["type2_operations"] = type2_count
    return finalist_subproblem(oracle, S, eps / 4.0, alpha, rng, stats, cap, embed)
