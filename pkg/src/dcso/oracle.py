"""Stochastic oracle abstraction and Hoeffding confidence machinery.

The solver modules only ever touch the model through a :class:`StochasticOracle`:
one noisy evaluation per logical call, with a known sub-Gaussian variance
proxy ``sigma2``. Sequential sampling is driven by the closed-form
confidence half-width

    h(n, sigma, alpha) = sqrt(2 sigma^2 / n * ln(2 / alpha))

and its inversion. All comparisons between points go through interval
comparison on :class:`SampleStats`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BudgetExceededError",
    "SolverFailedError",
    "StochasticOracle",
    "CountingOracle",
    "SampleStats",
    "Guarantee",
    "ConfidenceInterval",
    "Comparison",
    "hoeffding_halfwidth",
    "samples_for_width",
    "sample_to_width",
    "compare_ci",
    "DEFAULT_SAMPLE_CAP",
]

DEFAULT_SAMPLE_CAP = 10**9

# Above this count a Gaussian-exact oracle may draw the batch mean in one
# shot instead of materializing every replicate.
MEAN_SHORTCUT_THRESHOLD = 4096


class BudgetExceededError(RuntimeError):
    """A per-point sample count would exceed the configured hard cap."""


class SolverFailedError(RuntimeError):
    """A solver could not finish (numeric collapse after fallbacks)."""


class StochasticOracle:
    """Base class for models answering noisy evaluations on an integer grid.

    Subclasses must implement :meth:`sample`. ``domain_dims`` lists the grid
    extent per coordinate (points live in {1..N_1} x ... x {1..N_d});
    ``sigma2`` is a known upper bound on the sub-Gaussian variance proxy of
    a single evaluation.
    """

    def __init__(self, domain_dims, sigma2: float):
        self.domain_dims = tuple(int(n) for n in domain_dims)
        if any(n < 1 for n in self.domain_dims):
            raise ValueError("domain extents must be positive")
        if sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        self.sigma2 = float(sigma2)

    @property
    def dim(self) -> int:
        return len(self.domain_dims)

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=int)
        if x.shape != (self.dim,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.dim},)")
        if np.any(x < 1) or np.any(x > np.asarray(self.domain_dims)):
            raise ValueError(f"point {x} outside grid {self.domain_dims}")
        return x

    def sample(self, x, rng: np.random.Generator) -> float:
        """One independent noisy evaluation F(x, xi)."""
        raise NotImplementedError

    def sample_mean(self, x, n: int, rng: np.random.Generator) -> float:
        """Mean of ``n`` fresh independent evaluations at ``x``.

        The default draws each replicate; Gaussian-exact models override
        this with a single draw of the (exactly known) mean distribution
        for large ``n``.
        """
        if n < 1:
            raise ValueError("n must be positive")
        return float(np.mean([self.sample(x, rng) for _ in range(n)]))


class CountingOracle(StochasticOracle):
    """Wrapper that counts logical evaluations (the simulation cost)."""

    def __init__(self, inner: StochasticOracle):
        super().__init__(inner.domain_dims, inner.sigma2)
        self.inner = inner
        self.calls = 0

    def sample(self, x, rng):
        self.calls += 1
        return self.inner.sample(x, rng)

    def sample_mean(self, x, n, rng):
        self.calls += int(n)
        return self.inner.sample_mean(x, n, rng)


def hoeffding_halfwidth(n: int, sigma: float, alpha: float) -> float:
    """Half-width of the 1-alpha Hoeffding interval after n samples."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    # extended-precision intermediates keep the double result within 1 ulp
    s = np.longdouble(sigma)
    return float(np.sqrt(2.0 * s * s / n * np.log(np.longdouble(2.0) / np.longdouble(alpha))))


def samples_for_width(target_h: float, sigma: float, alpha: float) -> int:
    """Least n with h(n, sigma, alpha) <= target_h (at least 1)."""
    if target_h <= 0:
        raise ValueError("target_h must be positive")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0.0:
        return 1
    s, h = np.longdouble(sigma), np.longdouble(target_h)
    n = int(np.ceil(2.0 * s * s * np.log(np.longdouble(2.0) / np.longdouble(alpha)) / (h * h)))
    return max(1, n)


@dataclass
class Guarantee:
    """Target optimality guarantee: PGS (epsilon, delta) or PCS-IZ (c, delta)."""

    epsilon: float
    delta: float
    iz_c: float | None = None

    def __post_init__(self):
        if self.epsilon <= 0 and self.iz_c is None:
            raise ValueError("epsilon must be positive in PGS mode")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.iz_c is not None and self.iz_c <= 0:
            raise ValueError("iz_c must be positive when given")

    @property
    def is_iz(self) -> bool:
        return self.iz_c is not None


@dataclass
class ConfidenceInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("lo must not exceed hi")


@dataclass
class SampleStats:
    """Running tally for one grid point: count, empirical mean, level.

    ``sigma`` is carried along so the half-width is self-contained; it is
    always the oracle's global bound.
    """

    sigma: float
    alpha: float
    count: int = 0
    mean: float = 0.0

    def update(self, batch_mean: float, n: int) -> None:
        """Fold in the mean of ``n`` fresh samples (plain running average)."""
        if n < 1:
            raise ValueError("batch size must be positive")
        total = self.count + n
        self.mean = (self.mean * self.count + batch_mean * n) / total
        self.count = total

    def halfwidth(self) -> float:
        if self.count == 0:
            return math.inf
        return hoeffding_halfwidth(self.count, self.sigma, self.alpha)

    def interval(self) -> ConfidenceInterval:
        h = self.halfwidth()
        return ConfidenceInterval(self.mean - h, self.mean + h)


def sample_to_width(
    oracle: StochasticOracle,
    x,
    target_h: float,
    alpha: float,
    stats: SampleStats | None,
    rng: np.random.Generator,
    cap: int = DEFAULT_SAMPLE_CAP,
) -> SampleStats:
    """Sample ``x`` until its 1-alpha half-width is at most ``target_h``.

    Previously accumulated samples in ``stats`` are retained. The required
    count is known in closed form, so the deficit is drawn as one batch.
    """
    if stats is None:
        stats = SampleStats(sigma=math.sqrt(oracle.sigma2), alpha=alpha)
    needed = samples_for_width(target_h, stats.sigma, alpha)
    if needed > cap:
        raise BudgetExceededError(
            f"point {x}: {needed} samples needed for width {target_h}, cap is {cap}"
        )
    deficit = needed - stats.count
    if deficit > 0:
        stats.update(oracle.sample_mean(x, deficit, rng), deficit)
    return stats


class Comparison(enum.Enum):
    A_BELOW = "A_BELOW"
    B_BELOW = "B_BELOW"
    OVERLAP = "OVERLAP"


def compare_ci(a: SampleStats, b: SampleStats) -> Comparison:
    """Order two confidence intervals, inclusively.

    A_BELOW iff a.mean + h_a <= b.mean - h_b, B_BELOW symmetrically. If both
    hold (possible only for identical degenerate intervals) the points are
    indistinguishable and OVERLAP is returned, which keeps the comparison
    antisymmetric.
    """
    if a.count == 0 or b.count == 0:
        raise ValueError("both stats must be nonempty")
    ha, hb = a.halfwidth(), b.halfwidth()
    a_below = a.mean + ha <= b.mean - hb
    b_below = b.mean + hb <= a.mean - ha
    if a_below and not b_below:
        return Comparison.A_BELOW
    if b_below and not a_below:
        return Comparison.B_BELOW
    return Comparison.OVERLAP
