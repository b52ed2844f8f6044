"""Benchmark models: separable convex family and a two-queue staffing DES.

The separable family has a known optimum (value 0 at x*), which makes it
the workhorse for coverage studies; its noise is exactly Gaussian, so batch
means can be drawn in one shot without changing the statistics. The queue
model staffs two FCFS multi-server queues from a shared server budget and
scores the average customer waiting time over a finite horizon.

A truncated stochastic-subgradient baseline and a brute-force scanner are
included for comparisons and as test oracles.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .lovasz import round_to_integer, stochastic_subgradient
from .oracle import Guarantee, StochasticOracle

__all__ = [
    "separable_g",
    "SeparableModel",
    "SeparableOracle",
    "random_separable_model",
    "QueueModel",
    "QueueOracle",
    "nhpp_arrivals",
    "fcfs_schedule",
    "fcfs_wait_times",
    "queue_sim_run",
    "subgradient_baseline",
    "brute_force_min",
]


# ---------------------------------------------------------------------------
# Separable convex family
# ---------------------------------------------------------------------------


def separable_g(y_star: int, y: int, N: int) -> float:
    """One coordinate term: zero at y_star, increasing toward both edges."""
    if not (1 <= y <= N and 1 <= y_star <= N):
        raise ValueError(f"y={y}, y*={y_star} outside [1, {N}]")
    if y <= y_star:
        return math.sqrt(y_star / y) - 1.0
    return math.sqrt((N + 1 - y_star) / (N + 1 - y)) - 1.0


@dataclass
class SeparableModel:
    """Weighted sum of separable convex terms; optimum x* with value 0."""

    d: int
    N: int
    c: np.ndarray
    x_star: np.ndarray
    noise_sigma: float = 1.0

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.x_star = np.asarray(self.x_star, dtype=int)
        if self.c.shape != (self.d,) or self.x_star.shape != (self.d,):
            raise ValueError("c and x_star must have length d")

    def true_value(self, x) -> float:
        x = np.asarray(x, dtype=int)
        return float(
            sum(self.c[i] * separable_g(int(self.x_star[i]), int(x[i]), self.N) for i in range(self.d))
        )

    def lipschitz(self) -> float:
        """ell-infinity Lipschitz bound: sum of the per-coordinate max steps."""
        total = 0.0
        for i in range(self.d):
            vals = np.array([separable_g(int(self.x_star[i]), y, self.N) for y in range(1, self.N + 1)])
            step = np.max(np.abs(np.diff(vals))) if self.N > 1 else 0.0
            total += self.c[i] * step
        return float(total)

    def oracle(self) -> "SeparableOracle":
        return SeparableOracle(self)


class SeparableOracle(StochasticOracle):
    """Gaussian-noise oracle for a separable model.

    Because the noise is exactly Gaussian, the mean of n replicates is
    exactly Normal(f(x), sigma^2/n), so sample_mean draws it directly:
    same distribution, constant cost per batch.
    """

    def __init__(self, model: SeparableModel):
        super().__init__([model.N] * model.d, model.noise_sigma**2)
        self.model = model

    def sample(self, x, rng):
        x = self.check_point(x)
        f = self.model.true_value(x)
        if self.model.noise_sigma == 0.0:
            return f
        return float(f + rng.normal(0.0, self.model.noise_sigma))

    def sample_mean(self, x, n, rng):
        if n < 1:
            raise ValueError("n must be positive")
        if n == 1:
            return self.sample(x, rng)
        x = self.check_point(x)
        f = self.model.true_value(x)
        if self.model.noise_sigma == 0.0:
            return f
        return float(f + rng.normal(0.0, self.model.noise_sigma / math.sqrt(n)))


def random_separable_model(d: int, N: int, rng: np.random.Generator, noise_sigma: float = 1.0) -> SeparableModel:
    """Random instance: weights in [0.75, 1.25], optimum in {1..floor(0.3 N)}."""
    hi = max(1, int(0.3 * N))
    c = rng.uniform(0.75, 1.25, size=d)
    x_star = rng.integers(1, hi + 1, size=d)
    return SeparableModel(d=d, N=N, c=c, x_star=x_star, noise_sigma=noise_sigma)


# ---------------------------------------------------------------------------
# Two-queue staffing model
# ---------------------------------------------------------------------------


def _lambda1(t):
    return 75.0 + 25.0 * np.sin(0.3 * np.asarray(t))


def _lambda2(t):
    return 80.0 + 40.0 * np.sin(0.2 * np.asarray(t))


@dataclass
class QueueModel:
    """Two FCFS multi-server queues sharing a budget of N + 1 servers.

    Decision x in [N] staffs queue 1 with x servers and queue 2 with
    N + 1 - x. Arrivals are doubly stochastic NHPPs whose random scales
    share a common shock; service times are log-normal (queue 1) and gamma
    (queue 2), parametrized by distribution mean and variance.
    """

    N: int
    horizon: float = 2.0
    service1_mean: float = 0.75
    service1_var: float = 0.1
    service2_mean: float = 0.65
    service2_var: float = 0.1

    rate1 = staticmethod(_lambda1)
    rate2 = staticmethod(_lambda2)
    rate1_max: float = 100.0
    rate2_max: float = 120.0

    def lognormal_params(self) -> tuple[float, float]:
        """(mu, s) of the underlying normal matching the stated moments."""
        m, v = self.service1_mean, self.service1_var
        s2 = math.log(1.0 + v / (m * m))
        mu = math.log(m) - s2 / 2.0
        return mu, math.sqrt(s2)

    def gamma_params(self) -> tuple[float, float]:
        """(shape, scale) matching the stated moments."""
        m, v = self.service2_mean, self.service2_var
        return m * m / v, v / m

    def draw_scales(self, rng) -> tuple[float, float]:
        x = rng.uniform(0.75, 1.25)
        y = rng.uniform(0.75, 1.25)
        z = rng.uniform(-0.5, 0.5)
        return x + z, y - z


def nhpp_arrivals(rate_fn, gamma_scale: float, T: float, rng, rate_max: float) -> np.ndarray:
    """Non-homogeneous Poisson arrival times on [0, T] by thinning.

    Candidates arrive homogeneously at rate gamma_scale * rate_max; each is
    kept with probability rate_fn(t) / rate_max.
    """
    if gamma_scale <= 0.0:
        return np.empty(0)
    count = rng.poisson(gamma_scale * rate_max * T)
    if count == 0:
        return np.empty(0)
    times = np.sort(rng.uniform(0.0, T, size=count))
    keep = rng.uniform(0.0, 1.0, size=count) < np.asarray(rate_fn(times)) / rate_max
    return times[keep]


def fcfs_schedule(arrivals, services, servers: int) -> tuple[np.ndarray, np.ndarray]:
    """Service start/end times of an FCFS multi-server queue.

    Arrivals must be sorted; each customer takes the earliest-free server.
    The system runs to drain: everyone eventually starts service.
    """
    if servers < 1:
        raise ValueError("need at least one server")
    arrivals = np.asarray(arrivals, dtype=float)
    services = np.asarray(services, dtype=float)
    free = [0.0] * servers
    heapq.heapify(free)
    starts = np.empty(len(arrivals))
    ends = np.empty(len(arrivals))
    for i, (a, s) in enumerate(zip(arrivals, services)):
        t = heapq.heappop(free)
        start = a if a >= t else t
        starts[i] = start
        ends[i] = start + s
        heapq.heappush(free, start + s)
    return starts, ends


def fcfs_wait_times(arrivals, services, servers: int) -> np.ndarray:
    starts, _ = fcfs_schedule(arrivals, services, servers)
    return starts - np.asarray(arrivals, dtype=float)


def queue_sim_run(model: QueueModel, x: int, rng) -> float:
    """One replication: average waiting time over all arrivals of both queues."""
    if not 1 <= x <= model.N:
        raise ValueError(f"staffing level {x} outside [1, {model.N}]")
    g1, g2 = model.draw_scales(rng)
    arr1 = nhpp_arrivals(model.rate1, g1, model.horizon, rng, model.rate1_max)
    arr2 = nhpp_arrivals(model.rate2, g2, model.horizon, rng, model.rate2_max)
    n1, n2 = len(arr1), len(arr2)
    if n1 + n2 == 0:
        return 0.0
    mu, s = model.lognormal_params()
    shape, scale = model.gamma_params()
    serv1 = rng.lognormal(mean=mu, sigma=s, size=n1)
    serv2 = rng.gamma(shape, scale, size=n2)
    total = 0.0
    if n1:
        total += float(np.sum(fcfs_wait_times(arr1, serv1, x)))
    if n2:
        total += float(np.sum(fcfs_wait_times(arr2, serv2, model.N + 1 - x)))
    return total / (n1 + n2)


class QueueOracle(StochasticOracle):
    """Simulation oracle over staffing levels; variance bound supplied."""

    def __init__(self, model: QueueModel, estimated_sigma2: float = 10.0):
        super().__init__([model.N], estimated_sigma2)
        self.model = model

    def sample(self, x, rng):
        x = self.check_point(x)
        return queue_sim_run(self.model, int(x[0]), rng)

    def sample_mean(self, x, n, rng):
        if n < 1:
            raise ValueError("n must be positive")
        x = self.check_point(x)
        lvl = int(x[0])
        return float(np.mean([queue_sim_run(self.model, lvl, rng) for _ in range(n)]))


# ---------------------------------------------------------------------------
# Baseline and test oracles
# ---------------------------------------------------------------------------


def subgradient_baseline(
    oracle: StochasticOracle,
    d: int,
    N: int,
    guarantee: Guarantee,
    lipschitz_L: float,
    rng: np.random.Generator,
    early_stop: bool = False,
    c_b: float = 1.0,
) -> np.ndarray:
    """Projected stochastic subgradient descent on the convex extension.

    Fixed step N / (L sqrt(K)) over K one-sample subgradients; the averaged
    second-half iterate is rounded to the grid. The optional early stop ends
    the run once the running mean of observed values stagnates.
    """
    if lipschitz_L < 0:
        raise ValueError("Lipschitz constant must be nonnegative")
    eps, delta = guarantee.epsilon, guarantee.delta
    if lipschitz_L == 0.0:
        x_bar = np.full(d, (N + 1) / 2.0)
        return round_to_integer(oracle, x_bar, guarantee, rng)
    K = math.ceil(c_b * d * N * N * lipschitz_L**2 / eps**2 * math.log(1.0 / delta))
    eta = N / (lipschitz_L * math.sqrt(K))
    # The stagnation window must outlast the slow 1/k drift of the running
    # mean, otherwise the monitor fires long before the iterates settle.
    window = math.ceil(150.0 * d / eps**2 * math.log(1.0 / delta))
    x = np.full(d, (N + 1) / 2.0)
    iterates = []
    running_sum, best_mean, stagnant = 0.0, math.inf, 0
    for k in range(1, K + 1):
        est = stochastic_subgradient(oracle, x, 1, rng)
        x = np.clip(x - eta * est.g, 1.0, float(N))
        iterates.append(x.copy())
        if early_stop:
            running_sum += float(est.chain_means[0])
            mean = running_sum / k
            if mean < best_mean - eps / math.sqrt(N):
                best_mean, stagnant = mean, 0
            else:
                stagnant += 1
                if stagnant >= window:
                    break
    tail = iterates[len(iterates) // 2 :]
    x_bar = np.mean(tail, axis=0)
    return round_to_integer(oracle, x_bar, guarantee, rng)


def brute_force_min(true_fn, d: int, N: int) -> tuple[np.ndarray, float]:
    """Exhaustive scan of {1..N}^d; ties go lexicographically smallest."""
    if N**d > 10**7:
        raise ValueError(f"grid of size {N}^{d} exceeds the brute-force guard")
    best_x, best_v = None, math.inf
    for x in itertools.product(range(1, N + 1), repeat=d):
        v = float(true_fn(np.asarray(x)))
        if v < best_v:
            best_x, best_v = x, v
    return np.asarray(best_x), best_v
