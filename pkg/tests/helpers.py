"""Shared test oracles."""

import math

import numpy as np

from dcso.oracle import StochasticOracle


class GridOracle(StochasticOracle):
    """Deterministic grid function plus optional Gaussian noise.

    Batch means are drawn in one shot from their exact Normal(f, s^2/n)
    distribution, so tests stay fast at large sample counts without
    changing any statistics.
    """

    def __init__(self, fn, dims, sigma=0.0):
        super().__init__(dims, sigma * sigma)
        self.fn = fn
        self.sigma = float(sigma)

    def sample(self, x, rng):
        v = float(self.fn(np.asarray(x, dtype=int)))
        if self.sigma > 0:
            v += rng.normal(0.0, self.sigma)
        return v

    def sample_mean(self, x, n, rng):
        if n < 1:
            raise ValueError("n must be positive")
        if n == 1:
            return self.sample(x, rng)
        v = float(self.fn(self.check_point(x)))
        if self.sigma == 0.0:
            return v
        return float(v + rng.normal(0.0, self.sigma / math.sqrt(n)))


def quad_at(target):
    """Separable quadratic centered at ``target`` (a discrete convex test fn)."""
    t = np.asarray(target, dtype=float)

    def fn(x):
        return float(np.sum((np.asarray(x, dtype=float) - t) ** 2))

    return fn
