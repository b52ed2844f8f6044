"""Piecewise-linear convex extension machinery for grid-convex functions.

A discrete midpoint-convex function on {1..N}^d extends to a convex function
on the solid box [1, N]^d: inside each unit cube the extension is the
classical Lovasz extension of the (submodular) restriction. Everything here
is built from the *neighbor chain* of a fractional point x: sort the
fractional parts nonincreasingly, then walk from floor(x) to ceil(x) one
coordinate at a time. Function values along that chain give the extension
value, an exact subgradient, and (with noisy evaluations) an unbiased
stochastic subgradient usable as a separation oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracle import Guarantee, SampleStats, StochasticOracle, samples_for_width

__all__ = [
    "consistent_permutation",
    "NeighborChain",
    "neighbor_chain",
    "lovasz_value",
    "subgradient",
    "SubgradientEstimate",
    "stochastic_subgradient",
    "so_sample_count",
    "round_to_integer",
    "chain_weights",
]


def consistent_permutation(frac) -> np.ndarray:
    """Permutation sorting fractional parts nonincreasingly (0-based).

    Ties break by ascending coordinate index, making the choice
    deterministic; the extension value is invariant to the tie rule, only
    the returned subgradient depends on it.
    """
    frac = np.asarray(frac, dtype=float)
    if np.any(frac < -1e-12) or np.any(frac > 1 + 1e-12):
        raise ValueError("fractional parts must lie in [0, 1]")
    return np.argsort(-frac, kind="stable")


@dataclass
class NeighborChain:
    """Chain of d+1 grid points from the cube base to base + 1 along perm."""

    base: np.ndarray  # integer cube anchor, componentwise in [1, N_i - 1]
    perm: np.ndarray  # 0-based coordinate order
    points: list[np.ndarray]  # S^0 .. S^d
    frac: np.ndarray  # x - base, componentwise in [0, 1]


def neighbor_chain(x, domain_dims) -> NeighborChain:
    """Neighbor chain of a fractional point in [1, N]^d.

    Points on an upper face use the lower-adjacent cube; interior integral
    points anchor their own cube (any containing cube gives the same
    extension value).
    """
    x = np.asarray(x, dtype=float)
    dims = np.asarray(domain_dims, dtype=int)
    if np.any(dims < 2):
        raise ValueError("chain construction needs extent >= 2 in every coordinate")
    if np.any(x < 1 - 1e-9) or np.any(x > dims + 1e-9):
        raise ValueError(f"point {x} outside [1, N]^d")
    base = np.minimum(np.floor(x).astype(int), dims - 1)
    base = np.maximum(base, 1)
    frac = np.clip(x - base, 0.0, 1.0)
    perm = consistent_permutation(frac)
    points = [base.copy()]
    cur = base.copy()
    for k in perm:
        cur = cur.copy()
        cur[k] += 1
        points.append(cur)
    return NeighborChain(base=base, perm=perm, points=points, frac=frac)


def lovasz_value(f_on_chain, chain: NeighborChain) -> float:
    """Extension value from function values along the chain."""
    f = np.asarray(f_on_chain, dtype=float)
    d = len(chain.perm)
    if f.shape != (d + 1,):
        raise ValueError(f"need {d + 1} chain values, got {f.shape}")
    t = chain.frac[chain.perm]
    return float(f[0] + np.sum(np.diff(f) * t))


def chain_weights(chain: NeighborChain) -> np.ndarray:
    """Convex-combination weights: lovasz_value == weights . f_on_chain."""
    t = chain.frac[chain.perm]
    d = len(t)
    w = np.empty(d + 1)
    w[0] = 1.0 - (t[0] if d else 0.0)
    for i in range(1, d):
        w[i] = t[i - 1] - t[i]
    if d:
        w[d] = t[d - 1]
    return w


@dataclass
class SubgradientEstimate:
    g: np.ndarray
    samples_per_point: int
    chain: NeighborChain
    chain_means: np.ndarray


def subgradient(f_on_chain, chain: NeighborChain) -> np.ndarray:
    """Exact subgradient of the extension from chain values."""
    f = np.asarray(f_on_chain, dtype=float)
    g = np.empty(len(chain.perm))
    g[chain.perm] = np.diff(f)
    return g


def stochastic_subgradient(
    oracle: StochasticOracle, x, n: int, rng: np.random.Generator
) -> SubgradientEstimate:
    """Unbiased subgradient estimate from n fresh samples per chain point.

    Consecutive components share a chain-point mean, so they are
    correlated, but each component is the difference of two n-sample means
    and is therefore sub-Gaussian with parameter 2 sigma^2 / n.
    """
    if n < 1:
        raise ValueError("n must be positive")
    chain = neighbor_chain(x, oracle.domain_dims)
    means = np.array([oracle.sample_mean(p, n, rng) for p in chain.points])
    g = np.empty(len(chain.perm))
    g[chain.perm] = np.diff(means)
    return SubgradientEstimate(g=g, samples_per_point=n, chain=chain, chain_means=means)


def so_sample_count(d: int, N: int, sigma: float, epsilon: float, delta: float) -> int:
    """Samples per chain point making the averaged subgradient an
    (epsilon, delta)-separation oracle (clamped to at least 1)."""
    if d < 1 or N < 1:
        raise ValueError("d and N must be positive")
    if epsilon <= 0 or not 0.0 < delta < 1.0:
        raise ValueError("epsilon must be positive and delta in (0, 1)")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    s, e = np.longdouble(sigma), np.longdouble(epsilon)
    n = int(np.ceil(4.0 * d * N * N * s * s / (e * e) * np.log(np.longdouble(2.0) / np.longdouble(delta))))
    return max(1, n)


def round_to_integer(
    oracle: StochasticOracle,
    x_bar,
    guarantee: Guarantee,
    rng: np.random.Generator,
) -> np.ndarray:
    """Round a good fractional point to a grid point, preserving PGS.

    Samples every chain point of x_bar until the 1 - delta/4 confidence
    width is below epsilon/4 and returns the chain point with minimal
    empirical mean (ties: earliest chain position).
    """
    eps = guarantee.epsilon if not guarantee.is_iz else guarantee.iz_c / 2.0
    alpha = guarantee.delta / 4.0
    chain = neighbor_chain(x_bar, oracle.domain_dims)
    sigma = math.sqrt(oracle.sigma2)
    n = samples_for_width(eps / 4.0, sigma, alpha)
    best_idx, best_mean = 0, math.inf
    for i, p in enumerate(chain.points):
        m = oracle.sample_mean(p, n, rng)
        if m < best_mean:
            best_idx, best_mean = i, m
    return chain.points[best_idx].copy()
