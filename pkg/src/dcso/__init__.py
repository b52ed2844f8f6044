"""Discrete convex simulation optimization: solvers and benchmark harness.

Noisy minimization of discrete (midpoint-convex) functions on integer
grids, with either a probability-of-good-selection guarantee (solution
within epsilon of optimal, confidence 1 - delta) or an indifference-zone
correct-selection guarantee. Solvers range from one-dimensional adaptive
sampling through cutting-plane methods to a recursive multi-dimensional
scheme, all driven by a shared stochastic-oracle abstraction.
"""

__version__ = "0.1.0"

from .bench import (
    QueueModel,
    QueueOracle,
    SeparableModel,
    SeparableOracle,
    brute_force_min,
    random_separable_model,
    subgradient_baseline,
)
from .cutplane import EngineKind, accelerated_vaidya_iz, stochastic_vaidya
from .dimred import dimension_reduction_solve, lll_reduce
from .harness import ExperimentConfig, landscape_scan, run_experiment
from .lovasz import lovasz_value, neighbor_chain, round_to_integer, stochastic_subgradient
from .multieas import solve_recursive
from .onedim import adaptive_sampling, adaptive_sampling_iz, enhanced_adaptive_sampling
from .oracle import (
    BudgetExceededError,
    CountingOracle,
    Guarantee,
    SolverFailedError,
    StochasticOracle,
    hoeffding_halfwidth,
    samples_for_width,
)
from .rng import seed_stream

__all__ = [
    "__version__",
    "StochasticOracle",
    "CountingOracle",
    "Guarantee",
    "BudgetExceededError",
    "SolverFailedError",
    "hoeffding_halfwidth",
    "samples_for_width",
    "seed_stream",
    "adaptive_sampling",
    "adaptive_sampling_iz",
    "enhanced_adaptive_sampling",
    "stochastic_vaidya",
    "accelerated_vaidya_iz",
    "EngineKind",
    "dimension_reduction_solve",
    "lll_reduce",
    "solve_recursive",
    "neighbor_chain",
    "lovasz_value",
    "stochastic_subgradient",
    "round_to_integer",
    "SeparableModel",
    "SeparableOracle",
    "random_separable_model",
    "QueueModel",
    "QueueOracle",
    "subgradient_baseline",
    "brute_force_min",
    "ExperimentConfig",
    "run_experiment",
    "landscape_scan",
]
