"""One-dimensional sequential-sampling solvers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcso.onedim import (
    adaptive_sampling,
    adaptive_sampling_iz,
    enhanced_adaptive_sampling,
    finalist_subproblem,
    trisection_quantiles,
)
from dcso.oracle import Guarantee, StochasticOracle
from dcso.rng import seed_stream


class TableOracle(StochasticOracle):
    """Deterministic or Gaussian-noisy lookup of a value table f[x-1]."""

    def __init__(self, values, sigma=0.0):
        super().__init__((len(values),), sigma * sigma)
        self.values = np.asarray(values, dtype=float)

    def sample(self, x, rng):
        v = float(self.values[int(np.asarray(x).ravel()[0]) - 1])
        if self.sigma2 > 0:
            v += rng.normal(0.0, math.sqrt(self.sigma2))
        return v


def vshape(N, x_star, slope=1.0):
    return [slope * abs(x - x_star) for x in range(1, N + 1)]


# --- trisection -----------------------------------------------------------


def test_trisection_examples():
    assert trisection_quantiles(1, 150) == (50, 101)
    assert trisection_quantiles(1, 10) == (4, 7)
    assert trisection_quantiles(1, 4) == (2, 3)


@given(L=st.integers(1, 10**6), span=st.integers(3, 10**6))
def test_trisection_shrinks_interval(L, span):
    U = L + span
    n13, n23 = trisection_quantiles(L, U)
    assert L < n13 < n23 < U
    # either branch leaves at most ~2/3 of the interval
    worst = max(U - n13, n23 - L, n23 - n13)
    assert worst <= math.ceil(2 * (U - L) / 3)


@given(L=st.integers(1, 1000), span=st.integers(3, 1000))
def test_trisection_is_quantile_exact(L, span):
    U = L + span
    n13, n23 = trisection_quantiles(L, U)
    assert n13 == (2 * L + U) // 3
    assert n23 == math.ceil((L + 2 * U) / 3)


# --- adaptive sampling (trisection solver) --------------------------------


@pytest.mark.parametrize("x_star", [1, 7, 20])
def test_as_zero_noise_exact(x_star):
    N = 20
    orc = TableOracle(vshape(N, x_star))
    sol = adaptive_sampling(orc, N, Guarantee(epsilon=0.5, delta=0.1), seed_stream(0, "as", x_star))
    assert orc.values[sol - 1] <= 0.5


def test_as_noisy_finds_near_optimum():
    N = 60
    orc = TableOracle(vshape(N, 23, slope=0.2), sigma=1.0)
    sol = adaptive_sampling(orc, N, Guarantee(epsilon=0.4, delta=0.05), seed_stream(1, "asn"))
    assert 0.2 * abs(sol - 23) <= 0.4


def test_as_rejects_iz_mode():
    orc = TableOracle(vshape(5, 1))
    with pytest.raises(ValueError):
        adaptive_sampling(orc, 5, Guarantee(epsilon=0.1, delta=0.1, iz_c=0.5), seed_stream(0, "x"))


@given(N=st.integers(1, 3000), x_star=st.integers(1, 3000))
@settings(max_examples=40, deadline=None)
def test_as_iteration_bound(N, x_star):
    """Trisection terminates within log_1.5(N) + 1 iterations."""
    x_star = min(x_star, N)
    orc = TableOracle(vshape(N, x_star))
    info = {}
    adaptive_sampling(orc, N, Guarantee(epsilon=0.5, delta=0.1), seed_stream(2, "it", N), info=info)
    assert info["iterations"] <= math.log(max(N, 2)) / math.log(1.5) + 1


def test_as_iz_zero_noise_exact():
    N = 40
    orc = TableOracle(vshape(N, 13))
    sol = adaptive_sampling_iz(
        orc, N, Guarantee(epsilon=1.0, delta=0.1, iz_c=0.5), seed_stream(3, "iz")
    )
    assert sol == 13


def test_as_iz_requires_iz_mode():
    orc = TableOracle(vshape(5, 1))
    with pytest.raises(ValueError):
        adaptive_sampling_iz(orc, 5, Guarantee(epsilon=0.1, delta=0.1), seed_stream(0, "x"))


def test_as_iz_noisy_correct_selection():
    N = 30
    orc = TableOracle(vshape(N, 11), sigma=0.5)
    sol = adaptive_sampling_iz(
        orc, N, Guarantee(epsilon=1.0, delta=0.05, iz_c=1.0), seed_stream(4, "izn")
    )
    assert sol == 11


# --- enhanced adaptive sampling -------------------------------------------


def test_eas_constant_objective_trace():
    """With a constant objective only stride-doubling moves fire."""
    N = 5
    orc = TableOracle([1.0] * N)
    info = {}
    sol = enhanced_adaptive_sampling(
        orc, N, Guarantee(epsilon=0.1, delta=0.1), seed_stream(5, "tr"), info=info
    )
    # {1..5} -> {1,3,5} -> {1,5} -> finalist
    assert info["type2_operations"] == 2
    assert sol == 1


@pytest.mark.parametrize("x_star", [1, 2, 5, 9, 16])
def test_eas_zero_noise_exact(x_star):
    N = 16
    orc = TableOracle(vshape(N, x_star))
    sol = enhanced_adaptive_sampling(
        orc, N, Guarantee(epsilon=0.5, delta=0.1), seed_stream(6, "e", x_star)
    )
    assert orc.values[sol - 1] <= 0.5


def test_eas_noisy_near_optimal():
    N = 40
    orc = TableOracle(vshape(N, 17, slope=0.3), sigma=1.0)
    sol = enhanced_adaptive_sampling(
        orc, N, Guarantee(epsilon=0.6, delta=0.05), seed_stream(7, "en")
    )
    assert 0.3 * abs(sol - 17) <= 0.6


def test_eas_keeps_endpoints_on_stride_doubling():
    """Stride doubling keeps the left endpoint and stays inside the range."""
    N = 9
    orc = TableOracle([0.0] * N)
    info = {}
    sol = enhanced_adaptive_sampling(
        orc, N, Guarantee(epsilon=0.2, delta=0.2), seed_stream(8, "s"), info=info
    )
    assert 1 <= sol <= N


def test_eas_single_point_domain():
    orc = TableOracle([3.0])
    sol = enhanced_adaptive_sampling(orc, 1, Guarantee(epsilon=0.1, delta=0.1), seed_stream(9, "one"))
    assert sol == 1


# --- finalist stage -------------------------------------------------------


def test_finalist_ties_go_smallest():
    orc = TableOracle([2.0, 1.0, 1.0, 5.0])
    win = finalist_subproblem(orc, [2, 3], 0.5, 0.1, seed_stream(10, "f"))
    assert win == 2


def test_finalist_picks_minimum():
    orc = TableOracle([2.0, 0.5, 1.0, 5.0], sigma=0.05)
    win = finalist_subproblem(orc, [1, 2, 3, 4], 0.1, 0.05, seed_stream(11, "fm"))
    assert win == 2


def test_finalist_rejects_empty():
    orc = TableOracle([1.0])
    with pytest.raises(ValueError):
        finalist_subproblem(orc, [], 0.5, 0.1, seed_stream(12, "fe"))
