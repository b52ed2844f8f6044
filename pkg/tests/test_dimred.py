"""Lattice reduction, integral hyperplanes, and the dimension-reduction solver."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcso.cutplane import Polytope
from dcso.dimred import (
    EMPTY,
    HYPERPLANE,
    TOO_BIG,
    AffineSubgrid,
    dimension_reduction_solve,
    find_integral_hyperplane,
    lll_reduce,
    project_polytope,
    unimodular_completion,
)
from dcso.oracle import Guarantee
from dcso.rng import seed_stream
from helpers import GridOracle, quad_at


def gso_mu_and_norms(B):
    """Plain float Gram-Schmidt for condition checking."""
    B = np.asarray(B, dtype=float)
    n = len(B)
    star = np.zeros_like(B)
    mu = np.zeros((n, n))
    for i in range(n):
        star[i] = B[i]
        for j in range(i):
            mu[i, j] = (B[i] @ star[j]) / (star[j] @ star[j])
            star[i] = star[i] - mu[i, j] * star[j]
    return mu, np.array([s @ s for s in star])


def assert_lll_conditions(B, delta=0.75):
    mu, norms = gso_mu_and_norms(B)
    n = len(B)
    for i in range(n):
        for j in range(i):
            assert abs(mu[i, j]) <= 0.5 + 1e-9
    for k in range(1, n):
        assert norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1] - 1e-9


def lattice_equal(A, B):
    """Two integer bases generate the same lattice iff B = U A, U unimodular."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    U = np.linalg.solve(A.T.astype(float), B.T.astype(float)).T
    Ur = np.rint(U)
    if not np.allclose(U, Ur, atol=1e-6):
        return False
    return abs(round(np.linalg.det(Ur))) == 1


# --- LLL -------------------------------------------------------------------


def test_lll_reference_example():
    B = np.array([[1, 1, 1], [-1, 0, 2], [3, 5, 6]])
    R = lll_reduce(B)
    assert R.dtype == np.int64
    assert_lll_conditions(R)
    assert lattice_equal(B, R)
    # the first reduced vector is a shortest lattice vector here
    combos = range(-4, 5)
    shortest = min(
        (int(sum((a * B[0] + b * B[1] + c * B[2]) ** 2)), (a, b, c))
        for a in combos for b in combos for c in combos
        if (a, b, c) != (0, 0, 0)
    )[0]
    assert int(np.sum(R[0] ** 2)) == shortest


def test_lll_identity_fixed_point():
    B = np.eye(4, dtype=np.int64)
    assert np.array_equal(lll_reduce(B), B)


def test_lll_rejects_dependent_rows():
    with pytest.raises(ValueError):
        lll_reduce(np.array([[1, 2], [2, 4]]))


def test_lll_rejects_bad_delta():
    with pytest.raises(ValueError):
        lll_reduce(np.eye(2), delta=0.2)


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_lll_random_integer_bases(seed):
    rng = seed_stream(77, "lll", seed)
    d = int(rng.integers(2, 6))
    while True:
        B = rng.integers(-50, 51, size=(d, d))
        if abs(np.linalg.det(B.astype(float))) > 0.5:
            break
    R = lll_reduce(B)
    assert_lll_conditions(R)
    assert lattice_equal(B, R)


def test_lll_with_gram_form():
    Q = np.array([[2.0, 0.0], [0.0, 0.5]])
    R = lll_reduce(np.array([[3, 1], [2, 1]]), gram=Q)
    assert R.shape == (2, 2)
    # still the same lattice
    assert lattice_equal(np.array([[3, 1], [2, 1]]), np.rint(R).astype(np.int64))


# --- unimodular completion -------------------------------------------------


@pytest.mark.parametrize(
    "v",
    [[1, 0, 0], [0, 1], [2, 3], [1, -1], [5, -3, 2], [7, 11, 13, 17]],
)
def test_unimodular_completion_properties(v):
    U = unimodular_completion(v)
    d = len(v)
    assert abs(round(np.linalg.det(U.astype(float)))) == 1
    prod = np.asarray(v) @ U
    assert prod[0] == 1
    assert np.all(prod[1:] == 0)
    assert U.shape == (d, d)


def test_unimodular_completion_rejects_nonprimitive():
    with pytest.raises(ValueError):
        unimodular_completion([2, 4])
    with pytest.raises(ValueError):
        unimodular_completion([0, 0])


def test_hyperplane_parametrization_is_bijective():
    """x0 + W t enumerates exactly the integer points of {v . x = k}."""
    v, k = np.array([2, 3]), 1
    U = unimodular_completion(v)
    x0, W = k * U[:, 0], U[:, 1:]
    pts = {tuple(x0 + W @ np.array([t])) for t in range(-100, 101)}
    assert all(2 * x + 3 * y == k for x, y in pts)
    truth = {(x, y) for x in range(-20, 21) for y in range(-20, 21) if 2 * x + 3 * y == k}
    assert truth <= pts
    assert len(pts) == 201  # injective in t


# --- affine subgrid --------------------------------------------------------


def test_affine_subgrid_compose():
    outer = AffineSubgrid.identity(3)
    U = unimodular_completion([1, 0, 0])
    inner = outer.compose(2 * U[:, 0], U[:, 1:])
    assert inner.dim == 2
    t = np.array([4, -1])
    assert np.array_equal(inner.point(t), 2 * U[:, 0] + U[:, 1:] @ t)


# --- hyperplane detection --------------------------------------------------


def test_find_hyperplane_on_thin_slab():
    # box 0 <= x <= 4, 0.6 <= y <= 1.4: all integral points have y = 1
    p = Polytope.box([0.0, 0.6], [4.0, 1.4])
    kind, v, k = find_integral_hyperplane(p)
    assert kind == HYPERPLANE
    # every integral point (x, 1) of the slab lies on v . p = k
    for x in range(0, 5):
        assert int(v @ [x, 1]) == k


def test_find_hyperplane_empty_slab():
    p = Polytope.box([0.0, 0.3], [4.0, 0.7])
    kind, v, k = find_integral_hyperplane(p)
    assert kind == EMPTY


def test_find_hyperplane_fat_box():
    p = Polytope.box([0.0, 0.0], [5.0, 5.0])
    kind, v, k = find_integral_hyperplane(p)
    assert kind == TOO_BIG


def test_project_polytope_keeps_integral_points():
    p = Polytope.box([0.0, 0.6], [4.0, 1.4])
    kind, v, k = find_integral_hyperplane(p)
    new, embed = project_polytope(p, v, k, AffineSubgrid.identity(2))
    assert new.dim == 1
    inside = [t for t in range(-10, 11) if new.contains([float(t)], tol=1e-9)]
    pts = {tuple(embed.point([t])) for t in inside}
    truth = {(x, 1) for x in range(0, 5)}
    assert pts == truth


# --- solver ----------------------------------------------------------------


def test_dimred_zero_noise_exact():
    fn = quad_at([3, 6])
    orc = GridOracle(fn, (8, 8))
    sol = dimension_reduction_solve(orc, 2, 8, Guarantee(epsilon=0.5, delta=0.1), seed_stream(50, "dr"))
    assert fn(sol) <= 0.5


def test_dimred_noisy_pgs():
    fn = quad_at([2, 5])
    orc = GridOracle(fn, (8, 8), sigma=0.5)
    sol = dimension_reduction_solve(orc, 2, 8, Guarantee(epsilon=1.0, delta=0.1), seed_stream(51, "dn"))
    assert fn(sol) <= 1.0


def test_dimred_one_dimensional_delegates():
    fn = quad_at([4])
    orc = GridOracle(fn, (10,))
    sol = dimension_reduction_solve(orc, 1, 10, Guarantee(epsilon=0.5, delta=0.1), seed_stream(52, "d1"))
    assert sol.shape == (1,)
    assert fn(sol) <= 0.5


def test_dimred_three_dimensional():
    fn = quad_at([2, 4, 3])
    orc = GridOracle(fn, (5, 5, 5))
    sol = dimension_reduction_solve(orc, 3, 5, Guarantee(epsilon=0.5, delta=0.1), seed_stream(53, "d3"))
    assert fn(sol) <= 0.5


def test_dimred_rejects_iz():
    orc = GridOracle(lambda x: 0.0, (5, 5))
    with pytest.raises(ValueError):
        dimension_reduction_solve(
            orc, 2, 5, Guarantee(epsilon=0.5, delta=0.1, iz_c=1.0), seed_stream(54, "di")
        )
