import itertools
from math import comb

import pytest
from hypothesis import given, strategies as st

from normalproj.grading import (
    DegreeRegion,
    GradingError,
    SpaceKind,
    basis_size,
    dehomogenized,
    enumerate_basis,
    intersect_corners,
    monomial_degree,
    region_contains,
    theorem_region,
)

TRI = SpaceKind.TRIANGULAR
TEN = SpaceKind.TENSOR_PRODUCT


def test_basis_size_examples():
    assert basis_size(TRI, (4, 0)) == 15
    assert basis_size(TEN, (2, 2, 0)) == 9
    assert basis_size(TRI, (0, 0)) == 1
    assert basis_size(TEN, (0, 0, 0)) == 1


def test_basis_size_closed_form():
    for a, b in itertools.product(range(8), range(4)):
        assert basis_size(TRI, (a, b)) == comb(a + 2, 2) * (b + 1)


def test_tensor_basis_matches_listing():
    basis = enumerate_basis(TEN, (2, 2, 0))
    got = [dehomogenized(TEN, m)[:2] for m in basis]
    # 1, u, u^2, v, vu, vu^2, v^2, v^2u, v^2u^2
    assert got == [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1), (0, 2), (1, 2), (2, 2)]


def test_triangular_degree_one_slice():
    basis = enumerate_basis(TRI, (1, 0))
    assert [dehomogenized(TRI, m)[:2] for m in basis] == [(0, 0), (1, 0), (0, 1)]


def test_zero_degree_slice():
    assert enumerate_basis(TRI, (0, 0)) == ((0, 0, 0, 0, 0),)
    assert enumerate_basis(TEN, (0, 0, 0)) == ((0,) * 6,)


@pytest.mark.parametrize("kind", [TRI, TEN])
def test_enumeration_sweep(kind):
    ranges = [range(0, 11)] * kind.arity if kind is TRI else [range(0, 6)] * kind.arity
    for deg in itertools.product(*ranges):
        basis = enumerate_basis(kind, deg)
        assert len(basis) == basis_size(kind, deg)
        assert len(set(basis)) == len(basis)
        assert all(monomial_degree(kind, m) == deg for m in basis)


def test_negative_degree_rejected():
    with pytest.raises(GradingError):
        basis_size(TRI, (-1, 0))
    with pytest.raises(GradingError):
        enumerate_basis(TEN, (1, 1))


def test_region_examples():
    region = DegreeRegion(((4, 0), (2, 2)))
    assert region_contains(region, (4, 0))
    assert not region_contains(region, (3, 0))
    assert region_contains(region, (1000, 1000))
    assert region.contains((2, 5))


def test_unbounded_corner():
    region = DegreeRegion(((None, 3),))
    assert region_contains(region, (0, 3))
    assert not region_contains(region, (50, 2))


def test_intersect_corners():
    assert intersect_corners((1, None), (None, 2)) == (1, 2)
    assert intersect_corners((4, 1), (2, 3)) == (4, 3)


degs = st.tuples(st.integers(0, 12), st.integers(0, 12))


@given(degs, degs, st.tuples(st.integers(0, 5), st.integers(0, 5)))
def test_region_monotone(corner, deg, bump):
    region = DegreeRegion((corner,))
    bigger = (deg[0] + bump[0], deg[1] + bump[1])
    if region_contains(region, deg):
        assert region_contains(region, bigger)


def test_theorem_region_triangular():
    assert set(theorem_region(TRI, 2, 1).corners) == {(4, 0), (2, 2)}


def test_theorem_region_with_curve():
    # curve ((m1, n1), (m2, n2)) = ((1, 0), (0, 1)): eta = 0 and the second
    # corner moves to 2d - 2 + d - min(m1, m2) = 4
    region = theorem_region(TRI, 2, 1, curve=((1, 0), (0, 1)))
    assert set(region.corners) == {(4, 0), (4, 2)}


def test_theorem_region_tensor():
    assert set(theorem_region(TEN, (1, 1), 1).corners) == {(2, 1, 0), (1, 2, 0), (1, 1, 2)}


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_triangular_nu_zero_threshold(d):
    region = theorem_region(TRI, d, 1)
    for mu in range(0, 6 * d):
        assert region_contains(region, (mu, 0)) == (mu >= 3 * d - 2)


def test_theorem_region_bad_arity():
    with pytest.raises(GradingError):
        theorem_region(TEN, 2, 1)
