"""Exact polynomial arithmetic and the rank-reversal/difference operators."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from klspoly.polynomial import (NEG_INF, DegreeExceedsRank, NotDivisible,
                                Poly, delta_invert, delta_truncate,
                                poly_div_t_minus_1, poly_rev)

coeffs = st.lists(st.integers(min_value=-9, max_value=9), max_size=6)
polys = coeffs.map(Poly)
small_rank = st.integers(min_value=0, max_value=12)


def test_construction_trims_and_coerces():
    p = Poly([1, 2, 0, 0])
    assert p.coeffs == (1, 2)
    assert all(isinstance(c, Fraction) for c in p.coeffs)
    assert Poly(["1/2", 1]).coeff(0) == Fraction(1, 2)
    assert Poly().is_zero() and Poly([0, 0]).is_zero()
    assert Poly().degree == NEG_INF
    with pytest.raises(TypeError):
        Poly([1.5])


def test_arithmetic_basics():
    p, q = Poly([1, 1]), Poly([1, 4, 1])
    assert p + q == Poly([2, 5, 1])
    assert q - p == Poly([0, 3, 1])
    assert p * p == Poly([1, 2, 1])
    assert p * 0 == Poly()
    assert (p ** 3) == Poly([1, 3, 3, 1])
    assert p.shift(2) == Poly([0, 0, 1, 1])
    assert q(1) == 6 and q(-1) == -2
    assert p.truncate(1) == Poly([1])


@given(polys, polys)
def test_addition_and_multiplication_commute(p, q):
    assert p + q == q + p
    assert p * q == q * p


@given(polys, polys, polys)
def test_multiplication_distributes(p, q, r):
    assert p * (q + r) == p * q + p * r
    assert (p * q) * r == p * (q * r)


@given(polys, small_rank)
def test_rev_is_an_involution(p, r):
    if p.degree > r:
        with pytest.raises(DegreeExceedsRank):
            poly_rev(p, r)
        return
    assert poly_rev(poly_rev(p, r), r) == p


@given(polys, polys, small_rank, small_rank)
def test_rev_is_multiplicative(p, q, r, s):
    if p.degree > r or q.degree > s:
        return
    assert poly_rev(p * q, r + s) == poly_rev(p, r) * poly_rev(q, s)


def test_rev_examples():
    assert poly_rev(Poly([1, 2]), 3) == Poly([0, 0, 2, 1])
    assert poly_rev(Poly(), 4) == Poly()


@given(polys)
def test_division_by_t_minus_1_roundtrips(p):
    tm1 = Poly([-1, 1])
    assert poly_div_t_minus_1(p * tm1) == p


def test_division_remainder_is_reported():
    with pytest.raises(NotDivisible) as err:
        poly_div_t_minus_1(Poly([1, 1]))
    assert err.value.remainder == Poly([2])


@given(coeffs, st.integers(min_value=1, max_value=6))
def test_delta_operators_invert_on_symmetric_input(half, r):
    # build a symmetric polynomial of degree <= r - 1 from its lower half
    low = half[: (r + 1) // 2]
    full = [Fraction(0)] * r
    for i, c in enumerate(low):
        full[i] = Fraction(c)
        full[r - 1 - i] = Fraction(c)
    p = Poly(full)
    assert poly_rev(p, r - 1) == p
    assert delta_invert(delta_truncate(p, r), r) == p


def test_delta_truncate_examples():
    # 1 + 4t + t^2 at rank 3 keeps 1 + 3t
    assert delta_truncate(Poly([1, 4, 1]), 3) == Poly([1, 3])
    assert delta_truncate(Poly([1, 4, 1]), 1) == Poly([1])
    with pytest.raises(ValueError):
        delta_truncate(Poly([1]), 0)


def test_json_roundtrip_is_exact():
    p = Poly(["1/3", -2, 7])
    assert Poly.from_json(p.to_json()) == p
    assert p.to_json() == ["1/3", "-2", "7"]
