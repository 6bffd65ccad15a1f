from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mabinogion.exact import to_real
from mabinogion.mprocess import (
    UndefinedAtZero,
    UrnState,
    absorb_prob_black,
    absorb_prob_black_real,
    conditional_expected_time,
    conditional_transition,
    conditional_up_probs,
    expected_final_black,
    expected_final_black_real,
    expected_time,
    expected_time_real,
    expected_time_symmetric,
    harmonic_table,
)
from mabinogion.recursion import brute_force_values

from conftest import m_chain


def test_urn_state():
    s = UrnState(2, 3)
    assert s.total == 5 and not s.absorbed
    assert UrnState(0, 3).absorbed


@pytest.mark.parametrize("fn,expected", [
    (absorb_prob_black, Fraction(3, 4)),
    (expected_final_black, Fraction(9, 4)),
    (expected_time, Fraction(3, 2)),
])
def test_small_state(fn, expected):
    assert fn(1, 2) == expected


def test_hand_values():
    assert expected_time(2, 2) == Fraction(8, 3)
    assert expected_time_symmetric(2) == Fraction(8, 3)
    assert expected_time(2, 3) == Fraction(10, 3)
    assert expected_time(3, 3) == Fraction(23, 5)


@pytest.mark.parametrize("fn", [absorb_prob_black, expected_time])
def test_invalid_state(fn):
    with pytest.raises(ValueError):
        fn(0, 0)
    with pytest.raises(ValueError):
        fn(-1, 3)


def test_absorbed_states():
    assert absorb_prob_black(0, 5) == 1 and absorb_prob_black(5, 0) == 0
    assert expected_time(0, 5) == 0 and expected_time(4, 0) == 0


@pytest.mark.parametrize("N", range(1, 31))
def test_oracle_equivalence(N):
    pay = brute_force_values(m_chain(N), "expected-terminal-payoff")
    cost = brute_force_values(m_chain(N), "expected-total-cost")
    for b in range(N + 1):
        w = N - b
        assert absorb_prob_black(w, b) == pay[b] / N
        assert expected_final_black(w, b) == pay[b]
        assert expected_time(w, b) == cost[b]


@pytest.mark.parametrize("k", range(1, 51))
def test_symmetric_time(k):
    assert expected_time_symmetric(k) == expected_time(k, k)


@given(st.integers(1, 60), st.integers(1, 60))
def test_symmetry(w, b):
    assert expected_time(w, b) == expected_time(b, w)
    assert absorb_prob_black(w, b) + absorb_prob_black(b, w) == 1


@pytest.mark.parametrize("N", [3, 10, 57, 200])
def test_conditional_rows_sum_to_one(N):
    for n in range(1, N):
        row = conditional_transition(n, N)
        assert sum(p for _, p in row) == 1
        assert all(p > 0 for _, p in row)


def test_conditional_small():
    assert harmonic_table(3).values == (0, Fraction(1, 4), Fraction(3, 4), 1)
    assert conditional_transition(1, 3) == [(2, 1)]
    assert conditional_transition(2, 3) == [(3, Fraction(8, 9)), (1, Fraction(1, 9))]
    assert conditional_expected_time(1, 2) == Fraction(5, 4)
    with pytest.raises(UndefinedAtZero):
        conditional_transition(0, 3)
    with pytest.raises(ValueError):
        conditional_expected_time(3, 0)


def test_harmonic_table_increasing():
    vals = harmonic_table(40).values
    assert vals[0] == 0 and vals[-1] == 1
    assert all(x < y for x, y in zip(vals, vals[1:]))


@pytest.mark.parametrize("k", range(1, 31))
def test_conditioned_symmetric_time(k):
    assert conditional_expected_time(k, k) == expected_time(k, k)


def test_conditioned_time_decomposition():
    # T = P(black) T_* + P(white) T_*' where T_*' is the mirror image
    for N in (5, 12, 21):
        for b in range(1, N):
            w = N - b
            p = absorb_prob_black(w, b)
            assert expected_time(w, b) == p * conditional_expected_time(w, b) + (1 - p) * conditional_expected_time(b, w)


@pytest.mark.parametrize("N", [50, 200, 201, 900])
def test_conditional_up_probs(N):
    up = conditional_up_probs(N)
    h = harmonic_table(N)
    for n in (1, 2, N // 2, N - 1):
        assert up[n] == pytest.approx(to_real(h[n + 1] / h[n] * Fraction(n, N)), rel=1e-10)
    assert np.all((up[1:N] > 0) & (up[1:N] <= 1))


@pytest.mark.parametrize("w,b", [(250, 250), (700, 300), (1000, 1000), (1, 1999), (1200, 799), (1000, 1001)])
def test_float_path_matches_exact(w, b):
    assert expected_time_real(w, b) == pytest.approx(to_real(expected_time(w, b)), rel=1e-10)
    assert absorb_prob_black_real(w, b) == pytest.approx(to_real(absorb_prob_black(w, b)), rel=1e-10)


def test_float_path_above_limit():
    # same formula evaluated exactly just past the switch-over
    exact = to_real(expected_time(1000, 1001))
    approx = expected_time_real(1001, 1001)
    assert approx > exact
    assert expected_time_real(1001, 1001) == pytest.approx(to_real(expected_time_symmetric(1001)), rel=1e-10)
    assert expected_final_black_real(3000, 3000) == pytest.approx(3000.0, rel=1e-10)
    assert absorb_prob_black_real(10**6, 10**6 + 4000) > 0.99
