"""Closed forms for the uncontrolled urn process and its conditioned version.

States are ``(white, black)``.  A draw of a black ball (probability
``black / total``) converts one white ball to black and vice versa; the
chain stops once one colour is extinct.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import bdtr

from .exact import EXACT_LIMIT, binom_row_ratio_iter, log_binomial, to_real
from .recursion import ChainSpec, brute_force_values


class UrnState(NamedTuple):
    white: int
    black: int

    @property
    def total(self) -> int:
        return self.white + self.black

    @property
    def absorbed(self) -> bool:
        return self.white == 0 or self.black == 0


def _check_state(w: int, b: int) -> None:
    if w < 0 or b < 0 or w + b < 1:
        raise ValueError(f"invalid urn state ({w}, {b})")


def _partial_row_sum(n: int, upto: int) -> int:
    """sum_{i=0}^{upto} C(n, i) using the incremental row ratio."""
    total = 0
    term = 1
    for i in range(min(upto, n) + 1):
        total += term
        term = term * (n - i) // (i + 1)
    return total


def absorb_prob_black(w: int, b: int) -> Fraction:
    """Probability that the process ends with only black balls."""
    _check_state(w, b)
    if w == 0:
        return Fraction(1)
    if b == 0:
        return Fraction(0)
    n = w + b
    return Fraction(_partial_row_sum(n - 1, b - 1), 2 ** (n - 1))


def absorb_prob_black_real(w: int, b: int) -> float:
    _check_state(w, b)
    if w == 0 or b == 0 or w + b <= EXACT_LIMIT:
        return to_real(absorb_prob_black(w, b))
    # binomial CDF is the regularised incomplete beta; stable for huge n
    return float(bdtr(b - 1, w + b - 1, 0.5))


def expected_final_black(w: int, b: int) -> Fraction:
    """Expected number of black balls at absorption."""
    _check_state(w, b)
    return (w + b) * absorb_prob_black(w, b)


def expected_final_black_real(w: int, b: int) -> float:
    return (w + b) * absorb_prob_black_real(w, b)


def expected_time(w: int, b: int) -> Fraction:
    """Expected number of draws until absorption (exact double-sum form)."""
    _check_state(w, b)
    if w == 0 or b == 0:
        return Fraction(0)
    n = w + b
    m = min(w, b)
    M = n - 2
    # inner sums S(i) = sum_{j=i}^{M-i} 1/C(M, j), built outward from i = m-1
    i0 = m - 1
    row = [1]
    for ratio in binom_row_ratio_iter(M):
        row.append(row[-1] * ratio.numerator // ratio.denominator)
    s = sum(Fraction(1, row[j]) for j in range(i0, M - i0 + 1))
    inner = [Fraction(0)] * m
    inner[i0] = s
    for i in range(i0 - 1, -1, -1):
        s += Fraction(2, row[i])
        inner[i] = s
    total = Fraction(0)
    coeff = 1  # C(n-1, i)
    for i in range(m):
        total += coeff * inner[i]
        coeff = coeff * (n - 1 - i) // (i + 1)
    return Fraction(n, 2 * (n - 1)) * total


def expected_time_real(w: int, b: int) -> float:
    """Floating evaluation of the same double sum; log-space above the exact limit."""
    _check_state(w, b)
    if w == 0 or b == 0:
        return 0.0
    n = w + b
    if n <= EXACT_LIMIT:
        return to_real(expected_time(w, b))
    m = min(w, b)
    M = n - 2
    i0 = m - 1
    j = np.arange(i0, M - i0 + 1)
    log_s0 = float(np.logaddexp.reduce(-log_binomial(M, j)))
    tail = math.log(2.0) - log_binomial(M, np.arange(i0 - 1, -1, -1))
    log_inner = np.logaddexp.accumulate(np.concatenate(([log_s0], tail)))[::-1]
    log_terms = log_binomial(n - 1, np.arange(m)) + log_inner
    top = float(log_terms.max())
    total = math.fsum(np.exp(log_terms - top).tolist())
    return n / (2.0 * (n - 1)) * math.exp(top) * total


def odd_harmonic(k: int) -> Fraction:
    """sum_{i=0}^{k-1} 1/(2i+1)."""
    return sum((Fraction(1, 2 * i + 1) for i in range(k)), Fraction(0))


def odd_harmonic_real(k: int) -> float:
    return math.fsum((1.0 / np.arange(1, 2 * k, 2, dtype=float)).tolist())


def expected_time_symmetric(k: int) -> Fraction:
    """Expected absorption time from (k, k): k times the first k odd reciprocals."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return k * odd_harmonic(k)


def expected_time_symmetric_real(k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return k * odd_harmonic_real(k)


# ---------------------------------------------------------------------------
# conditioned process (Doob h-transform on absorption at all-black)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HarmonicTable:
    total: int
    values: tuple[Fraction, ...]

    def __getitem__(self, n: int) -> Fraction:
        return self.values[n]


@lru_cache(maxsize=64)
def harmonic_table(N: int) -> HarmonicTable:
    """h(n) = P(all black at absorption | n black among N), n = 0..N."""
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    scale = 2 ** (N - 1)
    vals = [Fraction(0)]
    acc = 0
    coeff = 1
    for i in range(N):
        acc += coeff
        vals.append(Fraction(acc, scale))
        coeff = coeff * (N - 1 - i) // (i + 1)
    return HarmonicTable(N, tuple(vals))


class UndefinedAtZero(ValueError):
    pass


def conditional_transition(n: int, N: int) -> list[tuple[int, Fraction]]:
    """One-step law of the conditioned chain from ``n`` black balls (1 <= n < N)."""
    if n == 0:
        raise UndefinedAtZero("state 0 is not part of the conditioned chain")
    if not 1 <= n <= N - 1:
        raise ValueError(f"n={n} must lie in [1, {N - 1}]")
    h = harmonic_table(N)
    out = [(n + 1, h[n + 1] / h[n] * Fraction(n, N))]
    down = h[n - 1] / h[n] * Fraction(N - n, N)
    if down:
        out.append((n - 1, down))
    return out


@lru_cache(maxsize=64)
def _conditional_times(N: int) -> dict[int, Fraction]:
    chain = ChainSpec(
        states=range(1, N + 1),
        transition=lambda n: conditional_transition(n, N),
        absorbing=lambda n: n == N,
        step_cost=lambda n: 1,
    )
    return brute_force_values(chain, "expected-total-cost")


def conditional_expected_time(w: int, b: int) -> Fraction:
    """Expected absorption time given that the process ends all black."""
    if b < 1:
        raise ValueError("conditioning on all-black needs at least one black ball")
    _check_state(w, b)
    if w == 0:
        return Fraction(0)
    return _conditional_times(w + b)[b]


def conditional_up_probs(N: int) -> np.ndarray:
    """Float table of P(n -> n+1) for the conditioned chain, index n = 0..N.

    Entries at 0 and N are unused (0 is excluded, N absorbs).
    """
    probs = np.zeros(N + 1)
    if N <= 200:
        h = harmonic_table(N)
        for n in range(1, N):
            probs[n] = to_real(h[n + 1] / h[n] * Fraction(n, N))
        return probs
    log_h = np.full(N + 1, -np.inf)
    log_h[1:] = np.logaddexp.accumulate(log_binomial(N - 1, np.arange(N)))
    n = np.arange(1, N)
    probs[1:N] = n / N * np.exp(log_h[2:] - log_h[1:N])
    # h(0) = 0 forces the first step up; rounding may overshoot 1 slightly
    probs[1] = 1.0
    np.clip(probs, 0.0, 1.0, out=probs)
    return probs
