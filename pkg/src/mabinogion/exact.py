"""Exact integer/rational helpers and the log-space floating fallback.

Rationals are :class:`fractions.Fraction` (always reduced, positive
denominator); integers are plain Python ``int``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np
from scipy.special import gammaln

#: Total ball count up to which closed forms are evaluated in exact arithmetic.
EXACT_LIMIT = 2000


def binomial(n: int, k: int) -> int:
    """C(n, k), zero outside ``0 <= k <= n``."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


@lru_cache(maxsize=4096)
def central_prob(k: int) -> Fraction:
    """Probability of exactly k heads in 2k fair tosses, ``C(2k,k) / 4**k``."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    return Fraction(math.comb(2 * k, k), 4**k)


def binom_row_ratio_iter(n: int) -> Iterator[Fraction]:
    """Yield C(n, i+1)/C(n, i) = (n-i)/(i+1) for i = 0..n-1."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    for i in range(n):
        yield Fraction(n - i, i + 1)


def to_real(x: Fraction | int) -> float:
    """Correctly rounded conversion; raises OverflowError past the double range."""
    if isinstance(x, int):
        return float(x)
    # int / int true division is correctly rounded in CPython
    return x.numerator / x.denominator


def log_binomial(n, k):
    """Natural log of C(n, k) via log-gamma; vectorised over numpy input."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def log_central_prob(k: int) -> float:
    return float(log_binomial(2 * k, k)) - 2 * k * math.log(2.0)


def central_prob_real(k: int) -> float:
    """p_k as a double, exact route when cheap, log-gamma route otherwise."""
    if k <= EXACT_LIMIT:
        return to_real(central_prob(k))
    return math.exp(log_central_prob(k))


def log_partial_binomial_sum(n: int, upto: int) -> float:
    """log of sum_{i=0}^{upto} C(n, i), evaluated stably in log space."""
    if upto < 0:
        return -math.inf
    upto = min(upto, n)
    i = np.arange(upto + 1)
    return float(np.logaddexp.reduce(log_binomial(n, i)))

