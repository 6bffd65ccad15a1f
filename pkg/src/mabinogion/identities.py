"""Exact checks of two binomial double-sum identities.

For n >= 1::

    (1/2n)     sum_{j<n}   sum_{i<=j} C(2n,i)/C(2n-1,j)   = (1/2) sum_{i<n} 1/(2i+1)
    (1/(2n-1)) sum_{j<n-1} sum_{i<=j} C(2n-1,i)/C(2n-2,j) = (1/2) sum_{i<n} 1/(2i+1)
                                                             - 4**(n-1) / (n C(2n,n))
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb


@dataclass(frozen=True)
class IdentityReport:
    name: str
    n: int
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs


def _nested_sum(top: int, bottom: int, j_max: int) -> Fraction:
    # sum_{j=0}^{j_max} (sum_{i=0}^{j} C(top, i)) / C(bottom, j)
    total = Fraction(0)
    partial = 0
    c_top = 1
    c_bot = 1
    for j in range(j_max + 1):
        partial += c_top
        total += Fraction(partial, c_bot)
        c_top = c_top * (top - j) // (j + 1)
        c_bot = c_bot * (bottom - j) // (j + 1)
    return total


def double_sum_22_lhs(n: int) -> Fraction:
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return _nested_sum(2 * n, 2 * n - 1, n - 1) / (2 * n)


def half_odd_harmonic(n: int) -> Fraction:
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return sum((Fraction(1, 2 * i + 1) for i in range(n)), Fraction(0)) / 2


def double_sum_23_lhs(n: int) -> Fraction:
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n == 1:
        return Fraction(0)
    return _nested_sum(2 * n - 1, 2 * n - 2, n - 2) / (2 * n - 1)


def double_sum_23_rhs(n: int) -> Fraction:
    return half_odd_harmonic(n) - Fraction(4 ** (n - 1), n * comb(2 * n, n))


def verify_identities(n_max: int = 200) -> list[IdentityReport]:
    if n_max < 1:
        raise ValueError(f"n_max must be positive, got {n_max}")
    reports = []
    harmonic = Fraction(0)
    for n in range(1, n_max + 1):
        harmonic += Fraction(1, 2 * n - 1)
        half = harmonic / 2
        reports.append(IdentityReport("double_sum_22", n, double_sum_22_lhs(n), half))
        rhs23 = half - Fraction(4 ** (n - 1), n * comb(2 * n, n))
        reports.append(IdentityReport("double_sum_23", n, double_sum_23_lhs(n), rhs23))
    return reports
