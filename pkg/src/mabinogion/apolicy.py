"""Exact values under Policy A (keep whites strictly below blacks).

``v_k`` and ``t_k`` are the expected final black count and expected
absorption time started from ``(k, k)``.  Every other state is reduced to
one of these through a boundary-value formula along the fixed-total line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .exact import central_prob
from .mprocess import odd_harmonic

_v_cache: list[Fraction] = [Fraction(0), Fraction(1)]
_t_cache: list[Fraction] = [Fraction(0), Fraction(0)]


def _extend(k_max: int) -> None:
    k = len(_v_cache) - 1
    harmonic = odd_harmonic(k)
    while k < k_max:
        p = central_prob(k)
        shrink = (1 - p) / (1 + p)
        weight = p / (1 + p)
        _v_cache.append(shrink * _v_cache[k] + (2 * k + 1) * 2 * weight)
        _t_cache.append(shrink * _t_cache[k] + (2 * k + 1) * weight * harmonic)
        harmonic += Fraction(1, 2 * k + 1)
        k += 1


def v_sequence(k_max: int) -> dict[int, Fraction]:
    """v_1..v_{k_max}; v_1 = 1."""
    if k_max < 1:
        raise ValueError(f"k_max must be positive, got {k_max}")
    _extend(k_max)
    return {k: _v_cache[k] for k in range(1, k_max + 1)}


def t_sequence(k_max: int) -> dict[int, Fraction]:
    """t_1..t_{k_max}; t_1 = 0."""
    if k_max < 1:
        raise ValueError(f"k_max must be positive, got {k_max}")
    _extend(k_max)
    return {k: _t_cache[k] for k in range(1, k_max + 1)}


def v_k(k: int) -> Fraction:
    _extend(k)
    return _v_cache[k]


def t_k(k: int) -> Fraction:
    _extend(k)
    return _t_cache[k]


def t_sequence_via_beta(k_max: int) -> dict[int, Fraction]:
    """t_k rebuilt with beta_k(k+1) from its double sum (no harmonic shortcut)."""
    out = {1: Fraction(0)}
    t = Fraction(0)
    for k in range(1, k_max):
        p = central_prob(k)
        t = (1 - p) / (1 + p) * t + (2 * k + 1) * beta(k, k + 1) * 2 * p / (1 + p)
        out[k + 1] = t
    return out


def sequences_real(k_max: int) -> tuple[list[float], list[float]]:
    """Floating v_k, t_k for k = 0..k_max (index 0 unused), for large k."""
    v = [0.0, 1.0]
    t = [0.0, 0.0]
    p = 0.5
    # running odd-harmonic sum with Neumaier compensation
    h, comp = 1.0, 0.0
    for k in range(1, k_max):
        shrink = (1.0 - p) / (1.0 + p)
        weight = p / (1.0 + p)
        harmonic = h + comp
        v.append(shrink * v[k] + (2 * k + 1) * 2.0 * weight)
        t.append(shrink * t[k] + (2 * k + 1) * weight * harmonic)
        term = 1.0 / (2 * k + 1)
        s = h + term
        comp += (h - s) + term if abs(h) >= term else (term - s) + h
        h = s
        p *= (2 * k + 1) / (2 * k + 2)
    return v, t


# ---------------------------------------------------------------------------
# auxiliary double sums
# ---------------------------------------------------------------------------


def _aux_sums(top: int, bottom: int, k: int, n_max: int) -> list[Fraction]:
    # out[n] = sum_{i=k+1}^{k+n-1} C(top, i) * sum_{j=k}^{i-1} 1/C(bottom, j)
    out = [Fraction(0), Fraction(0)]
    inner = Fraction(0)
    total = Fraction(0)
    c_top = math.comb(top, k + 1)
    c_bot = math.comb(bottom, k)
    for i in range(k + 1, k + n_max):
        inner += Fraction(1, c_bot)
        total += c_top * inner
        out.append(total)
        c_top = c_top * (top - i) // (i + 1)
        c_bot = c_bot * (bottom - i + 1) // i
    return out[: n_max + 1]


@lru_cache(maxsize=512)
def _alpha_row(k: int) -> tuple[Fraction, ...]:
    return tuple(s / (2 * k - 1) for s in _aux_sums(2 * k - 1, 2 * k - 2, k, k))


@lru_cache(maxsize=512)
def _beta_row(k: int) -> tuple[Fraction, ...]:
    return tuple(s / (2 * k) for s in _aux_sums(2 * k, 2 * k - 1, k, k + 1))


def alpha(k: int, n: int) -> Fraction:
    if k < 1 or not 0 <= n <= k:
        raise ValueError(f"alpha needs k >= 1 and 0 <= n <= k, got k={k}, n={n}")
    return _alpha_row(k)[n]


def beta(k: int, n: int) -> Fraction:
    if k < 1 or not 0 <= n <= k + 1:
        raise ValueError(f"beta needs k >= 1 and 0 <= n <= k+1, got k={k}, n={n}")
    return _beta_row(k)[n]


# ---------------------------------------------------------------------------
# general states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _LineCoords:
    """State (w, b), w < b, written as (k-c, k+c) or (k+1-c, k+c)."""

    k: int
    c: int
    even: bool


def _line_coords(w: int, b: int) -> _LineCoords:
    n = w + b
    k = n // 2
    return _LineCoords(k, b - k, n % 2 == 0)


def _hit_weight(coords: _LineCoords) -> Fraction:
    # probability-like weight of reaching all-black before returning to the symmetric boundary
    k, c = coords.k, coords.c
    if coords.even:
        s = sum(math.comb(2 * k - 1, i) for i in range(k, k + c))
        return Fraction(s, 2 ** (2 * k - 2))
    s = sum(math.comb(2 * k, i) for i in range(k, k + c))
    return Fraction(s, 2 ** (2 * k - 1)) / (1 + central_prob(k))


def _check(w: int, b: int) -> None:
    if w < 0 or b < 0 or w + b < 1:
        raise ValueError(f"invalid urn state ({w}, {b})")


def expected_final_black_A(w: int, b: int) -> Fraction:
    _check(w, b)
    if b == 0:
        return Fraction(0)
    if w == 0:
        return Fraction(b)
    if w >= b:
        return v_k(b)
    co = _line_coords(w, b)
    vk = v_k(co.k)
    top = 2 * co.k if co.even else 2 * co.k + 1
    return vk + (top - vk) * _hit_weight(co)


def expected_time_A(w: int, b: int) -> Fraction:
    _check(w, b)
    if w == 0 or b == 0:
        return Fraction(0)
    if w >= b:
        return t_k(b)
    co = _line_coords(w, b)
    k, c = co.k, co.c
    tk = t_k(k)
    if co.even:
        full = 2 * k * alpha(k, k)
        return tk + (full - tk) * _hit_weight(co) - 2 * k * alpha(k, c)
    full = (2 * k + 1) * beta(k, k + 1)
    return tk + (full - tk) * _hit_weight(co) - (2 * k + 1) * beta(k, c)
