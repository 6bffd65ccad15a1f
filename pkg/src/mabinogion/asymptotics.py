"""Large-k approximations and error audits against exact values."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from . import apolicy
from .exact import central_prob_real, to_real
from .mprocess import expected_time_real, expected_time_symmetric_real

EULER_GAMMA = 0.5772156649015329
_LOG4 = math.log(4.0)

#: k up to which audit references come from the exact rational recursions.
EXACT_REFERENCE_LIMIT = 200


@dataclass(frozen=True)
class ApproxReport:
    parameter: int | tuple
    approx: float
    exact: Optional[float] = None

    @property
    def abs_err(self) -> Optional[float]:
        return None if self.exact is None else abs(self.exact - self.approx)

    @property
    def rel_err(self) -> Optional[float]:
        if self.exact is None:
            return None
        if self.exact == 0:
            return math.inf if self.approx else 0.0
        return abs(self.exact - self.approx) / abs(self.exact)

    def to_row(self) -> dict:
        return {
            "parameter": self.parameter if not isinstance(self.parameter, tuple)
            else ":".join(str(p) for p in self.parameter),
            "exact": self.exact,
            "approx": self.approx,
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
        }


def _log_term(k: int) -> float:
    return math.log(k) + _LOG4 + EULER_GAMMA


def approx_T_sym(k: int) -> float:
    """Uncontrolled expected time from (k, k)."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return k / 2 * _log_term(k)


def approx_V_A(k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return 2 * k + math.pi / 4 - math.sqrt(math.pi * k)


def approx_T_A(k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    root = math.sqrt(math.pi * k)
    return (k / 2 + math.pi / 16 - root / 4) * _log_term(k) + 3 * math.pi / 16 - root / 4 - 0.25


def approx_T_skewed(N: int, x: float) -> float:
    """Linear-in-N growth of the expected time when blacks start as a majority fraction x."""
    if not 0.5 < x < 1:
        raise ValueError(f"x must lie in (1/2, 1), got {x}")
    return N / 2 * math.log(1 / (2 * x - 1))


def approx_p(k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return 1 / math.sqrt(math.pi * k)


def skewed_state(N: int, x) -> tuple[int, int]:
    """(w, b) = (floor((1-x) N), ceil(x N)) computed exactly."""
    x = Fraction(str(x)) if isinstance(x, float) else Fraction(x)
    return math.floor((1 - x) * N), math.ceil(x * N)


def policy_a_reference(k_values: Iterable[int]) -> tuple[dict[int, float], dict[int, float]]:
    """Floating v_k, t_k: exact recursions up to the limit, float recursion beyond."""
    ks = sorted(set(k_values))
    v: dict[int, float] = {}
    t: dict[int, float] = {}
    small = [k for k in ks if k <= EXACT_REFERENCE_LIMIT]
    large = [k for k in ks if k > EXACT_REFERENCE_LIMIT]
    if small:
        vs = apolicy.v_sequence(small[-1])
        ts = apolicy.t_sequence(small[-1])
        for k in small:
            v[k], t[k] = to_real(vs[k]), to_real(ts[k])
    if large:
        vr, tr = apolicy.sequences_real(large[-1])
        for k in large:
            v[k], t[k] = vr[k], tr[k]
    return v, t


AUDITS = ("T_sym", "V_A", "T_A", "p", "T_skewed", "ratio_V", "ratio_T")


def audit(which: str, params: Iterable) -> list[ApproxReport]:
    """Per-parameter error reports.

    ``params`` are k values, except for ``T_skewed`` where they are (N, x)
    pairs.  The ratio audits report V^A(k,k)/(2k) and T^A(k,k)/T(k,k)
    against their limit 1.
    """
    params = list(params)
    if which == "T_skewed":
        out = []
        for N, x in params:
            w, b = skewed_state(N, x)
            out.append(ApproxReport((N, str(x)), approx_T_skewed(N, float(Fraction(str(x)))),
                                    expected_time_real(w, b)))
        return out
    if which == "T_sym":
        return [ApproxReport(k, approx_T_sym(k), expected_time_symmetric_real(k)) for k in params]
    if which == "p":
        return [ApproxReport(k, approx_p(k), central_prob_real(k)) for k in params]
    if which in ("V_A", "T_A", "ratio_V", "ratio_T"):
        v, t = policy_a_reference(params)
        if which == "V_A":
            return [ApproxReport(k, approx_V_A(k), v[k]) for k in params]
        if which == "T_A":
            return [ApproxReport(k, approx_T_A(k), t[k]) for k in params]
        if which == "ratio_V":
            return [ApproxReport(k, 1.0, v[k] / (2 * k)) for k in params]
        return [ApproxReport(k, 1.0, t[k] / expected_time_symmetric_real(k)) for k in params]
    raise ValueError(f"unknown audit {which!r}; choose from {', '.join(AUDITS)}")
