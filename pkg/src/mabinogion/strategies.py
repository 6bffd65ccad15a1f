"""Removal strategies and an exact dynamic-programming evaluator.

A strategy maps a live state ``(w, b)`` to a number of white balls to
remove.  Removal happens at time 0 and right after every draw, costs no
draw and no discount.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .exact import binomial
from .recursion import (
    ChainSpec,
    RecursionProblem,
    solve_boundary_all,
    solve_discounted_all,
)

#: Largest total ball count handled by the exact DP evaluator.
DP_LIMIT = 3000


class InvalidStrategy(ValueError):
    pass


class StateSpaceTooLarge(ValueError):
    pass


def parse_rational(text: str | int | float | Fraction) -> Fraction:
    """Accept ``"p/q"``, decimal strings, ints or Fractions; floats via their decimal repr."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, float):
        return Fraction(repr(text))
    return Fraction(str(text).strip())


@dataclass(frozen=True)
class StrategySpec:
    kind: str  # "none" | "policy-A" | "policy-R" | "q-threshold" | "custom"
    q: Optional[Fraction] = None
    custom: Optional[Callable[[int, int], int]] = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("none", "policy-A", "policy-R", "q-threshold", "custom"):
            raise InvalidStrategy(f"unknown strategy kind {self.kind!r}")
        if self.kind == "q-threshold":
            if self.q is None or not 0 < self.q < 1:
                raise InvalidStrategy(f"q must lie in (0, 1), got {self.q}")
        if self.kind == "custom":
            if self.custom is None:
                raise InvalidStrategy("custom strategy needs a removal function")
            for total in range(2, 17):
                for b in range(1, total):
                    self.removal(total - b, b)

    @classmethod
    def none(cls) -> "StrategySpec":
        return cls("none")

    @classmethod
    def policy_a(cls) -> "StrategySpec":
        return cls("policy-A")

    @classmethod
    def policy_r(cls) -> "StrategySpec":
        return cls("policy-R")

    @classmethod
    def q_threshold(cls, q) -> "StrategySpec":
        return cls("q-threshold", q=parse_rational(q))

    @classmethod
    def from_function(cls, fn: Callable[[int, int], int], name: str = "custom") -> "StrategySpec":
        return cls("custom", custom=fn, name=name)

    @classmethod
    def parse(cls, text: str) -> "StrategySpec":
        """``none``, ``A``, ``R`` or ``q:<rational>``."""
        t = text.strip()
        if t.lower() == "none":
            return cls.none()
        if t in ("A", "a"):
            return cls.policy_a()
        if t in ("R", "r"):
            return cls.policy_r()
        if t.lower().startswith("q:"):
            try:
                return cls.q_threshold(t[2:])
            except (ValueError, ZeroDivisionError) as exc:
                raise InvalidStrategy(f"bad q value in {text!r}") from exc
        raise InvalidStrategy(f"cannot parse strategy {text!r}")

    def label(self) -> str:
        if self.kind == "q-threshold":
            return f"q:{self.q}"
        return {"none": "none", "policy-A": "A", "policy-R": "R"}.get(self.kind, self.name or "custom")

    def removal(self, w: int, b: int) -> int:
        """White balls removed at live state (w, b); 0 on absorbed states."""
        if w == 0 or b == 0:
            return 0
        if self.kind == "none":
            return 0
        if self.kind == "policy-A":
            return w - b + 1 if w >= b else 0
        if self.kind == "policy-R":
            return w
        if self.kind == "q-threshold":
            return removal_count(w, b, self.q)
        r = self.custom(w, b)
        if not isinstance(r, int) or not 0 <= r <= w:
            raise InvalidStrategy(f"custom removal at ({w}, {b}) returned {r!r}; need 0 <= r <= {w}")
        return r


def removal_count(w: int, b: int, q: Fraction) -> int:
    """max(w + b - ceil(b/q) + 1, 0), never more than w."""
    q = parse_rational(q)
    return min(max(w + b - math.ceil(b / q) + 1, 0), w)


def phi(k: int, q) -> int:
    """Smallest white count that triggers removal when k blacks are present."""
    q = parse_rational(q)
    if k < 1 or not 0 < q < 1:
        raise ValueError(f"phi needs k >= 1 and 0 < q < 1, got k={k}, q={q}")
    return math.ceil(k * (1 - q) / q)


def p_q(k: int, q) -> Fraction:
    q = parse_rational(q)
    if not Fraction(1, 2) <= q < 1:
        raise ValueError(f"p_q is defined for 1/2 <= q < 1, got {q}")
    m = phi(k + 1, q) + k - 1
    top = binomial(m, k)
    tail = sum(binomial(m, j) for j in range(k, m + 1))
    return Fraction(top, 2 * tail - top)


def v_q_sequence(k_max: int, q) -> dict[int, Fraction]:
    """Expected final blacks at (phi(k), k) under the q-strategy, k = 1..k_max."""
    q = parse_rational(q)
    if not Fraction(1, 2) <= q < 1:
        raise ValueError(f"recursion holds for 1/2 <= q < 1, got {q}")
    out = {1: Fraction(1)}
    v = Fraction(1)
    for k in range(1, k_max):
        p = p_q(k, q)
        v = (1 - p) / (1 + p) * v + (phi(k + 1, q) + k) * 2 * p / (1 + p)
        out[k + 1] = v
    return out


# ---------------------------------------------------------------------------
# exact DP evaluator
# ---------------------------------------------------------------------------


class StrategyEvaluator:
    """Pre-removal values X_N(b) on every line of fixed total N.

    ``quantity`` is ``"final-black"``, ``"time"`` or ``"discounted"``.  For
    the discounted objective pass ``mu`` (per-draw factor ``exp(-mu)``, float
    arithmetic) or an exact rational per-draw ``discount``.
    """

    def __init__(self, strategy: StrategySpec, quantity: str, mu: float | None = None,
                 discount: Fraction | None = None):
        if quantity not in ("final-black", "time", "discounted"):
            raise ValueError(f"unknown quantity {quantity!r}")
        self.strategy = strategy
        self.quantity = quantity
        self.discount = None
        if quantity == "discounted":
            if discount is not None:
                self.discount = parse_rational(discount)
            elif mu is None:
                raise ValueError("discounted quantity needs mu or discount")
            elif mu < 0:
                raise ValueError(f"mu must be nonnegative, got {mu}")
            elif mu == 0:
                self.discount = Fraction(1)
            else:
                self.discount = math.exp(-mu)
        self._bands: dict[int, list] = {}

    def _payoff(self, w: int, b: int):
        return 0 if self.quantity == "time" else b

    def post_removal_value(self, w: int, b: int):
        """Value just before a draw from (w, b), with no removal applied."""
        if w == 0 or b == 0:
            return self._payoff(w, b)
        n = w + b
        X = self.band(n)
        mix = Fraction(w, n) * X[b - 1] + Fraction(b, n) * X[b + 1]
        if self.quantity == "time":
            return 1 + mix
        if self.quantity == "discounted":
            return self.discount * mix
        return mix

    def value(self, w: int, b: int):
        """Value at (w, b) before the time-0 removal."""
        if w < 0 or b < 0 or w + b < 1:
            raise ValueError(f"invalid urn state ({w}, {b})")
        if w == 0 or b == 0:
            return self._payoff(w, b)
        return self.band(w + b)[b]

    def band(self, n: int) -> list:
        if n > DP_LIMIT:
            raise StateSpaceTooLarge(f"total {n} exceeds exact DP limit {DP_LIMIT}")
        if n not in self._bands:
            for m in self._needed_totals(n):
                if m not in self._bands:
                    self._bands[m] = self._solve_band(m)
        return self._bands[n]

    def _needed_totals(self, n: int) -> list[int]:
        needed = {n}
        stack = [n]
        while stack:
            m = stack.pop()
            for b in range(1, m):
                r = self.strategy.removal(m - b, b)
                if r and m - b - r > 0:
                    t = m - r
                    if t not in needed and t not in self._bands:
                        needed.add(t)
                        stack.append(t)
        return sorted(needed)

    def _solve_band(self, n: int) -> list:
        X: list = [None] * (n + 1)
        X[0] = self._payoff(n, 0)
        X[n] = self._payoff(0, n)
        for b in range(1, n):
            r = self.strategy.removal(n - b, b)
            if r:
                X[b] = self.post_removal_value(n - b - r, b)
        known = [b for b in range(n + 1) if X[b] is not None]
        for lo, hi in zip(known, known[1:]):
            if hi - lo < 2:
                continue
            prob = RecursionProblem(
                a=lo, b=hi, p=lambda k: Fraction(n - k, n), xa=X[lo], xb=X[hi],
                r=(lambda k: 1) if self.quantity == "time" else (lambda k: 0),
            )
            if self.quantity == "discounted":
                seg = solve_discounted_all(prob, self.discount)
            else:
                seg = solve_boundary_all(prob)
            X[lo:hi + 1] = seg
        return X


def exact_value_under_strategy(w: int, b: int, strategy: StrategySpec, quantity: str,
                               mu: float | None = None, discount: Fraction | None = None):
    """Expected final blacks, expected draws, or E[exp(-mu H) B_H] from (w, b)."""
    if w + b > DP_LIMIT:
        raise StateSpaceTooLarge(f"total {w + b} exceeds exact DP limit {DP_LIMIT}")
    return StrategyEvaluator(strategy, quantity, mu=mu, discount=discount).value(w, b)


def controlled_chain(strategy: StrategySpec, w: int, b: int, quantity: str = "time") -> tuple[ChainSpec, tuple[int, int]]:
    """Post-removal chain reachable from (w, b), as an oracle input.

    Returns the chain and the post-removal start state.
    """

    def settle(s):
        sw, sb = s
        return (sw - strategy.removal(sw, sb), sb)

    def absorbing(s):
        return s[0] == 0 or s[1] == 0

    def transition(s):
        sw, sb = s
        n = sw + sb
        return [(settle((sw + 1, sb - 1)), Fraction(sw, n)),
                (settle((sw - 1, sb + 1)), Fraction(sb, n))]

    start = settle((w, b))
    seen = {start}
    stack = [start]
    while stack:
        s = stack.pop()
        if absorbing(s):
            continue
        for t, _ in transition(s):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    chain = ChainSpec(
        states=sorted(seen, key=lambda s: (s[0] + s[1], s[1])),
        transition=transition,
        absorbing=absorbing,
        step_cost=lambda s: 1,
        terminal_payoff=lambda s: s[1],
    )
    return chain, start
