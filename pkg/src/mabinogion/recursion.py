"""Second-order boundary-value recursions and an exact absorbing-chain oracle.

``solve_boundary`` handles

    X(k) = p(k) X(k-1) + (1 - p(k)) X(k+1) + r(k),   a < k < b

with X(a), X(b) given, through the closed form obtained by iterating the
first differences Z(k) = X(k) - X(k-1).  All nested products/sums are
accumulated in one forward pass, so a whole band costs O(b - a).

``brute_force_values`` is deliberately unrelated: it assembles the
first-step linear system of an arbitrary finite absorbing chain and runs
sparse Gaussian elimination over the rationals.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Hashable, Iterable, Sequence

Number = Fraction | float | int


class InvalidProbability(ValueError):
    pass


class InvalidDiscount(ValueError):
    pass


class NonAbsorbingChain(ValueError):
    pass


def _zero(_k: int) -> int:
    return 0


@dataclass(frozen=True)
class RecursionProblem:
    a: int
    b: int
    p: Callable[[int], Number]
    xa: Number
    xb: Number
    r: Callable[[int], Number] = _zero

    def __post_init__(self):
        if self.b <= self.a:
            raise ValueError(f"need b > a, got a={self.a}, b={self.b}")


def _checked_p(prob: RecursionProblem, k: int) -> Number:
    pk = prob.p(k)
    if not 0 < pk < 1:
        raise InvalidProbability(f"p({k}) = {pk} is not in (0, 1)")
    return pk


def compensated_cumsum(values: Sequence[float]) -> list[float]:
    """Running sums with Neumaier compensation (prefix analogue of fsum)."""
    out = []
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out.append(total + comp)
    return out


def solve_boundary_all(prob: RecursionProblem) -> list[Number]:
    """Return [X(a), X(a+1), ..., X(b)]."""
    a, b = prob.a, prob.b
    n = b - a
    # pi[i] = prod_{m=1}^{i-1} rho(a+m),  q[i] = sum_j s(a+j) prod_{m=j+1}^{i-1} rho(a+m)
    pis = [1]
    qs = [0]
    for i in range(1, n):
        k = a + i
        pk = _checked_p(prob, k)
        up = 1 - pk
        rho = pk / up
        pis.append(pis[-1] * rho)
        qs.append(rho * qs[-1] + prob.r(k) / up)

    exact = all(isinstance(v, Rational) for v in (*pis, *qs, prob.xa, prob.xb))
    if exact:
        cum_pi, cum_q = [0], [0]
        for v in pis:
            cum_pi.append(cum_pi[-1] + v)
        for v in qs:
            cum_q.append(cum_q[-1] + v)
    else:
        cum_pi = [0.0] + compensated_cumsum([float(v) for v in pis])
        cum_q = [0.0] + compensated_cumsum([float(v) for v in qs])

    xa, xb = prob.xa, prob.xb
    span = xb - xa + cum_q[n]
    denom = cum_pi[n]
    if exact:
        denom = Fraction(denom)
    values = [xa]
    for m in range(1, n):
        values.append(xa - cum_q[m] + cum_pi[m] / denom * span)
    values.append(xb)
    return values


def solve_boundary(prob: RecursionProblem, c: int) -> Number:
    """X(c) for a <= c <= b."""
    if not prob.a <= c <= prob.b:
        raise ValueError(f"c={c} outside [{prob.a}, {prob.b}]")
    if c == prob.a:
        return prob.xa
    if c == prob.b:
        return prob.xb
    return solve_boundary_all(prob)[c - prob.a]


def solve_discounted_all(
    prob: RecursionProblem,
    per_step_discount: Number,
    payoff_left: Number | None = None,
    payoff_right: Number | None = None,
) -> list[Number]:
    """Values of U(k) = d [p U(k-1) + (1-p) U(k+1)] on [a, b] by tridiagonal elimination.

    Boundary values default to ``prob.xa`` / ``prob.xb``; ``prob.r`` is ignored.
    Exact when the discount and all data are rational.
    """
    d = per_step_discount
    if not 0 < d <= 1:
        raise InvalidDiscount(f"per-step discount {d} is not in (0, 1]")
    left = prob.xa if payoff_left is None else payoff_left
    right = prob.xb if payoff_right is None else payoff_right
    a, b = prob.a, prob.b
    if b - a == 1:
        return [left, right]

    exact = isinstance(d, Rational)
    if not exact:
        left, right = float(left), float(right)
    # forward sweep: U(k) = cp[k] U(k+1) + dp[k]
    cps: list[Number] = []
    dps: list[Number] = []
    c_prev, d_prev = 0, left
    for k in range(a + 1, b):
        pk = _checked_p(prob, k)
        if not exact:
            pk = float(pk)
        lower = d * pk
        upper = d * (1 - pk)
        piv = 1 - lower * c_prev
        c_prev = upper / piv
        d_prev = lower * d_prev / piv
        cps.append(c_prev)
        dps.append(d_prev)
    values = [right]
    u = right
    for cp, dp in zip(reversed(cps), reversed(dps)):
        u = cp * u + dp
        values.append(u)
    values.append(left)
    values.reverse()
    return values


def solve_discounted(
    prob: RecursionProblem,
    per_step_discount: Number,
    payoff_left: Number,
    payoff_right: Number,
    c: int,
) -> Number:
    if not prob.a <= c <= prob.b:
        raise ValueError(f"c={c} outside [{prob.a}, {prob.b}]")
    return solve_discounted_all(prob, per_step_discount, payoff_left, payoff_right)[c - prob.a]


# ---------------------------------------------------------------------------
# exact oracle for finite absorbing chains
# ---------------------------------------------------------------------------

State = Hashable


@dataclass
class ChainSpec:
    """A finite chain given by callables; probabilities should be rationals."""

    states: Iterable[State]
    transition: Callable[[State], Sequence[tuple[State, Number]]]
    absorbing: Callable[[State], bool]
    step_cost: Callable[[State], Number] = field(default=lambda s: 1)
    terminal_payoff: Callable[[State], Number] = field(default=lambda s: 0)


def _check_absorbing(order, edges, absorbing):
    reverse: dict[State, list[State]] = {s: [] for s in order}
    for s in order:
        for t in edges[s]:
            reverse[t].append(s)
    seen = {s for s in order if absorbing[s]}
    queue = deque(seen)
    while queue:
        t = queue.popleft()
        for s in reverse[t]:
            if s not in seen:
                seen.add(s)
                queue.append(s)
    stuck = [s for s in order if s not in seen]
    if stuck:
        raise NonAbsorbingChain(f"{len(stuck)} state(s) never reach absorption, e.g. {stuck[0]!r}")


def brute_force_values(chain: ChainSpec, quantity: str) -> dict[State, Number]:
    """Exact first-step solution over all states of ``chain``.

    ``quantity`` is ``"expected-terminal-payoff"`` or ``"expected-total-cost"``.
    """
    if quantity not in ("expected-terminal-payoff", "expected-total-cost"):
        raise ValueError(f"unknown quantity {quantity!r}")
    payoff = quantity == "expected-terminal-payoff"

    order = list(dict.fromkeys(chain.states))
    index = {s: i for i, s in enumerate(order)}
    absorbing = {s: bool(chain.absorbing(s)) for s in order}
    rows: dict[State, list[tuple[State, Number]]] = {}
    edges: dict[State, list[State]] = {}
    for s in order:
        if absorbing[s]:
            edges[s] = []
            continue
        row = list(chain.transition(s))
        total = sum(pr for _, pr in row)
        if total != 1:
            raise InvalidProbability(f"transition probabilities at {s!r} sum to {total}")
        for t, _ in row:
            if t not in index:
                raise ValueError(f"transition from {s!r} leaves the state set ({t!r})")
        rows[s] = row
        edges[s] = [t for t, pr in row if pr != 0]
    _check_absorbing(order, edges, absorbing)

    result: dict[State, Number] = {}
    for s in order:
        if absorbing[s]:
            result[s] = chain.terminal_payoff(s) if payoff else 0

    transient = [s for s in order if not absorbing[s]]
    tindex = {s: i for i, s in enumerate(transient)}
    # sparse rows: A[i] maps column -> coefficient, rhs[i]
    A: list[dict[int, Number]] = []
    rhs: list[Number] = []
    col_rows: dict[int, set[int]] = {i: set() for i in range(len(transient))}
    for i, s in enumerate(transient):
        coef: dict[int, Number] = {i: Fraction(1)}
        const = 0 if payoff else chain.step_cost(s)
        for t, pr in rows[s]:
            if pr == 0:
                continue
            if absorbing[t]:
                const += pr * result[t]
            else:
                j = tindex[t]
                coef[j] = coef.get(j, 0) - pr
        coef = {j: v for j, v in coef.items() if v != 0}
        A.append(coef)
        rhs.append(const)
        for j in coef:
            col_rows[j].add(i)

    n = len(transient)
    for i in range(n):
        row = A[i]
        piv = row.get(i, 0)
        if piv == 0:
            raise ArithmeticError(f"singular first-step system at {transient[i]!r}")
        for j in sorted(col_rows[i]):
            if j <= i:
                continue
            other = A[j]
            f = other[i] / piv
            for col, v in row.items():
                nv = other.get(col, 0) - f * v
                if nv == 0:
                    if col in other:
                        del other[col]
                        col_rows[col].discard(j)
                else:
                    if col not in other:
                        col_rows[col].add(j)
                    other[col] = nv
            rhs[j] -= f * rhs[i]
    x: list[Number] = [0] * n
    for i in range(n - 1, -1, -1):
        row = A[i]
        acc = rhs[i]
        for col, v in row.items():
            if col > i:
                acc -= v * x[col]
        x[i] = acc / row[i]
    for s, i in tindex.items():
        result[s] = x[i]
    return result
