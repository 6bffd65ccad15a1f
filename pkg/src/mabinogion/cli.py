"""Command-line front end.

Every subcommand prints an envelope of records as CSV (default) or JSON.
Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

from . import apolicy, asymptotics, identities, mprocess, strategies
from .exact import EXACT_LIMIT, to_real
from .mprocess import UrnState
from .recursion import ChainSpec, brute_force_values

log = logging.getLogger("mabinogion")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def fraction_text(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _cell(v: Any) -> Any:
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return fraction_text(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return repr(v)
        return float(f"{v:.15g}")
    return str(v)


@dataclass
class OutputEnvelope:
    command: str
    parameters: dict
    rows: list[dict] = field(default_factory=list)
    format: str = "csv"

    def render(self) -> str:
        rows = [{k: _cell(v) for k, v in r.items()} for r in self.rows]
        if self.format == "json":
            params = {k: _cell(v) for k, v in self.parameters.items()}
            return json.dumps({"command": self.command, "parameters": params, "rows": rows}, indent=2) + "\n"
        headers: list[str] = []
        for r in rows:
            for k in r:
                if k not in headers:
                    headers.append(k)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=headers, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in headers})
        return buf.getvalue()


def parse_csv_rows(text: str) -> list[dict]:
    """Inverse of the CSV rendering (used to compare CSV and JSON output)."""

    def conv(s: str):
        if s == "":
            return None
        if s in ("True", "False"):
            return s == "True"
        for typ in (int, float):
            try:
                return typ(s)
            except ValueError:
                pass
        return s

    return [{k: conv(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def rational(text: str) -> Fraction:
    try:
        return strategies.parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def nonneg_int(text: str) -> int:
    v = rational(text)
    if v.denominator != 1 or v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return int(v)


def positive_int(text: str) -> int:
    v = nonneg_int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def grid(text: str) -> list[Fraction]:
    """``start:stop:count`` (inclusive, evenly spaced) or a comma list of rationals."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid must be start:stop:count, got {text!r}")
        a, b, n = rational(parts[0]), rational(parts[1]), positive_int(parts[2])
        if n == 1:
            return [a]
        return [a + (b - a) * i / (n - 1) for i in range(n)]
    return [rational(t) for t in text.split(",") if t.strip()]


def _strategy(text: str) -> strategies.StrategySpec:
    try:
        return strategies.StrategySpec.parse(text)
    except strategies.InvalidStrategy as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_state(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("-w", "--white", type=nonneg_int, required=required)
    p.add_argument("-b", "--black", type=nonneg_int, required=required)


def _state(args) -> UrnState:
    s = UrnState(args.white, args.black)
    if s.total < 1:
        raise UsageError("the urn must contain at least one ball")
    return s


def _params(args) -> dict:
    out = {}
    for k, v in vars(args).items():
        # output must not depend on logging or thread count
        if k in ("func", "format", "command", "verbose", "threads"):
            continue
        if isinstance(v, list):
            v = ",".join(str(x) for x in v)
        elif isinstance(v, strategies.StrategySpec):
            v = v.label()
        out[k] = v
    return out


# ---------------------------------------------------------------------------
# exact
# ---------------------------------------------------------------------------


def _value_row(process, state, quantity, value) -> dict:
    if isinstance(value, (Fraction, int)):
        return {"process": process, "white": state.white, "black": state.black, "quantity": quantity,
                "value": fraction_text(value), "decimal": to_real(Fraction(value))}
    return {"process": process, "white": state.white, "black": state.black, "quantity": quantity,
            "value": None, "decimal": float(value)}


def _split_quantity(q: str) -> tuple[str, Optional[float]]:
    if q.startswith("discounted:"):
        try:
            mu = float(rational(q.split(":", 1)[1]))
        except argparse.ArgumentTypeError as exc:
            raise UsageError(str(exc)) from exc
        if mu < 0:
            raise UsageError("mu must be nonnegative")
        return "discounted", mu
    if q in ("time", "final-black", "absorb-prob"):
        return q, None
    raise UsageError(f"unknown quantity {q!r}")


def cmd_exact(args) -> OutputEnvelope:
    state = _state(args)
    w, b = state
    quantity, mu = _split_quantity(args.quantity)
    proc = args.process
    big = state.total > EXACT_LIMIT

    if proc == "conditional":
        if quantity != "time":
            raise UsageError("the conditioned process supports only --quantity time")
        if b < 1:
            raise UsageError("conditioning on all-black needs at least one black ball")
        value = mprocess.conditional_expected_time(w, b)
    elif quantity == "absorb-prob":
        if proc != "m":
            raise UsageError("absorb-prob is available for --process m only")
        value = mprocess.absorb_prob_black_real(w, b) if big else mprocess.absorb_prob_black(w, b)
    elif quantity == "discounted":
        strat = {"m": strategies.StrategySpec.none(), "a": strategies.StrategySpec.policy_a()}.get(proc)
        if strat is None:
            strat = _process_strategy(proc)
        value = strategies.exact_value_under_strategy(w, b, strat, "discounted", mu=mu)
    elif proc == "m":
        if quantity == "time":
            value = mprocess.expected_time_real(w, b) if big else mprocess.expected_time(w, b)
        else:
            value = mprocess.expected_final_black_real(w, b) if big else mprocess.expected_final_black(w, b)
    elif proc == "a":
        value = apolicy.expected_time_A(w, b) if quantity == "time" else apolicy.expected_final_black_A(w, b)
    else:
        value = strategies.exact_value_under_strategy(w, b, _process_strategy(proc), quantity)
    return OutputEnvelope("exact", _params(args), [_value_row(proc, state, args.quantity, value)], args.format)


def _process_strategy(proc: str) -> strategies.StrategySpec:
    if proc.lower().startswith("q:"):
        try:
            return strategies.StrategySpec.parse(proc)
        except strategies.InvalidStrategy as exc:
            raise UsageError(str(exc)) from exc
    if proc in ("R", "r"):
        return strategies.StrategySpec.policy_r()
    raise UsageError(f"unknown process {proc!r}; use m, a, conditional or q:<rational>")


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def _sim():
    from . import simulator  # numba import is slow; only pay for it when simulating

    return simulator


def _table1_rows(cells) -> list[dict]:
    rows = []
    for c in cells:
        row = {"N": c.N, "x": c.x, "white": c.white, "black": c.black}
        row.update(c.summary.to_row())
        rows.append(row)
    return rows


def _scan_rows(cells) -> list[dict]:
    rows = []
    for c in cells:
        row = {"q": fraction_text(c.q), "q_decimal": to_real(c.q), "mu": c.mu}
        row.update(c.summary.to_row())
        rows.append(row)
    return rows


def _q_values(values: Sequence[Fraction]) -> list[Fraction]:
    kept = [q for q in values if 0 < q < 1]
    dropped = [q for q in values if not 0 < q < 1]
    if dropped:
        log.warning("dropping q values outside (0, 1): %s", ", ".join(map(str, dropped)))
    if not kept:
        raise UsageError("no q value inside (0, 1)")
    return kept


def _mu_values(arg) -> list[float]:
    vals = [float(m) for m in (arg or [Fraction(0)])]
    if any(m < 0 for m in vals):
        raise UsageError("mu must be nonnegative")
    return vals


def _parse_reduced(text: Optional[str]) -> dict[int, int]:
    out = {}
    if not text:
        return out
    for part in text.split(","):
        try:
            n, r = part.split("=")
            out[int(n)] = int(r)
        except ValueError as exc:
            raise UsageError(f"--reduced-runs expects N=runs pairs, got {part!r}") from exc
    return out


def cmd_simulate(args) -> OutputEnvelope:
    sim = _sim()
    sim.set_threads(args.threads)
    if getattr(args, "table1", False):
        cells = sim.simulate_table1(
            runs=args.runs, seed=args.seed,
            n_values=args.n_values or sim.TABLE1_N,
            x_values=[str(x) for x in args.x_values] if args.x_values else sim.TABLE1_X,
            runs_for=_parse_reduced(args.reduced_runs),
        )
        return OutputEnvelope("table1", _params(args), _table1_rows(cells), args.format)
    state = _state(args)
    if getattr(args, "scan_q", None):
        cells = sim.scan_q(state, _q_values(args.scan_q), args.runs, _mu_values(args.mu), args.seed)
        return OutputEnvelope("scan-q", _params(args), _scan_rows(cells), args.format)
    mus = _mu_values(args.mu) if args.mu else [None]
    if len(mus) != 1:
        raise UsageError("a single simulation takes one --mu value; use --scan-q for grids")
    try:
        cfg = sim.SimConfig(state, args.strategy, args.runs, args.seed, mu=mus[0],
                            conditional=args.conditional, batch_size=args.batch_size)
    except sim.InvalidConfig as exc:
        raise UsageError(str(exc)) from exc
    row = {"white": state.white, "black": state.black, "strategy": args.strategy.label(),
           "conditional": args.conditional, "seed": args.seed}
    row.update(sim.simulate(cfg).to_row())
    return OutputEnvelope("simulate", _params(args), [row], args.format)


def cmd_scan_q(args) -> OutputEnvelope:
    sim = _sim()
    sim.set_threads(args.threads)
    cells = sim.scan_q(_state(args), _q_values(args.q), args.runs, _mu_values(args.mu), args.seed)
    return OutputEnvelope("scan-q", _params(args), _scan_rows(cells), args.format)


def cmd_table1(args) -> OutputEnvelope:
    args.table1 = True
    return cmd_simulate(args)


def cmd_paths(args) -> OutputEnvelope:
    sim = _sim()
    state = _state(args)
    try:
        paths = sim.sample_paths(state, args.n_paths, args.seed, args.strategy, args.conditional)
    except sim.InvalidConfig as exc:
        raise UsageError(str(exc)) from exc
    rows = [{"path": i, "step": step, "black": black}
            for i, path in enumerate(paths) for step, black in path]
    return OutputEnvelope("paths", _params(args), rows, args.format)


# ---------------------------------------------------------------------------
# verification and audits
# ---------------------------------------------------------------------------


def m_chain(N: int, quantity: str) -> dict[int, Fraction]:
    """Brute-force values on the uncontrolled line of total N, keyed by black count."""
    chain = ChainSpec(
        states=range(N + 1),
        transition=lambda b: [(b - 1, Fraction(N - b, N)), (b + 1, Fraction(b, N))],
        absorbing=lambda b: b in (0, N),
        step_cost=lambda b: 1,
        terminal_payoff=lambda b: b,
    )
    return brute_force_values(chain, quantity)


def oracle_checks(max_total: int) -> list[dict]:
    rows = []
    for N in range(1, max_total + 1):
        states = [(N - b, b) for b in range(N + 1)]
        payoff = m_chain(N, "expected-terminal-payoff")
        cost = m_chain(N, "expected-total-cost")
        ok_v = all(mprocess.expected_final_black(w, b) == payoff[b] for w, b in states)
        ok_p = all(mprocess.absorb_prob_black(w, b) * N == payoff[b] for w, b in states)
        ok_t = all(mprocess.expected_time(w, b) == cost[b] for w, b in states)
        rows.append({"check": "m_final_black", "total": N, "states": len(states), "holds": ok_v})
        rows.append({"check": "m_absorb_prob", "total": N, "states": len(states), "holds": ok_p})
        rows.append({"check": "m_time", "total": N, "states": len(states), "holds": ok_t})
    ev_v = strategies.StrategyEvaluator(strategies.StrategySpec.policy_a(), "final-black")
    ev_t = strategies.StrategyEvaluator(strategies.StrategySpec.policy_a(), "time")
    for N in range(1, max_total + 1):
        states = [(N - b, b) for b in range(N + 1)]
        ok_v = all(apolicy.expected_final_black_A(w, b) == ev_v.value(w, b) for w, b in states)
        ok_t = all(apolicy.expected_time_A(w, b) == ev_t.value(w, b) for w, b in states)
        rows.append({"check": "a_final_black", "total": N, "states": len(states), "holds": ok_v})
        rows.append({"check": "a_time", "total": N, "states": len(states), "holds": ok_t})
    return rows


def asymptotic_checks(k_max: int) -> list[dict]:
    rows = []
    ks = list(range(4, k_max + 1))
    for which in ("V_A", "T_A"):
        reports = asymptotics.audit(which, ks)
        max_abs = max(r.abs_err for r in reports) if reports else 0.0
        rel = [r.rel_err for r in reports if r.parameter > 25]
        max_rel = max(rel) if rel else 0.0
        rows.append({"check": f"{which}_abs_err_lt_0.1", "k_range": f"4..{k_max}",
                     "max_err": max_abs, "holds": max_abs < 0.1})
        rows.append({"check": f"{which}_rel_err_lt_0.001", "k_range": f"26..{k_max}",
                     "max_err": max_rel, "holds": max_rel < 0.001})
    return rows


def cmd_verify(args) -> tuple[OutputEnvelope, int]:
    run_all = not (args.identities or args.oracle or args.asymptotics)
    rows: list[dict] = []
    if args.identities or run_all:
        for r in identities.verify_identities(args.max_n):
            rows.append({"check": r.name, "n": r.n, "lhs": r.lhs, "rhs": r.rhs, "holds": r.holds})
    if args.oracle or run_all:
        rows.extend(oracle_checks(args.max_total))
    if args.asymptotics or run_all:
        rows.extend(asymptotic_checks(args.k_max))
    failed = sum(not r["holds"] for r in rows)
    return OutputEnvelope("verify", _params(args), rows, args.format), (1 if failed else 0)


def cmd_audit(args) -> OutputEnvelope:
    if args.which == "T_skewed":
        xs = args.x_values or [Fraction(3, 4)]
        ns = args.n_values or [200, 2000, 20000]
        params = [(N, x) for N in ns for x in xs]
        for _, x in params:
            if not Fraction(1, 2) < x < 1:
                raise UsageError("T_skewed needs 1/2 < x < 1")
    else:
        params = args.k_list or list(range(args.k_min, args.k_max + 1))
    reports = asymptotics.audit(args.which, params)
    rows = [dict(quantity=args.which, **r.to_row()) for r in reports]
    return OutputEnvelope("audit", _params(args), rows, args.format)


def cmd_oracle(args) -> OutputEnvelope:
    quantity = {"time": "expected-total-cost", "final-black": "expected-terminal-payoff"}[args.quantity]
    N = args.total
    rows = []
    if args.process == "m":
        vals = m_chain(N, quantity)
        for b in range(N + 1):
            rows.append({"white": N - b, "black": b, "value": Fraction(vals[b]), "decimal": to_real(vals[b])})
    elif args.process == "conditional":
        if args.quantity != "time":
            raise UsageError("the conditioned process supports only --quantity time")
        chain = ChainSpec(range(1, N + 1), lambda n: mprocess.conditional_transition(n, N),
                          lambda n: n == N, step_cost=lambda n: 1)
        vals = brute_force_values(chain, quantity)
        for b in range(1, N + 1):
            rows.append({"white": N - b, "black": b, "value": Fraction(vals[b]), "decimal": to_real(vals[b])})
    else:
        strat = strategies.StrategySpec.policy_a() if args.process == "a" else _process_strategy(args.process)
        for b in range(N + 1):
            chain, start = strategies.controlled_chain(strat, N - b, b)
            vals = brute_force_values(chain, quantity)
            rows.append({"white": N - b, "black": b, "value": Fraction(vals[start]), "decimal": to_real(vals[start])})
    return OutputEnvelope("oracle", _params(args), rows, args.format)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--runs", type=positive_int, default=10_000)
    p.add_argument("--seed", type=nonneg_int, default=0)
    p.add_argument("--threads", type=positive_int, default=None,
                   help="worker threads (default: MAB_THREADS or all cores)")


def _add_table1_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-values", type=lambda s: [positive_int(t) for t in s.split(",")], default=None)
    p.add_argument("--x-values", type=grid, default=None)
    p.add_argument("--reduced-runs", default=None, help="per-N run counts, e.g. 200000=1000,2000000=100")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mabinogion", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact expected values")
    _add_state(p)
    p.add_argument("--process", default="m", help="m | a | conditional | q:<rational>")
    p.add_argument("--quantity", default="time",
                   help="time | final-black | absorb-prob | discounted:<mu>")
    _add_common(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="Monte Carlo estimates")
    _add_state(p, required=False)
    p.add_argument("--strategy", type=_strategy, default=strategies.StrategySpec.none())
    p.add_argument("--mu", type=grid, default=None)
    p.add_argument("--conditional", action="store_true")
    p.add_argument("--batch-size", type=positive_int, default=1024)
    p.add_argument("--table1", action="store_true", help="run the (N, x) Policy-A grid")
    p.add_argument("--scan-q", type=grid, default=None, help="q grid start:stop:count")
    _add_table1_flags(p)
    _add_sim_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan-q", help="q-strategy scan over q and mu")
    _add_state(p)
    p.add_argument("--q", type=grid, required=True)
    p.add_argument("--mu", type=grid, default=None)
    _add_sim_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_scan_q)

    p = sub.add_parser("table1", help="Policy-A absorption-time grid")
    _add_table1_flags(p)
    _add_sim_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("paths", help="sample trajectories of the black count")
    _add_state(p)
    p.add_argument("--n-paths", type=positive_int, default=5)
    p.add_argument("--seed", type=nonneg_int, default=0)
    p.add_argument("--strategy", type=_strategy, default=strategies.StrategySpec.none())
    p.add_argument("--conditional", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("verify", help="exact identity, oracle and asymptotic checks")
    p.add_argument("--identities", action="store_true")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--asymptotics", action="store_true")
    p.add_argument("--max-n", type=positive_int, default=200)
    p.add_argument("--max-total", type=positive_int, default=30)
    p.add_argument("--k-max", type=positive_int, default=200)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("audit", help="asymptotic approximation errors")
    p.add_argument("--which", choices=asymptotics.AUDITS, default="V_A")
    p.add_argument("--k-min", type=positive_int, default=1)
    p.add_argument("--k-max", type=positive_int, default=200)
    p.add_argument("--k-list", type=lambda s: [positive_int(t) for t in s.split(",")], default=None)
    p.add_argument("--n-values", type=lambda s: [positive_int(t) for t in s.split(",")], default=None)
    p.add_argument("--x-values", type=grid, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("oracle", help="brute-force linear-system values on one total")
    p.add_argument("--process", default="m", help="m | a | conditional | q:<rational>")
    p.add_argument("--total", "-N", type=positive_int, required=True)
    p.add_argument("--quantity", choices=("time", "final-black"), default="time")
    _add_common(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command == "simulate" and not (args.table1 or (args.white is not None and args.black is not None)):
        parser.error("simulate needs -w and -b unless --table1 is given")
    try:
        result = args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"mabinogion {args.command}: error: {exc}", file=sys.stderr)
        return 2
    code = 0
    if isinstance(result, tuple):
        result, code = result
    sys.stdout.write(result.render())
    return code


if __name__ == "__main__":
    sys.exit(main())
