"""Seedable, batch-parallel Monte Carlo for the controlled urn.

Runs are cut into fixed-size batches; batch ``i`` draws from its own
xoshiro256** stream seeded by ``SeedSequence(seed, spawn_key=(i,))``.  Per-run
results land in preallocated arrays and are reduced in run order, so a
summary is bit-identical for any thread count.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numba
import numpy as np

if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "omp"

from . import _kernels as K
from .asymptotics import skewed_state
from .mprocess import UrnState, conditional_up_probs
from .strategies import StrategySpec, parse_rational

log = logging.getLogger(__name__)

DEFAULT_BATCH = 1024
TABLE1_N = (200, 2000, 20000, 200000, 2000000)
TABLE1_X = ("0.5", "0.505", "0.55", "0.6", "0.75")
#: Largest total for which a custom strategy is tabulated for the compiled loop.
CUSTOM_TABLE_LIMIT = 4000


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    start: UrnState
    strategy: StrategySpec = field(default_factory=StrategySpec.none)
    runs: int = 10_000
    seed: int = 0
    mu: Optional[float] = None
    conditional: bool = False
    record_paths: bool = False
    batch_size: int = DEFAULT_BATCH

    def __post_init__(self):
        w, b = self.start
        if w < 0 or b < 0 or w + b < 1:
            raise InvalidConfig(f"invalid start state {tuple(self.start)}")
        if self.runs < 1:
            raise InvalidConfig(f"runs must be positive, got {self.runs}")
        if self.batch_size < 1:
            raise InvalidConfig(f"batch_size must be positive, got {self.batch_size}")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.mu is not None and self.mu < 0:
            raise InvalidConfig(f"mu must be nonnegative, got {self.mu}")
        if self.conditional:
            if self.strategy.kind != "none":
                raise InvalidConfig("conditional sampling is only defined for the uncontrolled chain")
            if b < 1:
                raise InvalidConfig("conditioning on all-black needs at least one black ball")


@dataclass(frozen=True)
class SimulationSummary:
    runs: int
    mean_H: float
    stderr_H: float
    mean_final_black: float
    stderr_final_black: float
    prob_all_black: float
    mean_discounted: Optional[float] = None
    stderr_discounted: Optional[float] = None

    def to_row(self) -> dict:
        row = {
            "runs": self.runs,
            "mean_H": self.mean_H,
            "stderr_H": self.stderr_H,
            "mean_final_black": self.mean_final_black,
            "stderr_final_black": self.stderr_final_black,
            "prob_all_black": self.prob_all_black,
        }
        if self.mean_discounted is not None:
            row["mean_discounted"] = self.mean_discounted
            row["stderr_discounted"] = self.stderr_discounted
        return row


@dataclass(frozen=True)
class RawRuns:
    """Per-run draws and final black counts, in run order."""

    H: np.ndarray
    final_black: np.ndarray
    total: int


PathRecord = list[tuple[int, int]]


def set_threads(threads: Optional[int] = None) -> int:
    """Cap numba's worker count (default from MAB_THREADS, else all cores)."""
    if threads is None:
        env = os.environ.get("MAB_THREADS")
        threads = int(env) if env else numba.config.NUMBA_NUM_THREADS
    threads = max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(threads)
    return threads


def batch_states(seed: int, n_batches: int) -> np.ndarray:
    out = np.empty((n_batches, 4), dtype=np.uint64)
    for i in range(n_batches):
        out[i] = np.random.SeedSequence(seed, spawn_key=(i,)).generate_state(4, np.uint64)
    return out


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    mean = math.fsum(values.tolist()) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum(((values - mean) ** 2).tolist()) / (n - 1)
    return mean, math.sqrt(var / n)


def _strategy_args(strategy: StrategySpec, total: int):
    empty = np.zeros((1, 1), dtype=np.int64)
    if strategy.kind == "none":
        return K.NONE, 1, 1, empty
    if strategy.kind == "policy-A":
        return K.POLICY_A, 1, 2, empty
    if strategy.kind == "policy-R":
        return K.POLICY_R, 1, 1, empty
    if strategy.kind == "q-threshold":
        q = strategy.q
        return K.Q_THRESHOLD, q.numerator, q.denominator, empty
    # custom: tabulate on every state with at most `total` balls
    if total > CUSTOM_TABLE_LIMIT:
        raise InvalidConfig(f"custom strategies are tabulated only up to {CUSTOM_TABLE_LIMIT} balls")
    table = np.zeros((total + 1, total + 1), dtype=np.int64)
    for n in range(2, total + 1):
        for b in range(1, n):
            table[n - b, b] = strategy.removal(n - b, b)
    return K.TABLE, 1, 1, table


def simulate_raw(config: SimConfig) -> RawRuns:
    w, b = config.start
    total = w + b
    runs = config.runs
    n_batches = -(-runs // config.batch_size)
    states = batch_states(config.seed, n_batches)
    out_h = np.zeros(runs, dtype=np.int64)
    if config.conditional:
        if w == 0:
            return RawRuns(out_h, np.full(runs, total, dtype=np.int64), total)
        up = conditional_up_probs(total)
        K.simulate_conditional_batches(b, total, up, states, config.batch_size, runs, out_h)
        return RawRuns(out_h, np.full(runs, total, dtype=np.int64), total)
    out_b = np.zeros(runs, dtype=np.int64)
    kind, qn, qd, table = _strategy_args(config.strategy, total)
    K.simulate_batches(w, b, kind, qn, qd, table, states, config.batch_size, runs, out_h, out_b)
    return RawRuns(out_h, out_b, total)


def summarize(raw: RawRuns, mu: Optional[float] = None) -> SimulationSummary:
    mean_h, se_h = _mean_stderr(raw.H.astype(float))
    fb = raw.final_black.astype(float)
    mean_b, se_b = _mean_stderr(fb)
    # absorption with any black left means the whites died out
    p_black = float(np.count_nonzero(raw.final_black > 0)) / raw.H.size
    md = sd = None
    if mu is not None:
        md, sd = _mean_stderr(discounted_payoffs(raw, mu))
    return SimulationSummary(raw.H.size, mean_h, se_h, mean_b, se_b, p_black, md, sd)


def discounted_payoffs(raw: RawRuns, mu: float) -> np.ndarray:
    """exp(-mu H) * B_H per run."""
    return np.exp(-mu * raw.H.astype(float)) * raw.final_black


def simulate(config: SimConfig) -> SimulationSummary:
    return summarize(simulate_raw(config), config.mu)


def derive_seed(seed: int, *key: int) -> int:
    """Independent 64-bit child seed for a sub-experiment (table cell, q value, ...)."""
    return int(np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class Table1Cell:
    N: int
    x: str
    white: int
    black: int
    summary: SimulationSummary


def simulate_table1(
    runs: int = 10_000,
    seed: int = 0,
    n_values: Sequence[int] = TABLE1_N,
    x_values: Sequence[str] = TABLE1_X,
    runs_for: Optional[dict[int, int]] = None,
) -> list[Table1Cell]:
    """Policy-A absorption times on the (N, x) grid; b = ceil(xN), w = floor((1-x)N).

    ``runs_for`` maps N to a reduced run count for expensive rows.  Each cell
    gets a child seed keyed by its position in the full grid, so subsets
    reproduce the corresponding cells of the full table.
    """
    cells = []
    for N in n_values:
        for x in x_values:
            xq = parse_rational(str(x))
            key = (N, xq.numerator, xq.denominator)
            w, b = skewed_state(N, xq)
            n_runs = (runs_for or {}).get(N, runs)
            cfg = SimConfig(UrnState(w, b), StrategySpec.policy_a(), n_runs, derive_seed(seed, *key))
            log.info("table1 cell N=%d x=%s runs=%d", N, x, n_runs)
            cells.append(Table1Cell(N, str(x), w, b, simulate(cfg)))
    return cells


@dataclass(frozen=True)
class ScanCell:
    q: Fraction
    mu: float
    summary: SimulationSummary


def scan_q(
    start: UrnState,
    q_values: Iterable,
    runs: int,
    mu_values: Iterable[float] = (0.0,),
    seed: int = 0,
) -> list[ScanCell]:
    """One simulation per q; every mu is evaluated on the same trajectories."""
    mus = [float(m) for m in mu_values]
    out = []
    for i, q in enumerate(q_values):
        strat = StrategySpec.q_threshold(q)
        raw = simulate_raw(SimConfig(UrnState(*start), strat, runs, derive_seed(seed, i)))
        for mu in mus:
            out.append(ScanCell(strat.q, mu, summarize(raw, mu)))
    return out


def sample_paths(
    start: UrnState,
    n_paths: int,
    seed: int = 0,
    strategy: Optional[StrategySpec] = None,
    conditional: bool = False,
) -> list[PathRecord]:
    """Full black-count trajectories as (step, black) pairs."""
    strategy = strategy or StrategySpec.none()
    cfg = SimConfig(UrnState(*start), strategy, n_paths, seed, conditional=conditional, record_paths=True)
    w, b = cfg.start
    total = w + b
    states = batch_states(seed, n_paths)
    up = conditional_up_probs(total) if conditional and w > 0 else None
    kind, qn, qd, table = _strategy_args(strategy, total)
    paths = []
    for i in range(n_paths):
        st = states[i].copy()
        if up is not None:
            arr = K.record_conditional_path(b, total, up, st)
        elif conditional:
            arr = np.array([b])
        else:
            arr = K.record_path(w, b, kind, qn, qd, table, st)
        paths.append([(step, int(v)) for step, v in enumerate(arr)])
    return paths
