import math
from fractions import Fraction

import numpy as np
import numba
import pytest

from mabinogion.apolicy import t_k
from mabinogion.exact import to_real
from mabinogion.mprocess import UrnState, absorb_prob_black, expected_time_symmetric
from mabinogion.simulator import (
    InvalidConfig,
    SimConfig,
    derive_seed,
    sample_paths,
    scan_q,
    set_threads,
    simulate,
    simulate_raw,
    simulate_table1,
    summarize,
)
from mabinogion.strategies import StrategySpec


def within(summary_mean, stderr, exact, z=4.0):
    return abs(summary_mean - exact) <= z * stderr


def test_config_validation():
    for kwargs in (dict(start=UrnState(0, 0)), dict(start=UrnState(1, 1), runs=0),
                   dict(start=UrnState(1, 1), seed=-1), dict(start=UrnState(1, 1), mu=-0.1),
                   dict(start=UrnState(1, 1), batch_size=0),
                   dict(start=UrnState(1, 1), conditional=True, strategy=StrategySpec.policy_a()),
                   dict(start=UrnState(3, 0), conditional=True)):
        with pytest.raises(InvalidConfig):
            SimConfig(**kwargs)


def test_deterministic_across_threads():
    cfg = SimConfig(UrnState(30, 30), StrategySpec.policy_a(), runs=5000, seed=11, mu=0.01, batch_size=64)
    before = set_threads(1)
    try:
        one = simulate(cfg)
        set_threads(numba.config.NUMBA_NUM_THREADS)
        many = simulate(cfg)
    finally:
        set_threads()
    assert one == many
    assert simulate(cfg) == one
    assert before == 1


def test_seed_changes_result():
    base = SimConfig(UrnState(10, 10), runs=2000, seed=1)
    other = SimConfig(UrnState(10, 10), runs=2000, seed=2)
    assert not np.array_equal(simulate_raw(base).H, simulate_raw(other).H)


def test_prefix_stable_across_runs():
    # runs live in fixed batches, so a longer experiment extends a shorter one
    short = simulate_raw(SimConfig(UrnState(5, 7), runs=1024, seed=3))
    long = simulate_raw(SimConfig(UrnState(5, 7), runs=3000, seed=3))
    assert np.array_equal(short.H, long.H[:1024])


def test_absorbed_start():
    s = simulate(SimConfig(UrnState(0, 4), runs=100))
    assert s.mean_H == 0 and s.stderr_H == 0 and s.mean_final_black == 4 and s.prob_all_black == 1
    s = simulate(SimConfig(UrnState(4, 0), runs=100))
    assert s.mean_final_black == 0 and s.prob_all_black == 0


def test_policy_r_is_immediate():
    s = simulate(SimConfig(UrnState(7, 3), StrategySpec.policy_r(), runs=500, mu=1.0))
    assert s.mean_H == 0 and s.mean_final_black == 3 and s.mean_discounted == 3


@pytest.mark.parametrize("w,b", [(1, 2), (3, 5), (10, 10), (12, 4)])
def test_absorb_black_frequency(w, b):
    p = to_real(absorb_prob_black(w, b))
    s = simulate(SimConfig(UrnState(w, b), runs=100_000, seed=5))
    se = math.sqrt(p * (1 - p) / s.runs)
    assert within(s.prob_all_black, se, p)


@pytest.mark.parametrize("k", [2, 10, 50])
def test_policy_a_time(k):
    s = simulate(SimConfig(UrnState(k, k), StrategySpec.policy_a(), runs=100_000, seed=7))
    assert within(s.mean_H, s.stderr_H, to_real(t_k(k)))


@pytest.mark.parametrize("k", [1, 5, 20])
def test_conditional_time(k):
    s = simulate(SimConfig(UrnState(k, k), runs=100_000, seed=9, conditional=True))
    assert within(s.mean_H, s.stderr_H, to_real(expected_time_symmetric(k)))
    assert s.prob_all_black == 1


def test_zero_discount_equals_final_black():
    raw = simulate_raw(SimConfig(UrnState(6, 9), StrategySpec.q_threshold("2/3"), runs=3000))
    s = summarize(raw, 0.0)
    assert s.mean_discounted == s.mean_final_black
    assert s.stderr_discounted == s.stderr_final_black


def test_discounted_bounded_by_final_black():
    raw = simulate_raw(SimConfig(UrnState(6, 9), StrategySpec.policy_a(), runs=3000))
    s = summarize(raw, 0.2)
    assert s.mean_discounted < s.mean_final_black


def test_summary_invariants():
    s = simulate(SimConfig(UrnState(8, 8), StrategySpec.policy_a(), runs=4000))
    assert 0 <= s.prob_all_black <= 1
    assert s.mean_final_black <= 16
    raw = simulate_raw(SimConfig(UrnState(8, 8), StrategySpec.policy_a(), runs=4000))
    assert s.stderr_H == pytest.approx(np.std(raw.H, ddof=1) / math.sqrt(4000), rel=1e-12)


def test_custom_strategy_matches_builtin():
    custom = StrategySpec.from_function(lambda w, b: w - b + 1 if w >= b else 0)
    a = simulate_raw(SimConfig(UrnState(9, 9), StrategySpec.policy_a(), runs=2000, seed=4))
    c = simulate_raw(SimConfig(UrnState(9, 9), custom, runs=2000, seed=4))
    assert np.array_equal(a.H, c.H) and np.array_equal(a.final_black, c.final_black)


@pytest.mark.parametrize("strategy", [StrategySpec.none(), StrategySpec.policy_a(), StrategySpec.q_threshold("3/4")],
                         ids=lambda s: s.label())
def test_paths(strategy):
    total = 24
    for path in sample_paths(UrnState(12, 12), 30, seed=2, strategy=strategy):
        steps = [s for s, _ in path]
        blacks = [b for _, b in path]
        assert steps == list(range(len(path)))
        assert all(abs(x - y) == 1 for x, y in zip(blacks, blacks[1:]))
        # whites can only shrink under removal, so the terminal total may drop
        assert blacks[-1] == 0 or blacks[-1] <= total
        if strategy.kind == "none":
            assert blacks[-1] in (0, total)


def test_conditional_paths_end_all_black():
    for path in sample_paths(UrnState(10, 5), 20, seed=1, conditional=True):
        blacks = [b for _, b in path]
        assert blacks[-1] == 15 and min(blacks) >= 1
        assert all(abs(x - y) == 1 for x, y in zip(blacks, blacks[1:]))


def test_paths_reproducible():
    assert sample_paths(UrnState(5, 5), 5, seed=8) == sample_paths(UrnState(5, 5), 5, seed=8)


def test_scan_q_shares_trajectories():
    cells = scan_q(UrnState(10, 10), ["1/2", "3/4"], runs=500, mu_values=[0.0, 0.05], seed=3)
    assert [(c.q, c.mu) for c in cells] == [(Fraction(1, 2), 0.0), (Fraction(1, 2), 0.05),
                                            (Fraction(3, 4), 0.0), (Fraction(3, 4), 0.05)]
    assert cells[0].summary.mean_H == cells[1].summary.mean_H


def test_table1_subset_reproduces_cells():
    full = simulate_table1(runs=300, seed=0, n_values=[200], x_values=["0.5", "0.75"])
    part = simulate_table1(runs=300, seed=0, n_values=[200], x_values=["0.75"])
    assert full[1] == part[0]
    assert (full[1].white, full[1].black) == (50, 150)


def test_derive_seed():
    assert derive_seed(0, 1) == derive_seed(0, 1)
    assert derive_seed(0, 1) != derive_seed(0, 2) != derive_seed(1, 1)
    assert 0 <= derive_seed(123, 4, 5) < 2**64
