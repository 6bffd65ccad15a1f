import math

import pytest

from mabinogion.asymptotics import (
    AUDITS,
    EULER_GAMMA,
    ApproxReport,
    approx_p,
    approx_T_A,
    approx_T_skewed,
    approx_T_sym,
    approx_V_A,
    audit,
    skewed_state,
)


def test_gamma():
    assert f"{EULER_GAMMA:.4f}" == "0.5772"
    # gamma = lim H_n - ln n
    n = 10**6
    assert math.fsum(1 / i for i in range(1, n + 1)) - math.log(n) == pytest.approx(EULER_GAMMA, abs=1e-6)


def test_worked_example_values():
    assert round(approx_T_sym(50_000)) == 319_582
    assert round(approx_V_A(50_000)) == 99_604
    assert round(approx_T_A(50_000)) == 318_219


def test_small_k():
    assert approx_T_sym(1) == pytest.approx((math.log(4) + EULER_GAMMA) / 2)
    assert abs(audit("T_sym", [1])[0].abs_err) < 0.02


def test_skewed():
    assert approx_T_skewed(2_000_000, 0.75) == pytest.approx(1e6 * math.log(2))
    assert approx_T_skewed(2_000_000, 0.55) == pytest.approx(2302585.09, abs=0.01)
    for x in (0.5, 1.0, 0.3):
        with pytest.raises(ValueError):
            approx_T_skewed(100, x)


def test_skewed_state_exact():
    assert skewed_state(200, "0.505") == (99, 101)
    assert skewed_state(2000, 0.55) == (900, 1100)
    assert skewed_state(20000, "0.505") == (9900, 10100)


def test_report_errors():
    r = ApproxReport(5, 2.0, 2.5)
    assert r.abs_err == 0.5 and r.rel_err == 0.2
    missing = ApproxReport(5, 2.0)
    assert missing.abs_err is None and missing.rel_err is None
    assert ApproxReport(("a", "b"), 1.0, 1.0).to_row()["parameter"] == "a:b"


def test_approximation_error_bounds():
    ks = range(4, 201)
    for which in ("V_A", "T_A"):
        reps = audit(which, ks)
        assert max(r.abs_err for r in reps) < 0.1
        assert max(r.rel_err for r in reps if r.parameter > 25) < 0.001


def test_ratios_shrink():
    ks = [2**j for j in range(4, 12)]
    for which in ("ratio_V", "ratio_T"):
        gaps = [r.abs_err for r in audit(which, ks)]
        assert all(x > y for x, y in zip(gaps, gaps[1:])), gaps


def test_stirling_p():
    reps = audit("p", [10, 100, 1000, 10_000])
    rel = [r.rel_err for r in reps]
    assert all(x > y for x, y in zip(rel, rel[1:]))
    assert rel[-1] < 1e-4
    assert approx_p(1) == pytest.approx(1 / math.sqrt(math.pi))


def test_skewed_audit():
    (rep,) = audit("T_skewed", [(20_000, "0.75")])
    assert rep.rel_err < 1e-3


def test_unknown_audit():
    assert "T_A" in AUDITS
    with pytest.raises(ValueError):
        audit("nope", [1])
    with pytest.raises(ValueError):
        approx_V_A(0)
