"""Acceptance criteria, one test each.

Every test prints a one-line verdict (also collected into the terminal
summary) and then asserts the thresholds on the reported metrics, including
the runtime budget.  The Weber-Hermite field swept to |z| = 30 is shared by
criteria 8-10 through a cache; criterion 7 sweeps its own annulus.
"""
import math

from conftest import record_acceptance
from pnlv import verify


def _run(fn, *args):
    c = fn(*args)
    line = c.line()
    print(line)
    record_acceptance(line)
    return c


def _within_budget(c):
    assert c.seconds < c.budget, f"{c.seconds:.1f}s over the {c.budget:.0f}s budget"


def test_01_laurent_print_agreement():
    c = _run(verify.check_laurent)
    assert c.metrics["samples"] == 50
    assert c.metrics["failing"] == {}, f"coefficients off by more than 1e-12: {c.metrics['failing']}"
    assert c.metrics["maxRel"] <= 1e-12
    _within_budget(c)


def test_02_asymptotic_print_agreement():
    c = _run(verify.check_asymptotic)
    assert c.metrics["samples"] == 50
    assert c.metrics["failing"] == {}
    assert c.metrics["maxRel"] <= 1e-12
    _within_budget(c)


def test_03_exact_solution_residuals():
    c = _run(verify.check_exact_solutions)
    assert all(v == "0" for v in c.metrics["exactResiduals"].values())
    assert sorted(c.metrics["weberHermiteMax"]) == [1, 2, 3]
    assert max(c.metrics["weberHermiteMax"].values()) <= 1e-10
    _within_budget(c)


def test_04_backlund_round_trip_and_parameter_law():
    c = _run(verify.check_backlund)
    assert c.metrics["roundTripMax"] <= 1e-12
    assert c.metrics["parameterLawExact"]
    _within_budget(c)


def test_05_pole_passage():
    c = _run(verify.check_pole_passage)
    assert abs(c.metrics["contourIntegralOfW"] + 1) <= 1e-8
    assert c.metrics["antipodalRel"] <= 1e-7
    _within_budget(c)


def test_06_string_law_synthetic():
    c = _run(verify.check_string_synthetic)
    assert abs(c.metrics["ratio"] - 1) <= 1e-2
    assert abs(c.metrics["countCoeff"] * 2 * math.pi - 1) <= 0.02
    _within_budget(c)


def test_07_string_law_harvested():
    c = _run(verify.check_strings_harvested)
    rows = c.metrics["strings"]
    assert len(rows) == 4
    for r in rows:
        assert r["rayError"] <= 0.1
        assert r["omegaRelError"] <= 0.10
        assert r["countCoeffRelError"] <= 0.15
    _within_budget(c)


def test_08_counting_exponents():
    c = _run(verify.check_counting)
    assert abs(c.metrics["airyExponent"] - 1.5) <= 0.15
    assert abs(c.metrics["weberHermiteExponent"] - 2.0) <= 0.2
    assert min(abs(c.metrics["nu"] - 2), abs(c.metrics["nu"] - 4)) <= 0.2
    _within_budget(c)


def test_09_rescaling_limit():
    c = _run(verify.check_rescale)
    rows = c.metrics["residuals"]
    assert len(rows) == 10
    assert all(r <= 0.1 for p, r in rows if p >= 25)
    assert c.metrics["logLogSlope"] < 0
    assert c.metrics["clusterFractionWithin0.05"] == 1.0
    _within_budget(c)


def test_10_residue_bookkeeping():
    c = _run(verify.check_residues)
    cnt, con = c.metrics["countDelta"], c.metrics["contourDelta"]
    assert abs(con - cnt) <= 0.1 * abs(cnt)
    assert c.metrics["strings"]
    for theta, eps, predicted in c.metrics["strings"]:
        assert eps == predicted, f"string at {theta:.3f}: eps {eps}, rule {predicted}"
    _within_budget(c)


def test_11_first_order_equation():
    c = _run(verify.check_first_order)
    assert c.metrics["residual"] <= 1e-8
    assert c.metrics["gamma"] == -1
    _within_budget(c)


def test_12_deficiency():
    c = _run(verify.check_deficiency)
    assert c.metrics["alpha"] == 3 and c.metrics["beta"] == 0
    assert abs(c.metrics["estimate"] - 1 / 3) <= 0.05
    _within_budget(c)
