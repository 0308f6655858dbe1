import math

import numpy as np
import pytest
from fractions import Fraction

from pnlv.eqcore import EquationSpec, Jet
from pnlv.errors import EvaluationFailed, NoAdmissibleSamples
from pnlv.localseries import PoleSeed
from pnlv.rescale import (RescaleFrame, circle_grid, cluster_estimate, constant_limit_catalog,
                          limit_ode_residual, limit_polynomial, limit_polynomial_dw,
                          period_catalog, pole_cluster_value, rescale_window, trig_limit)

ZETA = np.linspace(0.1, 1.2, 23) + 0.3j


@pytest.mark.parametrize("kind,c", [("ii", 0), ("ii", -0.25), ("iv", 0), ("iv", -8 / 27)])
@pytest.mark.parametrize("sign", [1, -1])
def test_trig_limits_solve_limit_equation(kind, c, sign):
    w, w1 = trig_limit(kind, c, ZETA, sign)
    assert limit_ode_residual(kind, w, w1, c) <= 1e-12 * max(1, np.max(np.abs(w1)) ** 2)
    # derivative against a central difference
    h = 1e-6
    fd = (trig_limit(kind, c, ZETA + h, sign)[0] - trig_limit(kind, c, ZETA - h, sign)[0]) / (2 * h)
    assert np.max(np.abs(fd - w1) / (1 + np.abs(w1))) < 1e-6


@pytest.mark.parametrize("kind,c", [("ii", 0), ("ii", -0.25), ("iv", 0), ("iv", -8 / 27)])
def test_trig_limit_pole_spacing(kind, c):
    # omega is the spacing of consecutive poles: w(zeta + omega) = +-w(zeta)
    om = dict(period_catalog(kind))[c]
    w0, _ = trig_limit(kind, c, ZETA)
    w1, _ = trig_limit(kind, c, ZETA + om)
    err = min(np.max(np.abs(w1 - w0)), np.max(np.abs(w1 + w0)))
    assert err < 1e-9 * max(1, np.max(np.abs(w0)))


@pytest.mark.parametrize("kind", ["i", "ii", "iv"])
def test_constant_limits_are_double_roots(kind):
    for w, c in constant_limit_catalog(kind):
        assert abs(limit_polynomial(kind, w, c)) < 1e-14
        assert abs(limit_polynomial_dw(kind, w, c)) < 1e-14


def test_no_trig_limit_for_i():
    assert period_catalog("i") == []
    with pytest.raises(ValueError):
        trig_limit("i", 0, ZETA)


def test_frame_validation_and_points():
    with pytest.raises(ValueError):
        RescaleFrame(1 + 0j, Fraction(1, 3), Fraction(1, 3), (0j,))
    f = RescaleFrame.for_kind("PIV", 4.0, [0, 1j])
    assert np.allclose(f.points(), [4, 4 + 0.25j])


def test_window_of_exact_solution():
    # w = -2z rescales to the constant -2 of the IV limit
    f = RescaleFrame.for_kind("PIV", 10 + 5j, circle_grid(0.5, 8))

    def acc(z):
        return Jet(z, -2 * z, -2 + 0j)

    zeta, wh, wh1 = rescale_window(acc, f)
    assert np.allclose(wh, -2 - 2 * (10 + 5j) ** -2 * np.array(f.grid))
    assert limit_ode_residual("iv", wh[:1] * 0 - 2, wh1[:1] * 0, 0) < 1e-14


def test_window_reports_accessor_failure():
    f = RescaleFrame.for_kind("PII", 2.0, [0])

    def bad(z):
        raise ZeroDivisionError("boom")

    with pytest.raises(EvaluationFailed):
        rescale_window(bad, f)


def test_cluster_estimate_floor():
    eq = EquationSpec.piv(-2, -2)

    class Acc:
        pass
    acc = Acc()
    acc.eq = eq
    acc.jet = lambda z: Jet(z, -1 / z, 1 / z ** 2)
    # a pole on every sample point: nothing admissible
    poles = [PoleSeed(eq, r, 1) for r in np.linspace(5, 10, 6)]
    with pytest.raises(NoAdmissibleSamples):
        cluster_estimate(acc, 0.0, (5, 10), poles, n=6)
    est = cluster_estimate(acc, math.pi / 2, (5, 10), poles, n=6)
    assert len(est.samples) == 6 and len(est.poleValues) == 6
    assert est.to_dict()["histogram"]["quantity"] == "|h^-d W(h)|"


def test_pole_cluster_value_formulas():
    eq = EquationSpec.pii(0)
    assert abs(pole_cluster_value(PoleSeed(eq, 2.0, -1, 3.0)) - (-30 / 4 - 7 / 36)) < 1e-15
    eq = EquationSpec.piv(0, -2)
    assert abs(pole_cluster_value(PoleSeed(eq, 2.0, 1, 4.0)) - 1.0) < 1e-15
