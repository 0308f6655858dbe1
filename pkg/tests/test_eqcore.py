import cmath

import numpy as np
import pytest
import sympy as sp

from pnlv.eqcore import (EquationSpec, Jet, W_prime, constraint_residual, disc_radius,
                         first_integral, ode_residual, rhs)
from pnlv.errors import DivisionNearZero


def test_piv_gamma_sets_beta():
    eq = EquationSpec.piv_gamma(0.5, 1 + 2j)
    assert eq.beta == -2 * (1 + 2j) ** 2
    assert EquationSpec.piv(0.5, eq.beta).gamma ** 2 == pytest.approx((1 + 2j) ** 2)


def test_bad_kind_rejected():
    with pytest.raises(ValueError):
        EquationSpec("PIII")


def test_eq_dict_round_trip():
    eq = EquationSpec.piv(1 + 1j, -2, "minus")
    assert EquationSpec.from_dict(eq.to_dict()) == eq


@pytest.mark.parametrize("kind", ["PI", "PII", "PIV"])
def test_first_integral_derivative_identity(kind):
    # d/dz of the algebraic W along solutions equals W' (exact, sympy)
    z, w, w1, a, b = sp.symbols("z w w1 a b")
    if kind == "PI":
        W = (4 * w ** 3 + 2 * z * w - w1 ** 2) / 2
        w2 = z + 6 * w ** 2
        target = w
    elif kind == "PII":
        W = w ** 4 + z * w ** 2 + 2 * a * w - w1 ** 2
        w2 = a + z * w + 2 * w ** 3
        target = w ** 2
    else:
        W = (w ** 4 + 4 * z * w ** 3 + 4 * (z ** 2 - a) * w ** 2 - 2 * b - w1 ** 2) / (4 * w)
        w2 = (w1 ** 2 + 3 * w ** 4 + 8 * z * w ** 3 + 4 * (z ** 2 - a) * w ** 2 + 2 * b) / (2 * w)
        target = w ** 2 + 2 * z * w
    dW = sp.diff(W, z) + sp.diff(W, w) * w1 + sp.diff(W, w1) * w2
    assert sp.simplify(dW - target) == 0


def test_first_integral_matches_sympy_value():
    eq = EquationSpec.piv(0.3 + 0.1j, -0.7)
    j = Jet(1 + 1j, 0.4 - 0.2j, 1.1 + 0.5j)
    W = first_integral(eq, j).W
    a, b = eq.alpha, eq.beta
    z, w, w1 = j.z, j.w, j.w1
    ref = (w ** 4 + 4 * z * w ** 3 + 4 * (z * z - a) * w * w - 2 * b - w1 * w1) / (4 * w)
    assert abs(W - ref) < 1e-14
    assert W_prime(eq, z, w) == pytest.approx(w * w + 2 * z * w)


def test_first_integral_zero_guard():
    eq = EquationSpec.piv(0, -2)
    with pytest.raises(DivisionNearZero):
        first_integral(eq, Jet(1.0, 1e-9, 1.0))


def test_w_minus_2z_has_vanishing_first_integral():
    # W' = w^2 + 2zw = 0 for w = -2z, and the algebraic W is 0 as well
    eq = EquationSpec.piv(0, -2)
    for z in (0.5, 2 + 1j, -3j):
        assert abs(first_integral(eq, Jet(z, -2 * z, -2)).W) < 1e-12


def test_rhs_and_residual_on_exact_solution():
    eq = EquationSpec.piv(-2, -2)
    z = 1.3 - 0.4j
    j = Jet(z, -1 / z, 1 / z ** 2, -2 / z ** 3)
    assert ode_residual(eq, z, j.w, j.w1, j.w2) < 1e-15
    assert abs(rhs(eq, Jet(z, j.w, j.w1)) - j.w2) < 1e-13
    assert constraint_residual(eq, j) < 1e-13


def test_disc_radius_exponents():
    assert disc_radius(EquationSpec.pi(), 16) == pytest.approx(0.25)
    assert disc_radius(EquationSpec.pii(0), 16) == pytest.approx(0.125)
    assert disc_radius(EquationSpec.piv(0, 0), 16) == pytest.approx(0.5 / 16)
    assert disc_radius(EquationSpec.piv(0, 0), 0.2) == 0.5
