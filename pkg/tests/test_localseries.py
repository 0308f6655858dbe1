import cmath

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from pnlv.eqcore import EquationSpec, ode_residual
from pnlv.errors import FitFailed, OffsetOutsideValidity, UnsupportedFamily, WrongParameters
from pnlv.localseries import (AsymptoticFamily, PoleSeed, asymptotic_series, detect_pole,
                              h_from_jet, laurent_W, laurent_w, log_derivative_series,
                              seed_jet, validity_radius)

cplx = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def _sympy_laurent_pi(N=10):
    """Laurent coefficients of I at a pole by undetermined coefficients (exact)."""
    t, p, h = sp.symbols("t p h")
    c = sp.symbols(f"c0:{N + 3}")
    w = sum(c[k] * t ** (k - 2) for k in range(N + 3))
    res = sp.expand(sp.diff(w, t, 2) - (p + t) - 6 * w ** 2)
    sol = {c[0]: 1, c[1]: 0}
    for k in range(2, N + 3):
        if k == 6:
            sol[c[6]] = h
            continue
        eqk = res.coeff(t, k - 4).subs(sol)
        sol[c[k]] = sp.solve(eqk, c[k])[0]
    return t, p, h, w.subs(sol)


def test_pi_laurent_against_undetermined_coefficients():
    t, p, h, w = _sympy_laurent_pi(10)
    pv, hv = 0.7 - 0.4j, 0.3 + 0.2j
    S = laurent_w(PoleSeed(EquationSpec.pi(), pv, 1, hv), 10)
    for k in range(-2, 9):
        ref = complex(sp.N(w.coeff(t, k).subs({p: pv, h: hv})))
        assert abs(S.coeff(k) - ref) <= 1e-12 * (1 + abs(ref))


def test_pi_first_integral_constant_is_plus_14h():
    t, p, h = sp.symbols("t p h")
    w = t ** -2 - p / 10 * t ** 2 - t ** 3 / 6 + h * t ** 4
    W = sp.expand((4 * w ** 3 + 2 * (p + t) * w - sp.diff(w, t) ** 2) / 2)
    assert W.coeff(t, 0) == 14 * h
    S = laurent_W(PoleSeed(EquationSpec.pi(), 1.0, 1, 0.5))
    assert abs(S.coeff(0) - 7.0) < 1e-13


@given(p=cplx, h=cplx, a=cplx, b=cplx, eps=st.sampled_from([1, -1]),
       kind=st.sampled_from(["PII", "PIV"]))
def test_laurent_solves_equation_near_pole(p, h, a, b, eps, kind):
    eq = EquationSpec.pii(a) if kind == "PII" else EquationSpec.piv(a, b)
    S = laurent_w(PoleSeed(eq, p, eps, h), 24)
    z = p + 0.2 * validity_radius(S) * cmath.exp(0.7j)
    r = ode_residual(eq, z, S(z), S(z, 1), S(z, 2))
    assert r < 1e-9


@given(p=cplx, h=cplx)
def test_laurent_W_derivative_is_w(p, h):
    seed = PoleSeed(EquationSpec.pi(), p, 1, h)
    S, T = laurent_w(seed, 18), laurent_W(seed, 18)
    z = p + 0.2 * validity_radius(S)
    assert abs(T(z, 1) - S(z)) <= 1e-8 * abs(S(z))


def test_seed_jet_rejects_large_offset():
    seed = PoleSeed(EquationSpec.pii(0.3), 1.0, 1, 0.2)
    with pytest.raises(OffsetOutsideValidity):
        seed_jet(seed, 50.0)
    with pytest.raises(OffsetOutsideValidity):
        seed_jet(seed, 0)


def test_detect_pole_recovers_seed_from_exact_solution():
    # w = -1/z solves IV with alpha=beta=-2: pole at 0, residue -1; h is the t^2 slot (0)
    eq = EquationSpec.piv(-2, -2)
    samples = []
    from pnlv.eqcore import Jet
    for k in range(6):
        z = 0.05 * cmath.exp(1j * k)
        samples.append(Jet(z, -1 / z, 1 / z ** 2))
    s = detect_pole(eq, samples)
    assert abs(s.p) < 1e-10 and s.eps == -1 and abs(s.h) < 1e-8


def test_detect_pole_fails_on_regular_data():
    from pnlv.eqcore import Jet
    eq = EquationSpec.pii(0.5)
    samples = [Jet(z, 1 + z, 1.0) for z in (0.1, 0.2, 0.3, 0.4)]
    with pytest.raises(FitFailed):
        detect_pole(eq, samples)


def test_h_from_jet_inverts_seed_jet():
    eq = EquationSpec.piv(0.4, -1.0)
    seed = PoleSeed(eq, 2 + 1j, -1, 0.3 - 0.1j)
    j = seed_jet(seed, 0.05)
    assert abs(h_from_jet(eq, seed.p, -1, j) - seed.h) < 1e-10


def test_asymptotic_series_family_checks():
    with pytest.raises(UnsupportedFamily):
        asymptotic_series(AsymptoticFamily("IVa"), EquationSpec.pii(0.3))
    with pytest.raises(UnsupportedFamily):
        asymptotic_series(AsymptoticFamily("IIa"), EquationSpec.pii(0))
    with pytest.raises(WrongParameters):
        log_derivative_series(EquationSpec.piv(1, -2), "02")
    with pytest.raises(ValueError):
        AsymptoticFamily("V")


def test_asymptotic_series_is_small_residual_at_large_z():
    eq = EquationSpec.piv(0.3, -0.5)
    S = asymptotic_series(AsymptoticFamily("IVb"), eq, 14)
    z = 12 * cmath.exp(0.1j)
    assert ode_residual(eq, z, S(z), S(z, 1), S(z, 2)) < 1e-12


def test_pi_square_root_branch():
    S1 = asymptotic_series(AsymptoticFamily("I", 1), EquationSpec.pi())
    S2 = asymptotic_series(AsymptoticFamily("I", -1), EquationSpec.pi())
    assert abs(S1.coeff(0.5) + S2.coeff(0.5)) < 1e-15
    assert abs(S1.coeff(-2) - S2.coeff(-2)) < 1e-15
