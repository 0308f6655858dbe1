import cmath

import mpmath as mp
import numpy as np
import pytest
import sympy as sp
from scipy.special import airy, eval_hermite

from pnlv import kernels
from pnlv.eqcore import EquationSpec, ode_residual
from pnlv.errors import DegenerateU, NoneKnown
from pnlv.special import (airy_solution, hastings_mcleod_shoot, piv_exact_residual,
                          rational_solutions, weber_hermite)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_weber_hermite_u_is_hermite_polynomial(n):
    # u'' - 2zu' + 2nu = 0 has the Hermite polynomial H_n as a solution
    h0 = eval_hermite(n, 0.0)
    h1 = 2 * n * eval_hermite(n - 1, 0.0)
    sol = weber_hermite(n, init=(h0, h1))
    for z in (0.3, 1.1 + 0.4j, -0.7j):
        ref = complex(mp.hermite(n, z))
        assert abs(sol.u(z) - ref) < 1e-12 * (1 + abs(ref))


def test_weber_hermite_far_values_against_hypergeometric_form():
    mp.mp.dps = 30
    g, b = 1.5, 0.4
    sol = weber_hermite(g, init=(1, b))

    def u(z):
        z = mp.mpc(z)
        return mp.hyp1f1(-g / 2, 0.5, z * z) + b * z * mp.hyp1f1((1 - g) / 2, 1.5, z * z)

    for z in (4 + 1j, -3 + 3.5j, 6j):
        ref = complex(-mp.diff(u, z) / u(z))
        assert abs(sol.w(z) - ref) < 1e-9 * abs(ref)


def test_airy_solution_against_scipy():
    sol = airy_solution("plus", init=(1, 0))
    c = -2 ** (-1 / 3)
    A = np.array([[airy(0)[0], airy(0)[2]], [c * airy(0)[1], c * airy(0)[3]]])
    a, b = np.linalg.solve(A, [1, 0])
    for z in (1.5, 4 + 2j, -5 + 1j):
        ai, aip, bi, bip = airy(c * z)
        ref = -c * (a * aip + b * bip) / (a * ai + b * bi)
        assert abs(sol.w(z) - ref) < 1e-9 * abs(ref)


def test_branches_and_parameters():
    assert weber_hermite(2).eq.alpha == -3
    assert weber_hermite(2, "minus").eq.alpha == 3
    assert weber_hermite(2).eq.beta == -8
    assert airy_solution("minus").eq.alpha == -0.5
    with pytest.raises(DegenerateU):
        weber_hermite(1, init=(0, 0))


def test_linearized_residual_on_grid():
    x = np.linspace(-10, 10, 11)
    G = (x[:, None] + 1j * x[None, :]).ravel()
    G = G[np.abs(G) <= 10]
    for sol in (weber_hermite(2, init=(1, 0.2)), airy_solution("minus", init=(0.3, 1))):
        worst = 0.0
        for z in G:
            try:
                j = sol.jet(z)
            except ZeroDivisionError:
                continue
            w2 = j.w2
            worst = max(worst, ode_residual(sol.eq, z, j.w, j.w1, w2))
        assert worst < 1e-10


def test_rational_catalogue_exact():
    z = sp.Symbol("z")
    for a, b, w in ((0, -2, -2 * z), (0, sp.Rational(-2, 9), -sp.Rational(2, 3) * z),
                    (-2, -2, -1 / z), (3, -8, 4 * z / (2 * z ** 2 + 1))):
        assert piv_exact_residual(a, b, w) == 0
    sols = rational_solutions(EquationSpec.piv(-2, -2))
    assert any(abs(s(2.0) + 0.5) < 1e-15 for s in sols)
    with pytest.raises(NoneKnown):
        rational_solutions(EquationSpec.piv(0.123, 0.456))


def test_hastings_mcleod_qualitative():
    jet, (lo, hi), k = hastings_mcleod_shoot()
    assert lo <= jet.w.real <= hi or abs(jet.w.real - 0.5 * (lo + hi)) < 1e-9
    assert abs(jet.w.real - 0.36706155154807) < 1e-9   # tabulated value
    assert abs(jet.w1.real + 0.29537210544755) < 1e-9
    s, Y, _, st, _ = kernels.run_path(kernels.KIND["PII"], [0j], kernels.SEGMENT, [0, 6],
                                      [jet.w, jet.w1], tol=1e-12)
    w6 = Y[-1, 0].real
    assert 0.9 <= w6 / airy(6.0)[0] <= 1.1
    s, Y, _, _, _ = kernels.run_path(kernels.KIND["PII"], [0j], kernels.SEGMENT, [0, -6],
                                     [jet.w, jet.w1], tol=1e-12)
    w = Y[:, 0].real
    assert np.all(w > 0) and np.all(np.diff(w) >= -1e-12)   # increasing towards -6
    # a perturbed start blows up before -8
    s, Y, _, st, _ = kernels.run_path(kernels.KIND["PII"], [0j], kernels.SEGMENT, [0, -8],
                                      [jet.w + 1e-3, jet.w1], tol=1e-12, trigger=1e2,
                                      trig_exp=0.5)
    assert st == kernels.STATUS_TRIGGER
