import cmath
import math

import numpy as np
import pytest

from pnlv.eqcore import EquationSpec, Jet
from pnlv.integrate import PathSpec, Trajectory, integrate
from pnlv.localseries import PoleSeed, laurent_w, seed_jet
from pnlv.special import weber_hermite


def test_rational_solution_minus_2z():
    eq = EquationSpec.piv(0, -2)
    tr = integrate(eq, Jet(1, -2, -2), PathSpec.segment(1, 3 + 1j), tol=1e-12)
    assert np.max(np.abs(tr.w + 2 * tr.z) / np.abs(2 * tr.z)) < 1e-9


def test_passes_pole_of_minus_one_over_z():
    # w = -1/z (alpha=beta=-2); the path grazes the pole at 0, close enough to hop
    eq = EquationSpec.piv(-2, -2)
    z0 = -1 + 0.0005j
    tr = integrate(eq, Jet(z0, -1 / z0, 1 / z0 ** 2), PathSpec.segment(z0, 1 + 0.0005j), tol=1e-12)
    assert len(tr.poleEvents) == 1
    seed, _ = tr.poleEvents[0]
    assert abs(seed.p) < 1e-8 and seed.eps == -1
    zf = tr.z[-1]
    assert abs(tr.w[-1] + 1 / zf) < 1e-8


def test_pi_pole_loop_first_integral_residue():
    eq = EquationSpec.pi()
    sd = PoleSeed(eq, 1.0, 1, 0j)
    tr = integrate(eq, seed_jet(sd, 0.1), PathSpec.circle(1, 0.1), tol=1e-12)
    assert abs(tr.IW[-1] / (2j * math.pi) + 1) < 1e-8
    assert abs(tr.w[-1] - tr.w[0]) < 1e-9 * abs(tr.w[0])


def test_agrees_with_weber_hermite():
    sol = weber_hermite(1.0, init=(1, 0.3))
    z0, z1 = 0.5 + 0.2j, 2.5 + 1.5j
    j = sol.jet(z0)
    tr = integrate(sol.eq, Jet(z0, j.w, j.w1), PathSpec.segment(z0, z1), tol=1e-12)
    ref = sol.jet(z1).w
    assert abs(tr.w[-1] - ref) < 1e-7 * abs(ref)


def test_start_must_be_on_path():
    with pytest.raises(ValueError):
        integrate(EquationSpec.pi(), Jet(0, 0, 0), PathSpec.segment(1, 2))
    with pytest.raises(ValueError):
        integrate(EquationSpec.pi(), Jet(0, 0, 0), PathSpec.segment(0, 2), tol=1e-3)


def test_polyline_validation():
    with pytest.raises(ValueError):
        PathSpec.polyline([0, 0, 1])
    with pytest.raises(ValueError):
        PathSpec.polyline([0])


def test_csv_round_trip():
    eq = EquationSpec.pii(0.2)
    tr = integrate(eq, Jet(0, 0.1, 0.2), PathSpec.segment(0, 1), tol=1e-10)
    back = Trajectory.from_csv(eq, tr.to_csv())
    assert np.array_equal(back.z, tr.z) and np.array_equal(back.w, tr.w)
