import cmath

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from pnlv.backlund import (ParameterState, RotatedSolution, SignatureIV, bii_half_transform,
                           bii_transforms, biv_forward, biv_inverse, canonical_form,
                           chain_build, chain_solution, delta_of_signature, forward_params,
                           inverse_params, signature_after_forward, signature_transform,
                           trivial_symmetries)
from pnlv.eqcore import EquationSpec, Jet, ode_residual, rhs
from pnlv.errors import AtZeroOfW, ParameterExcluded
from pnlv.special import airy_solution, weber_hermite

cplx = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


@given(a=cplx, g=cplx, z=cplx, w=cplx, w1=cplx)
def test_forward_inverse_round_trip(a, g, z, w, w1):
    assume(abs(w) > 0.1)
    ps = ParameterState(a, g)
    try:
        jt, pt = biv_forward(Jet(z, w, w1), ps)
    except AtZeroOfW:
        return
    assume(abs(jt.w) > 0.1)
    jb, pb = biv_inverse(jt, pt)
    assert abs(jb.w - w) <= 1e-9 * (1 + abs(w))
    assert abs(jb.w1 - w1) <= 1e-9 * (1 + abs(w1) + abs(w) ** 3)
    assert abs(pb.alpha - a) < 1e-12 and abs(pb.gamma - g) < 1e-12


@given(a=cplx, g=cplx)
def test_parameter_law(a, g):
    f = forward_params(ParameterState(a, g))
    assert abs((f.alpha - f.gamma) + (a - g)) < 1e-12
    f2 = forward_params(f)
    assert abs(f2.alpha - (a + 1)) < 1e-12 and abs(f2.gamma - (g + 1)) < 1e-12
    i = inverse_params(f)
    assert abs(i.alpha - a) < 1e-12 and abs(i.gamma - g) < 1e-12


def _fd_derivative(f, z, h=1e-5):
    return (f(z + h) - f(z - h)) / (2 * h)


def test_forward_maps_weber_hermite_to_zero():
    sol = weber_hermite(0.7, init=(1, 0.4))
    ps = ParameterState(sol.eq.alpha, sol.eq.gamma)
    assert abs(biv_forward(sol.jet(0.9 + 0.3j), ps)[0].w) < 1e-14


@pytest.mark.parametrize("step", [biv_inverse, biv_forward])
def test_image_solves_new_equation(step):
    # transform a solution pointwise and check the image against finite
    # differences and the shifted equation
    sol = weber_hermite(0.7, init=(1, 0.4))
    ps = ParameterState(sol.eq.alpha, sol.eq.gamma)
    src = sol.jet
    if step is biv_forward:
        # start one step down the ladder so the forward image is not trivial
        ps0 = ps
        ps = inverse_params(ps0)

        def src(z):
            return biv_inverse(sol.jet(z), ps0)[0]

    def image(z):
        return step(src(z), ps)[0]

    new = step(src(0.5), ps)[1].eq()
    z = 0.9 + 0.3j
    j = image(z)
    assert abs(_fd_derivative(lambda x: image(x).w, z) - j.w1) < 1e-7 * abs(j.w1)
    w2 = _fd_derivative(lambda x: image(x).w1, z)
    assert ode_residual(new, z, j.w, j.w1, w2) < 1e-7


def test_bii_shifts_alpha_and_solves():
    sol = airy_solution("plus", init=(1, 0.5))
    z = 0.8 + 0.2j
    j, a = bii_transforms(sol.jet(z), 0.5, "plus")
    assert a == 1.5
    img = lambda x: bii_transforms(sol.jet(x), 0.5, "plus")[0]
    assert abs(_fd_derivative(lambda x: img(x).w, z) - j.w1) < 1e-7 * (1 + abs(j.w1))
    w2 = _fd_derivative(lambda x: img(x).w1, z)
    assert ode_residual(EquationSpec.pii(1.5), z, j.w, j.w1, w2) < 1e-7
    with pytest.raises(ParameterExcluded):
        bii_transforms(sol.jet(z), -0.5, "plus")


def test_bii_half_transform_reaches_alpha_zero():
    # a generic alpha = 1/2 solution; Airy ones sit where y vanishes
    from pnlv import kernels

    def jet(z):
        _, Y, _, _, _ = kernels.run_path(kernels.KIND["PII"], [0.5 + 0j], kernels.SEGMENT,
                                         [0, z], [0.3, 0.2], tol=1e-14)
        return Jet(z, Y[-1, 0], Y[-1, 1])

    t = 0.6 + 0.1j

    def image(t):
        return bii_half_transform(jet(-(2 ** (1 / 3)) * t))[0]

    j = image(t)
    assert abs(_fd_derivative(lambda x: image(x).w, t) - j.w1) < 1e-7 * (1 + abs(j.w1))
    w2 = _fd_derivative(lambda x: image(x).w1, t)
    assert ode_residual(EquationSpec.pii(0), t, j.w, j.w1, w2) < 1e-6


def test_rotation_symmetry_on_rational_solution():
    eq = EquationSpec.piv(-2, -2)
    z = 1 + 2j
    j = Jet(z, -1 / z, 1 / z ** 2, -2 / z ** 3)
    jr, eqr = trivial_symmetries(j, eq, "rotate")
    assert eqr.alpha == 2
    assert ode_residual(eqr, jr.z, jr.w, jr.w1, jr.w2) < 1e-14


def test_chain_parameters_and_residual():
    states = chain_build(1, -2, "even")
    assert [(s.alpha, s.gamma) for s in states] == [(-2, 1), (2, -1), (-3, 0)]
    ch = chain_solution(weber_hermite(1.0, init=(1, 0.3)), 2)
    assert ch.eq.alpha == -3 and ch.eq.beta == 0
    for z in (0.7 + 0.2j, 2 - 1j):
        j = ch.jet(z)
        assert ode_residual(ch.eq, z, j.w, j.w1, j.w2) < 1e-10
    rot = RotatedSolution(ch)
    assert rot.eq.alpha == 3
    j = rot.jet(1.2 + 0.3j)
    assert ode_residual(rot.eq, j.z, j.w, j.w1, j.w2) < 1e-10


def test_signature_delta_and_forms():
    sig = SignatureIV(("alpha", "-gamma", "alpha", "-gamma"))
    assert delta_of_signature(sig)[0] == -4
    assert delta_of_signature(signature_transform(sig, "rotate"))[0] == 4
    cf = canonical_form(sig)
    assert cf.form == 2
    with pytest.raises(ValueError):
        canonical_form(SignatureIV(("alpha",) * 4))
    with pytest.raises(ValueError):
        SignatureIV(("alpha", "beta", "alpha", "alpha"))


def test_signature_after_forward_maps_symbols():
    ps = ParameterState(-2, 1)
    sig = SignatureIV.from_params(("alpha", "-gamma", "alpha", "-gamma"), -2, 1)
    new = signature_after_forward(sig, ps)
    assert new.symbols == ("gamma", "-gamma", "gamma", "-gamma")
