import cmath
import math

import mpmath as mp
import numpy as np
import pytest

from pnlv.backlund import SignatureIV
from pnlv.eqcore import EquationSpec, Jet
from pnlv.errors import ContourHitsPole
from pnlv.localseries import PoleSeed
from pnlv.polefield import (PoleCatalog, cluster_strings, contour_gamma, counting_function,
                            first_order_residual, lemma_checks, ray_sign, residue_ledger,
                            string_recursion_sim, sweep, table1_residue,
                            zero_catalog_and_deficiency)
from pnlv.special import weber_hermite

G, B = 1.5, 0.4
R = 6.0


def u_mp(z):
    z = mp.mpc(z)
    return mp.hyp1f1(-G / 2, 0.5, z * z) + B * z * mp.hyp1f1((1 - G) / 2, 1.5, z * z)


@pytest.fixture(scope="module")
def field():
    sol = weber_hermite(G, init=(1, B))
    return sol, sweep(None, sol, {"r1": R}, {"zeros": True})


def _zeros_inside(f, r, n=2000):
    """Argument principle on |z| = r with mpmath values."""
    th = np.linspace(0, 2 * math.pi, n + 1)
    vals = [complex(f(r * cmath.exp(1j * t))) for t in th]
    ph = np.unwrap(np.angle(vals))
    return int(round((ph[-1] - ph[0]) / (2 * math.pi)))


def test_poles_are_zeros_of_u(field):
    mp.mp.dps = 25
    _, cat = field
    for s in cat.poles:
        root = complex(mp.findroot(u_mp, mp.mpc(s.p)))
        assert abs(root - s.p) < 1e-8 * max(1, abs(s.p))
        assert s.eps == -1   # w = -u'/u + ... has residue -1 at simple zeros of u


def test_pole_count_matches_argument_principle(field):
    mp.mp.dps = 20
    _, cat = field
    r = 5.5
    P = cat.positions()
    assert np.min(np.abs(np.abs(P) - r)) > 0.05
    assert int(np.sum(np.abs(P) < r)) == _zeros_inside(u_mp, r)


def test_contour_count_matches_catalogue(field):
    sol, cat = field
    a = residue_ledger(cat, 5.5, "count")
    b = residue_ledger(cat, 5.5, "contour", solution=sol)
    assert abs(b["sumResidues"].real - a["sumResidues"]) < 1e-6
    assert abs(-b["intW"].real - (a["nPlus"] + a["nMinus"])) < 1e-6


def test_zeros_are_zeros(field):
    sol, cat = field
    assert cat.zeros
    for z, _ in cat.zeros:
        assert abs(sol.w(z)) < 1e-8 * max(1, abs(z))


def test_catalogue_round_trip_and_determinism(field):
    sol, cat = field
    back = PoleCatalog.from_dict(cat.to_dict())
    assert back.to_json() == cat.to_json()
    again = sweep(None, sol, {"r1": 3.0}, {"zeros": True})
    again2 = sweep(None, sol, {"r1": 3.0}, {"zeros": True})
    assert again.to_json() == again2.to_json()


def test_svg_glyphs(field):
    _, cat = field
    svg = cat.to_svg()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<circle") == len(cat.poles)
    assert svg.count("<polygon") == len(cat.zeros)
    assert svg.count("stroke-dasharray") == 4


def test_contour_on_pole_raises(field):
    _, cat = field
    p = cat.poles[3].p
    with pytest.raises(ContourHitsPole):
        contour_gamma(cat, abs(p))


def test_order_zero_with_gamma_zero_has_no_zeros():
    sol = weber_hermite(0.0, init=(1, 0.3))
    cat = sweep(None, sol, {"r1": 4.0}, {"zeros": True})
    assert cat.zeros == []


@pytest.mark.parametrize("omega,tau", [(1j * math.pi, 1), (math.pi * math.sqrt(2), 1)])
def test_synthetic_strings(omega, tau):
    out = string_recursion_sim(omega, tau, 1.0, 20000)
    assert abs(out["ratio"] - 1) < 1e-2
    assert out["angleError"] < 0.05
    assert abs(out["countRatio"] - 1) < 0.05


def test_synthetic_catalogue_chains_into_string():
    eq = EquationSpec.piv(0, -2)
    it = string_recursion_sim(1j * math.pi, 1, 3.0 + 3.0j, 400)["iterates"]
    cat = PoleCatalog(eq, {"r1": float(abs(it[-1]))}, [PoleSeed(eq, p, 1) for p in it])
    strings, unchained = cluster_strings(cat)
    assert len(strings) == 1 and len(strings[0].memberIndices) >= 390
    chk = lemma_checks(strings[0], cat, 1j * math.pi)
    assert abs(chk["omegaRatio"] - 1) < 1e-2
    assert chk["angleError"] < 0.05


def test_counting_function_on_lattice():
    x = np.arange(-40, 41)
    P = (x[:, None] + 1j * x[None, :]).ravel()
    P = P[(P != 0)]
    out = counting_function(P, np.linspace(5, 35, 40))
    assert abs(out["exponent"] - 2) < 0.05
    # unit density: n(r) ~ pi r^2
    assert abs(out["nu"] - 2 * math.pi ** 2) < 0.05 * 2 * math.pi ** 2


def test_ray_sign_and_table():
    assert [ray_sign(k * math.pi / 2 + math.pi / 4) for k in range(4)] == [1, -1, 1, -1]
    sig = SignatureIV(("alpha", "-gamma", "alpha", "-gamma"))
    # tau is -2 in the sectors where w ~ -2z; (tau_cw, tau_ccw) = (0, -2) gives +1
    assert table1_residue(SignatureIV(("-gamma", "alpha", "-gamma", "alpha")), math.pi / 4) == 1
    assert table1_residue(sig, math.pi / 4) == -1
    assert table1_residue(sig, 3 * math.pi / 4) == -1
    assert table1_residue(SignatureIV(("gamma", "-gamma", "gamma", "-gamma")), math.pi / 4) == 0


def test_first_order_residual_controls():
    jets = [Jet(z, -2 * z, -2 + 0j) for z in (0.3, 1 + 1j, -2j, 4.0)]
    assert first_order_residual(jets, 0) < 1e-15
    bad = [Jet(z, 0.3 + z, 1 + 0j) for z in (0.3, 1 + 1j, -2j)]
    assert first_order_residual(bad, 0) > 1e-2


def test_deficiency_counts_double_zeros():
    eq = EquationSpec.piv(-3, 0)
    cat = PoleCatalog(eq, {"r1": 10}, [PoleSeed(eq, k, 1) for k in range(1, 7)],
                      zeros=[(1.5 + 0j, 1), (2.5 + 0j, -1)])
    out = zero_catalog_and_deficiency(cat, [10])
    assert out["multiplicity"] == 2
    assert abs(out["estimate"] - (1 - 4 / 6)) < 1e-15
