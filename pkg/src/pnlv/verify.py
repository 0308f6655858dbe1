"""Acceptance checks.  Each check returns a Check with the measured numbers,
the thresholds they were held to and a pass flag; the CLI `verify` command
and the acceptance tests both run these."""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .eqcore import EquationSpec, Jet, ode_residual


@dataclass
class Check:
    key: str
    title: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0
    budget: float = math.inf

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.key} {self.title} ({self.seconds:.1f}s / {self.budget:g}s)"

    def to_dict(self):
        return {"key": self.key, "title": self.title, "passed": self.passed,
                "seconds": self.seconds, "budget": self.budget,
                "metrics": {k: _plain(v) for k, v in self.metrics.items()}}


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _rel(a, b):
    b = complex(b)
    return abs(complex(a) - b) / abs(b) if b != 0 else abs(complex(a))


def _rc(rng, s=2.0):
    return complex(rng.uniform(-s, s), rng.uniform(-s, s))


# ---------------------------------------------------------------------------
# printed coefficients as closures of the parameters


def printed_laurent(kind, p, eps, h, alpha=0j):
    """{(quantity, power): printed coefficient} for the Laurent developments."""
    if kind == "PI":
        return {("w", -2): 1, ("w", 2): -p / 10, ("w", 3): -1 / 6, ("w", 4): h,
                ("W", -1): -1, ("W", 0): -14 * h, ("W", 3): -p / 30, ("W", 4): -1 / 24}
    if kind == "PII":
        return {("w", -1): eps, ("w", 1): -eps * p / 6, ("w", 2): -(alpha + eps) / 4,
                ("w", 3): h, ("W", -1): -1, ("W", 0): 10 * eps * h - 7 / 36 * p * p,
                ("W", 1): -p / 3, ("W", 2): -(1 + eps * alpha) / 4}
    return {("w", -1): eps, ("w", 0): -p, ("w", 1): eps / 3 * (p * p + 2 * alpha - 4 * eps),
            ("w", 2): h, ("W", -1): -1, ("W", 0): 2 * h + 2 * (alpha - eps) * p,
            ("W", 1): (4 * alpha - p * p - 2 * eps) / 3}


def printed_asymptotic(tag, a, g):
    """{(quantity, power): printed coefficient} at infinity (principal roots)."""
    s2, s6 = cmath.sqrt(-2), cmath.sqrt(-6)
    return {
        "I": {("w", 0.5): cmath.sqrt(-1 / 6), ("w", -2): -1 / 48,
              ("W", 1.5): s6 / 9, ("W", -1): 1 / 48},
        "IIa": {("w", -1): -a, ("w", -4): 2 * a * (a * a - 1),
                ("W", -1): -a * a, ("W", -4): a * a * (a * a - 1)},
        "IIb": {("w", 0.5): cmath.sqrt(-0.5), ("w", -1): a / 2,
                ("W", 2): -0.25, ("W", 0.5): s2 * a, ("W", -1): (1 + 4 * a * a) / 8},
        "IVa": {("w", 1): -2 / 3, ("w", -1): a, ("w", -3): -(3 * a * a - 9 * g * g + 1) / 4,
                ("W", 3): -8 / 27, ("W", 1): 2 * a / 3,
                ("W", -1): -(3 * a * a + 9 * g * g - 1) / 6},
        "IVb": {("w", 1): -2, ("w", -1): -a, ("w", -3): (3 * a * a - g * g + 1) / 4,
                ("W", 1): 2 * a, ("W", -1): (a * a - g * g + 1) / 2},
        "IVcPlus": {("w", -1): g, ("w", -3): -(2 * g * g - a * g) / 2,
                    ("W", 1): 2 * g, ("W", -1): g * g - a * g},
        "IVcMinus": {("w", -1): -g, ("w", -3): -(2 * g * g + a * g) / 2,
                     ("W", 1): -2 * g, ("W", -1): g * g + a * g},
    }[tag]


def printed_log_derivative(pair, a):
    return {"02": {1: -2, -1: a - 1, -3: (a * a - 4 * a + 3) / 4},
            "13": {1: 2, -1: -(a + 1), -3: -(a * a + 4 * a + 3) / 4},
            "plus": {0.5: 1, -1: -0.25, -2.5: -5 / 32},
            "minus": {0.5: -1, -1: -0.25, -2.5: 5 / 32}}[pair]


# ---------------------------------------------------------------------------
# 1-6: local and synthetic checks


def check_laurent(n=50, seed=0, tol=1e-12):
    from .localseries import PoleSeed, laurent_W, laurent_w
    t0 = time.time()
    rng = np.random.default_rng(seed)
    worst = {}
    for _ in range(n):
        p, h, a, b = _rc(rng), _rc(rng), _rc(rng), _rc(rng)
        eps = int(rng.choice([1, -1]))
        for kind, eq in (("PI", EquationSpec.pi()), ("PII", EquationSpec.pii(a)),
                         ("PIV", EquationSpec.piv(a, b))):
            sd = PoleSeed(eq, p, eps, h)
            ser = {"w": laurent_w(sd), "W": laurent_W(sd)}
            for (q, e), val in printed_laurent(kind, p, sd.eps, h, a).items():
                key = f"{kind}:{q}:{e}"
                worst[key] = max(worst.get(key, 0.0), _rel(ser[q].coeff(e), val))
    bad = {k: v for k, v in worst.items() if v > tol}
    return Check("1", "Laurent print agreement", not bad,
                 {"maxRel": max(worst.values()), "failing": bad, "tol": tol, "samples": n},
                 time.time() - t0, 1.0)


def check_asymptotic(n=50, seed=1, tol=1e-12):
    from .localseries import (AsymptoticFamily, asymptotic_series, asymptotic_series_W,
                              log_derivative_series)
    t0 = time.time()
    rng = np.random.default_rng(seed)
    worst = {}

    def note(key, v):
        worst[key] = max(worst.get(key, 0.0), v)

    for _ in range(n):
        a, g = _rc(rng), _rc(rng)
        eqs = {"I": EquationSpec.pi(), "IIa": EquationSpec.pii(a), "IIb": EquationSpec.pii(a)}
        for tag in ("IVa", "IVb", "IVcPlus", "IVcMinus"):
            eqs[tag] = EquationSpec.piv_gamma(a, g)
        for tag, eq in eqs.items():
            fam = AsymptoticFamily(tag)
            ser = {"w": asymptotic_series(fam, eq), "W": asymptotic_series_W(fam, eq)}
            for (q, e), val in printed_asymptotic(tag, a, g).items():
                note(f"{tag}:{q}:{e}", _rel(ser[q].coeff(e), val))
        for pair in ("02", "13"):
            s = log_derivative_series(EquationSpec.piv(a, 0), pair)
            for e, val in printed_log_derivative(pair, a).items():
                note(f"logIV{pair}:{e}", _rel(s.coeff(e), val))
    for pair in ("plus", "minus"):
        s = log_derivative_series(EquationSpec.pii(0), pair)
        for e, val in printed_log_derivative(pair, 0).items():
            note(f"logII{pair}:{e}", _rel(s.coeff(e), val))
    bad = {k: v for k, v in worst.items() if v > tol}
    return Check("2", "asymptotic print agreement", not bad,
                 {"maxRel": max(worst.values()), "failing": bad, "tol": tol, "samples": n},
                 time.time() - t0, 5.0)


def check_exact_solutions(tol=1e-10):
    import sympy as sp
    from .special import piv_exact_residual, weber_hermite
    t0 = time.time()
    z = sp.Symbol("z")
    R = sp.Rational
    exact = {}
    for name, a, b, w in (("-2z", 0, -2, -2 * z), ("-2z/3", 0, R(-2, 9), -R(2, 3) * z),
                          ("-1/z", -2, -2, -1 / z)):
        exact[name] = str(piv_exact_residual(a, b, w))
    x = np.linspace(-10, 10, 21)
    G = (x[:, None] + 1j * x[None, :]).ravel()
    G = G[np.abs(G) <= 10]
    wh = {}
    for g in (1, 2, 3):
        sol = weber_hermite(g, init=(1.0, 0.3))
        m = 0.0
        for zz in G:
            try:
                j = sol.jet(zz)
            except ZeroDivisionError:
                continue
            m = max(m, ode_residual(sol.eq, zz, j.w, j.w1, j.w2))
        wh[g] = m
    ok = all(v == "0" for v in exact.values()) and max(wh.values()) <= tol
    return Check("3", "exact-solution residuals", ok,
                 {"exactResiduals": exact, "weberHermiteMax": wh, "tol": tol},
                 time.time() - t0, 5.0)


def check_backlund(n=100, seed=2, tol=1e-12):
    from .backlund import ParameterState, biv_forward, biv_inverse, forward_params
    t0 = time.time()
    rng = np.random.default_rng(seed)
    worst = 0.0
    law = True
    for _ in range(n):
        ps = ParameterState(_rc(rng), _rc(rng))
        eq = ps.eq()
        j = Jet(_rc(rng, 3), _rc(rng, 3), _rc(rng, 3))
        jt, pt = biv_forward(j, ps)
        jb, pb = biv_inverse(jt, pt)
        worst = max(worst, abs(jb.w - j.w) / abs(j.w), abs(jb.w1 - j.w1) / abs(j.w1))
        # the parameter law is checked on dyadic values, where it is exact in floats
        a = float(rng.integers(-64, 64)) / 8 + 1j * float(rng.integers(-64, 64)) / 8
        g = float(rng.integers(-64, 64)) / 8 + 1j * float(rng.integers(-64, 64)) / 8
        q = ParameterState(a, g)
        f1 = forward_params(q)
        f2 = forward_params(f1)
        law &= (f1.alpha - f1.gamma == -(a - g)) and f2.alpha == a + 1 and f2.gamma == g + 1
        law &= abs(pb.alpha - eq.alpha) < 1e-15 * (1 + abs(eq.alpha))
    return Check("4", "Backlund round trip and parameter law", worst <= tol and law,
                 {"roundTripMax": worst, "parameterLawExact": bool(law), "tol": tol},
                 time.time() - t0, 1.0)


def check_pole_passage():
    from .integrate import PathSpec, integrate
    from .localseries import PoleSeed, laurent_w, seed_jet
    t0 = time.time()
    eq = EquationSpec.pi()
    sd = PoleSeed(eq, 1.0, 1, 0j)
    j = seed_jet(sd, 0.1)
    tr = integrate(eq, j, PathSpec.circle(1.0, 0.1, 1.0, 0.0), tol=1e-12)
    res = complex(tr.IW[-1]) / (2j * math.pi)
    half = integrate(eq, j, PathSpec.circle(1.0, 0.1, 0.5, 0.0), tol=1e-12)
    S = laurent_w(sd, 24)
    zf = complex(half.z[-1])
    anti = max(_rel(half.w[-1], S(zf)), _rel(half.w1[-1], S(zf, 1)))
    ok = abs(res + 1) <= 1e-8 and anti <= 1e-7
    return Check("5", "pole passage", ok,
                 {"contourIntegralOfW": res, "residueError": abs(res + 1),
                  "antipodalRel": anti}, time.time() - t0, 5.0)


def check_string_synthetic(K=10 ** 6):
    from .polefield import string_recursion_sim
    t0 = time.time()
    out = string_recursion_sim(1j * math.pi, 1, 1.0, K)
    ratio = complex(out["ratio"])
    cc = float(out["countCoeff"])
    okr = abs(ratio - 1) <= 1e-2
    okc = abs(cc * 2 * math.pi - 1) <= 0.02
    return Check("6", "string law, synthetic", okr and okc,
                 {"ratio": ratio, "countCoeff": cc, "target": 1 / (2 * math.pi)},
                 time.time() - t0, 10.0)


# ---------------------------------------------------------------------------
# 7-10: harvested Weber-Hermite field


@lru_cache(maxsize=4)
def weber_hermite_field(r0=0.0, r1=30.0):
    from .polefield import sweep
    from .special import weber_hermite
    sol = weber_hermite(1.0, init=(1.0, 0.0))
    t0 = time.time()
    cat = sweep(None, sol, {"r0": r0, "r1": r1})
    return sol, cat, time.time() - t0


def check_strings_harvested():
    from .polefield import cluster_strings, lemma_checks
    t0 = time.time()
    sol, cat, _ = weber_hermite_field(5.0, 30.0)
    strings, unchained = cluster_strings(cat)
    rows = []
    ok = len(strings) == 4
    for s in strings:
        om_ref = 1j * math.pi * (1 if s.omega.imag >= 0 else -1)
        lc = lemma_checks(s, cat, om_ref)
        ray = min(((2 * k + 1) * math.pi / 4 for k in range(4)),
                  key=lambda r: abs(cmath.phase(cmath.exp(1j * (s.theta - r)))))
        ang = abs(cmath.phase(cmath.exp(1j * (s.theta - ray))))
        om_err = abs(abs(s.omega) / math.pi - 1)
        cc_err = abs(s.countCoeff * 2 * math.pi - 1)
        rows.append({"n": len(s.memberIndices), "theta": s.theta, "rayError": ang,
                     "omegaRelError": om_err, "countCoeffRelError": cc_err,
                     "lemmaAngleError": lc["angleError"]})
        ok &= ang <= 0.1 and om_err <= 0.10 and cc_err <= 0.15
    return Check("7", "string law, harvested", ok,
                 {"poles": len(cat.poles), "strings": rows, "unchained": len(unchained)},
                 time.time() - t0, 300.0)


def check_counting():
    from .polefield import counting_function, sweep
    from .special import airy_solution
    t0 = time.time()
    airy = sweep(None, airy_solution("plus", init=(1.0, 0.0)), {"r0": 0.0, "r1": 20.0})
    ca = counting_function(airy)
    _, cat, _ = weber_hermite_field()
    cw = counting_function(cat)
    nu = cw["nu"]
    ok = (abs(ca["exponent"] - 1.5) <= 0.15 and abs(cw["exponent"] - 2.0) <= 0.2
          and min(abs(nu - 2), abs(nu - 4)) <= 0.2)
    return Check("8", "counting exponents", ok,
                 {"airyExponent": ca["exponent"], "weberHermiteExponent": cw["exponent"],
                  "nu": nu}, time.time() - t0, 300.0)


def check_rescale():
    from .polefield import accessor_for
    from .rescale import (RescaleFrame, circle_grid, cluster_estimate, limit_ode_residual,
                          pole_cluster_value, rescale_window)
    t0 = time.time()
    sol, cat, _ = weber_hermite_field()
    acc = accessor_for(sol)
    outer = sorted(cat.poles, key=lambda s: -abs(s.p))[:10]

    def resid(sd):
        fr = RescaleFrame.for_kind("PIV", sd.p, circle_grid(0.5, 32))
        _, w, w1 = rescale_window(acc, fr)
        return limit_ode_residual("iv", w, w1, pole_cluster_value(sd))

    rows = [(abs(sd.p), resid(sd)) for sd in outer]
    # the ten outermost poles share |p| to within a disc, so the trend in |p|
    # is read off poles spread over the whole field (every 25th from |p| = 5)
    spread = [sd for sd in sorted(cat.poles, key=lambda s: abs(s.p)) if abs(sd.p) >= 5][::25]
    trend = [(abs(sd.p), resid(sd)) for sd in spread] + rows
    rad = np.log([p for p, _ in trend])
    slope = float(np.polyfit(rad, np.log([r for _, r in trend]), 1)[0])
    res = np.array([r for _, r in rows])
    ok_res = bool(np.all(res[np.array([p for p, _ in rows]) >= 25] <= 0.1)) and slope < 0
    vals = []
    for th in np.linspace(0, 2 * math.pi, 16, endpoint=False) + 0.1:
        est = cluster_estimate(acc, th, (10.0, 30.0), cat.poles, n=30)
        vals.extend(np.abs(est.values()).tolist())
    vals.extend(abs(pole_cluster_value(s)) for s in outer)
    frac = float(np.mean(np.array(vals) <= 0.05))
    ok = ok_res and frac == 1.0
    return Check("9", "rescaling limit", ok,
                 {"residuals": rows, "logLogSlope": slope, "trend": trend, "clusterFractionWithin0.05": frac,
                  "clusterMax": max(vals)}, time.time() - t0, 120.0)


def check_residues(r=25.0):
    from .backlund import delta_of_signature
    from .polefield import cluster_strings, infer_signature, residue_ledger, table1_residue
    t0 = time.time()
    sol, cat, _ = weber_hermite_field()
    cnt = residue_ledger(cat, r, "count")
    con = residue_ledger(cat, r, "contour", solution=sol)
    agree = abs(con["delta"] - cnt["delta"]) <= 0.1 * abs(cnt["delta"])
    sig = infer_signature(sol, 12.0, cat)
    strings, _ = cluster_strings(cat)
    signs = [(s.theta, s.eps, table1_residue(sig, s.theta)) for s in strings]
    table = all(e == t for _, e, t in signs) and len(signs) > 0
    return Check("10", "residue bookkeeping", agree and table,
                 {"countDelta": cnt["delta"], "contourDelta": con["delta"],
                  "signature": str(sig), "signatureDelta": delta_of_signature(sig)[0],
                  "strings": signs}, time.time() - t0, 120.0)


# ---------------------------------------------------------------------------
# 11-12: chains


def check_first_order(n=50, seed=3, tol=1e-8):
    from .backlund import chain_solution
    from .polefield import first_order_residual
    from .special import weber_hermite
    t0 = time.time()
    ch = chain_solution(weber_hermite(1.0, init=(1.0, 0.3)), 1)
    rng = np.random.default_rng(seed)
    Z = rng.uniform(-4, 4, n) + 1j * rng.uniform(-4, 4, n)
    jets = [ch.jet(z) for z in Z]
    r = first_order_residual(jets, ch.eq.alpha)
    gamma = ch.params[-1].gamma
    return Check("11", "first-order equation", r <= tol and gamma == -1,
                 {"residual": r, "gamma": gamma, "alpha": ch.eq.alpha, "tol": tol},
                 time.time() - t0, 60.0)


def check_deficiency(radii=(15.0, 20.0, 25.0, 30.0)):
    from .backlund import RotatedSolution, chain_solution
    from .polefield import sweep, zero_catalog_and_deficiency
    from .special import weber_hermite
    t0 = time.time()
    # order 2 from alpha0=-2 ends at alpha=-3, beta=0; the rotation gives alpha=3
    sol = RotatedSolution(chain_solution(weber_hermite(1.0, init=(1.0, 0.0)), 2))
    cat = sweep(sol.eq, sol, {"r0": 0.0, "r1": max(radii)}, {"zeros": True})
    d = zero_catalog_and_deficiency(cat, list(radii))
    est = d["estimate"]
    trend = [row["deficiency"] for row in d["rows"]]
    ok = abs(est - 1 / 3) <= 0.05
    return Check("12", "deficiency of zero", ok,
                 {"alpha": sol.eq.alpha, "beta": sol.eq.beta, "estimate": est, "trend": trend,
                  "poles": len(cat.poles), "zeros": len(cat.zeros)},
                 time.time() - t0, 600.0)


SUITES = {
    "laurent": check_laurent,
    "asymptotic": check_asymptotic,
    "exact": check_exact_solutions,
    "backlund": check_backlund,
    "passage": check_pole_passage,
    "strings-synthetic": check_string_synthetic,
    "strings": check_strings_harvested,
    "counting": check_counting,
    "rescale": check_rescale,
    "residues": check_residues,
    "first-order": check_first_order,
    "deficiency": check_deficiency,
}


def run(names=None):
    names = names or list(SUITES)
    return [SUITES[n]() for n in names]
