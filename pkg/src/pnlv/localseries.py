"""Laurent expansions at poles and asymptotic expansions at infinity.

All coefficients are numeric at fixed parameters.  Every expansion lives on
an exponent lattice k*step (k integer): around a pole the variable is
t = z - p with step 1, at infinity the variable is z with a negative step
(-1 or -1/2; the half step is the z = t^2 substitution in disguise).  The
unknown coefficients are found order by order: the residual of the equation
is affine in the newest coefficient at its leading slot, so two residual
evaluations fix it.  At the resonant slot of a Laurent expansion the
coefficient is free and is set to h.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .eqcore import EquationSpec, Jet, disc_radius
from .errors import FitFailed, OffsetOutsideValidity, UnsupportedFamily, WrongParameters

FAMILY_TAGS = ("I", "IIa", "IIb", "IVa", "IVb", "IVcPlus", "IVcMinus")

FIT_TOL = 1e-6
MAX_ASYMPTOTIC_N = 24


# ---------------------------------------------------------------------------
# lattice series arithmetic


class _Lattice:
    """Truncated series sum_k a_k x^(k*step) with k <= K."""

    def __init__(self, step, K):
        self.step = Fraction(step)
        self.K = K
        self.inv_step = int(1 / self.step)

    def ser(self, k0, a):
        a = np.asarray(a, dtype=complex)
        n = self.K - k0 + 1
        if n <= 0:
            return (k0, np.zeros(0, dtype=complex))
        return (k0, a[:n])

    def const(self, c):
        return self.ser(0, [c])

    def mono(self, e, c=1.0):
        k = Fraction(e) / self.step
        assert k.denominator == 1
        return self.ser(int(k), [c])

    def add(self, *terms):
        terms = [t for t in terms if len(t[1])]
        if not terms:
            return (0, np.zeros(0, dtype=complex))
        k0 = min(t[0] for t in terms)
        out = np.zeros(self.K - k0 + 1, dtype=complex)
        for t0, a in terms:
            out[t0 - k0:t0 - k0 + len(a)] += a
        return (k0, out)

    def scale(self, A, c):
        return (A[0], A[1] * c)

    def mul(self, A, B):
        if not len(A[1]) or not len(B[1]):
            return (A[0] + B[0], np.zeros(0, dtype=complex))
        return self.ser(A[0] + B[0], np.convolve(A[1], B[1]))

    def deriv(self, A):
        k0, a = A
        ks = k0 + np.arange(len(a))
        return self.ser(k0 - self.inv_step, a * (ks * float(self.step)))

    def integ(self, A):
        k0, a = A
        ks = k0 + np.arange(len(a))
        e = ks * float(self.step) + 1.0
        out = np.zeros_like(a)
        ok = np.abs(e) > 1e-12
        out[ok] = a[ok] / e[ok]
        return self.ser(k0 + self.inv_step, out), (a[~ok].sum() if (~ok).any() else 0j)

    def coef(self, A, k):
        i = k - A[0]
        if 0 <= i < len(A[1]):
            return A[1][i]
        return 0j


def _solve(lat, F, klead, lead, kmax, resonance=None):
    """Order-by-order solve of F(w) = 0 for coefficients up to index kmax."""
    resonance = resonance or {}
    a = np.zeros(kmax - klead + 1, dtype=complex)
    for k, c in lead.items():
        a[k - klead] = c
    sigma = None
    known = max(lead)
    for k in range(known + 1, kmax + 1):
        i = k - klead
        if k in resonance:
            a[i] = resonance[k]
            continue
        a[i] = 0.0
        R0 = F((klead, a.copy()))
        if sigma is None:
            a[i] = 1.0
            diff = F((klead, a.copy()))[1] - R0[1]
            nz = np.nonzero(np.abs(diff) > 1e-13 * (1 + np.abs(diff).max()))[0]
            sigma = R0[0] + int(nz[0]) - k
        j = k + sigma
        c0 = lat.coef(R0, j)
        # the residual is affine in a[i]; probe with a step of the size of c0
        step = max(1.0, abs(c0))
        a[i] = step
        d = (lat.coef(F((klead, a.copy())), j) - c0) / step
        a[i] = 0.0
        if abs(d) < 1e-12:
            raise ValueError(f"unexpected resonance at lattice index {k}")
        a[i] = -c0 / d
    return a


def _residual_fn(lat, eq, Z, mode="w"):
    alpha, beta = eq.alpha, eq.beta

    if mode == "logIV":
        Z2 = lat.mul(Z, Z)

        def F(L):
            return lat.add(lat.scale(lat.deriv(L), 2), lat.mul(L, L),
                           lat.scale(Z2, -4), lat.const(4 * alpha))
        return F
    if mode == "logII":
        def F(L):
            return lat.add(lat.deriv(L), lat.mul(L, L), lat.scale(Z, -1))
        return F

    if eq.kind == "PI":
        def F(w):
            return lat.add(lat.deriv(lat.deriv(w)), lat.scale(Z, -1),
                           lat.scale(lat.mul(w, w), -6))
    elif eq.kind == "PII":
        def F(w):
            w2 = lat.mul(w, w)
            return lat.add(lat.deriv(lat.deriv(w)), lat.const(-alpha),
                           lat.scale(lat.mul(Z, w), -1),
                           lat.scale(lat.mul(w2, w), -2))
    else:
        Z2 = lat.mul(Z, Z)
        q = lat.add(Z2, lat.const(-alpha))

        def F(w):
            w1 = lat.deriv(w)
            w2d = lat.deriv(w1)
            s2 = lat.mul(w, w)
            s3 = lat.mul(s2, w)
            return lat.add(lat.scale(lat.mul(w, w2d), 2),
                           lat.scale(lat.mul(w1, w1), -1),
                           lat.scale(lat.mul(s2, s2), -3),
                           lat.scale(lat.mul(Z, s3), -8),
                           lat.scale(lat.mul(q, s2), -4),
                           lat.const(-2 * beta))
    return F


def _first_integral_series(lat, eq, Z, w):
    """W from W' (termwise integral) with the constant fixed algebraically."""
    w1 = lat.deriv(w)
    if eq.kind == "PI":
        Wp = w
    elif eq.kind == "PII":
        Wp = lat.mul(w, w)
    else:
        Wp = lat.add(lat.mul(w, w), lat.scale(lat.mul(Z, w), 2))
    W0, logc = lat.integ(Wp)
    s2 = lat.mul(w, w)
    if eq.kind == "PI":
        N = lat.scale(lat.add(lat.scale(lat.mul(s2, w), 4), lat.scale(lat.mul(Z, w), 2),
                              lat.scale(lat.mul(w1, w1), -1)), 0.5)
        C = lat.coef(N, 0) - lat.coef(W0, 0)
    elif eq.kind == "PII":
        N = lat.add(lat.mul(s2, s2), lat.mul(Z, s2), lat.scale(w, 2 * eq.alpha),
                    lat.scale(lat.mul(w1, w1), -1))
        C = lat.coef(N, 0) - lat.coef(W0, 0)
    else:
        q = lat.add(lat.mul(Z, Z), lat.const(-eq.alpha))
        N = lat.add(lat.mul(s2, s2), lat.scale(lat.mul(Z, lat.mul(s2, w)), 4),
                    lat.scale(lat.mul(q, s2), 4), lat.const(-2 * eq.beta),
                    lat.scale(lat.mul(w1, w1), -1))
        R = lat.add(N, lat.scale(lat.mul(w, W0), -4))
        kl = w[0] + int(np.nonzero(np.abs(w[1]) > 0)[0][0])
        C = lat.coef(R, kl) / (4 * lat.coef(w, kl))
    return lat.add(W0, lat.const(C)), logc


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class PoleSeed:
    eq: EquationSpec
    p: complex
    eps: int = 1
    h: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "p", complex(self.p))
        object.__setattr__(self, "h", complex(self.h))
        if self.eq.kind == "PI":
            object.__setattr__(self, "eps", 1)
        elif self.eps not in (1, -1):
            raise ValueError("eps must be +1 or -1")

    def to_dict(self):
        return {"p": {"re": self.p.real, "im": self.p.imag},
                "eps": None if self.eq.kind == "PI" else self.eps,
                "h": {"re": self.h.real, "im": self.h.imag}}


@dataclass(frozen=True)
class AsymptoticFamily:
    tag: str
    squareRootBranch: int = 1

    def __post_init__(self):
        if self.tag not in FAMILY_TAGS:
            raise ValueError(f"unknown family {self.tag!r}")
        if self.squareRootBranch not in (1, -1):
            raise ValueError("squareRootBranch must be +1 or -1")


@dataclass
class SeriesExpansion:
    """Truncated expansion sum_i coeffs[i] * x^(leadingExponent + i*step).

    Around a pole x = z - center and the exponents increase; at infinity
    x = z and the exponents decrease by exponentStep per slot.
    """
    variable: str
    exponentStep: Fraction
    leadingExponent: Fraction
    coeffs: np.ndarray
    truncationOrder: int
    center: Optional[complex] = None
    label: dict = field(default_factory=dict)

    @property
    def signed_step(self):
        return self.exponentStep if self.variable == "pole" else -self.exponentStep

    def exponents(self):
        return [self.leadingExponent + i * self.signed_step for i in range(len(self.coeffs))]

    def coeff(self, e):
        i = (Fraction(e) - self.leadingExponent) / self.signed_step
        if i.denominator != 1 or not 0 <= i < len(self.coeffs):
            return 0j
        return complex(self.coeffs[int(i)])

    def _x(self, z):
        return z - self.center if self.variable == "pole" else z

    def __call__(self, z, deriv=0):
        x = complex(self._x(z))
        logx = cmath.log(x)
        tot = 0j
        for c, e in zip(self.coeffs, self.exponents()):
            if c == 0:
                continue
            ef = float(e)
            f = 1.0
            for j in range(deriv):
                f *= ef - j
            if f == 0:
                continue
            tot += c * f * cmath.exp((ef - deriv) * logx)
        return tot

    def eval_many(self, z, deriv=0):
        x = np.asarray(self._x(np.asarray(z, dtype=complex)), dtype=complex)
        logx = np.log(x)
        tot = np.zeros_like(x)
        for c, e in zip(self.coeffs, self.exponents()):
            if c == 0:
                continue
            ef = float(e)
            f = 1.0
            for j in range(deriv):
                f *= ef - j
            if f:
                tot = tot + c * f * np.exp((ef - deriv) * logx)
        return tot

    def first_omitted_exponent(self):
        return self.leadingExponent + len(self.coeffs) * self.signed_step

    def to_dict(self):
        d = dict(self.label)
        d.update({
            "exponentStep": str(self.exponentStep),
            "leadingExponent": str(self.leadingExponent),
            "coeffs": [{"re": float(c.real), "im": float(c.imag)} for c in self.coeffs],
            "truncationOrder": int(self.truncationOrder),
        })
        if self.variable == "pole":
            d["center"] = {"re": self.center.real, "im": self.center.imag}
        return d


# ---------------------------------------------------------------------------
# Laurent expansions

_POLE_ORDER = {"PI": 2, "PII": 1, "PIV": 1}
_RESONANT_POWER = {"PI": 4, "PII": 3, "PIV": 2}
_MARGIN = 10


def _laurent_lattice(seed, N):
    lat = _Lattice(1, N + _MARGIN)
    Z = lat.ser(0, [seed.p, 1.0])
    return lat, Z


def _laurent_w_raw(seed, N):
    eq = seed.eq
    m = _POLE_ORDER[eq.kind]
    lat, Z = _laurent_lattice(seed, N)
    F = _residual_fn(lat, eq, Z)
    lead = {-m: 1.0 if eq.kind == "PI" else float(seed.eps)}
    a = _solve(lat, F, -m, lead, N, {_RESONANT_POWER[eq.kind]: seed.h})
    return lat, Z, (-m, a)


def laurent_w(seed: PoleSeed, N: int = 16) -> SeriesExpansion:
    """Laurent expansion of w at the pole, through the power (z-p)^N."""
    if N < 4:
        raise ValueError("N must be at least 4 to reach the free coefficient")
    lat, Z, w = _laurent_w_raw(seed, N)
    return SeriesExpansion("pole", Fraction(1), Fraction(w[0]), w[1], N, seed.p,
                           {"seed": _seed_label(seed)})


def laurent_W(seed: PoleSeed, N: int = 16) -> SeriesExpansion:
    """Laurent expansion of the first integral W at the pole."""
    if N < 4:
        raise ValueError("N must be at least 4 to reach the free coefficient")
    lat, Z, w = _laurent_w_raw(seed, N + 2)
    W, _ = _first_integral_series(lat, seed.eq, Z, w)
    k0, a = W
    nz = np.nonzero(np.abs(a) > 0)[0]
    # the integral starts one power above w; drop spurious leading zeros
    first = max(0, min(int(nz[0]) if len(nz) else 0, -1 - k0))
    k0, a = k0 + first, a[first:]
    a = a[:N - k0 + 1]
    return SeriesExpansion("pole", Fraction(1), Fraction(k0), a, N, seed.p,
                           {"seed": _seed_label(seed)})


def _seed_label(seed):
    d = seed.to_dict()
    d["eq"] = seed.eq.to_dict()
    return d


def validity_radius(series: SeriesExpansion) -> float:
    """Half the root-test estimate of the convergence radius."""
    c = np.abs(series.coeffs)
    m = -int(series.leadingExponent)
    n = len(c)
    est = []
    for i in range(n // 2, n):
        k = i  # distance in slots from the leading term
        if c[i] > 0 and k > 0:
            est.append((c[i] / max(c[0], 1e-300)) ** (1.0 / k))
    if not est:
        return math.inf
    R = 1.0 / max(est)
    return 0.5 * R


def seed_jet(seed: PoleSeed, offset: complex, N: int = 24, check=True) -> Jet:
    """Jet of the local solution at z = p + offset (with w'' for PIV)."""
    offset = complex(offset)
    if offset == 0:
        raise OffsetOutsideValidity("offset must be non-zero")
    S = laurent_w(seed, N)
    if check:
        rho = validity_radius(S)
        if abs(offset) > rho:
            raise OffsetOutsideValidity(
                f"|offset|={abs(offset):.3g} exceeds validity radius {rho:.3g}")
    z = seed.p + offset
    w2 = S(z, 2) if seed.eq.kind == "PIV" else None
    return Jet(z, S(z), S(z, 1), w2)


# ---------------------------------------------------------------------------
# pole detection


def _model_residuals(eq, p, eps, h, zs, ws, w1s, N):
    S = laurent_w(PoleSeed(eq, p, eps, h), N)
    mw = S.eval_many(zs)
    mw1 = S.eval_many(zs, 1)
    return np.concatenate([(mw - ws) / np.abs(ws), (mw1 - w1s) / np.abs(w1s)])


def pole_estimate(eq, jet):
    """Leading-order pole location and residue sign from one jet near a pole."""
    if eq.kind == "PI":
        p = jet.z + 2 * jet.w / jet.w1
        return p, 1
    p = jet.z + jet.w / jet.w1
    eps = 1 if (jet.w * (jet.z - p)).real >= 0 else -1
    return p, eps


def detect_pole(eq: EquationSpec, samples, N: int = 14, fit_tol: float = FIT_TOL,
                h0=None) -> PoleSeed:
    """Least-squares fit of (p, eps, h) to jets sampled near a pole."""
    from scipy.optimize import least_squares

    samples = list(samples)
    if len(samples) < 3:
        raise FitFailed("need at least three samples")
    zs = np.array([s.z for s in samples], dtype=complex)
    ws = np.array([s.w for s in samples], dtype=complex)
    w1s = np.array([s.w1 for s in samples], dtype=complex)
    best = samples[int(np.argmax(np.abs(ws)))]
    p0, eps = pole_estimate(eq, best)
    if h0 is None:
        h0 = 0j
    scale = max(np.abs(zs - p0).max(), 1e-300)

    def fun(x):
        p = complex(x[0], x[1])
        h = complex(x[2], x[3])
        r = _model_residuals(eq, p, eps, h, zs, ws, w1s, N)
        return np.concatenate([r.real, r.imag])

    x0 = [p0.real, p0.imag, complex(h0).real, complex(h0).imag]
    sol = least_squares(fun, x0, method="lm", x_scale=[scale, scale, 1, 1],
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
    res = np.sqrt(np.mean(sol.fun ** 2))
    if not np.isfinite(res) or res > fit_tol:
        raise FitFailed(f"Laurent fit residual {res:.3g} above {fit_tol:.1g}")
    return PoleSeed(eq, complex(sol.x[0], sol.x[1]), eps, complex(sol.x[2], sol.x[3]))


def h_from_jet(eq, p, eps, jet, N=16, h0=0j, iters=8):
    """Free coefficient h matching w at one jet, for a known pole p."""
    h = complex(h0)
    for _ in range(iters):
        f0 = laurent_w(PoleSeed(eq, p, eps, h), N)(jet.z) - jet.w
        dh = 1e-3 * (1 + abs(h))
        f1 = laurent_w(PoleSeed(eq, p, eps, h + dh), N)(jet.z) - jet.w
        d = (f1 - f0) / dh
        if d == 0:
            break
        step = f0 / d
        h -= step
        if abs(step) <= 1e-14 * (1 + abs(h)):
            break
    return h


# ---------------------------------------------------------------------------
# asymptotic expansions at infinity

_FAMILY_EQ = {"I": "PI", "IIa": "PII", "IIb": "PII", "IVa": "PIV", "IVb": "PIV",
              "IVcPlus": "PIV", "IVcMinus": "PIV"}


def _family_setup(family, eq):
    tag = family.tag
    if _FAMILY_EQ[tag] != eq.kind:
        raise UnsupportedFamily(f"family {tag} does not belong to {eq.kind}")
    s = family.squareRootBranch
    if tag == "I":
        return Fraction(-1, 2), -1, s * cmath.sqrt(-1 / 6)
    if tag == "IIa":
        if eq.alpha == 0:
            raise UnsupportedFamily("IIa with alpha=0 is w~0; use log_derivative_series")
        return Fraction(-1), 1, -eq.alpha
    if tag == "IIb":
        return Fraction(-1, 2), -1, s * cmath.sqrt(-1 / 2)
    if tag == "IVa":
        return Fraction(-1), -1, -2 / 3
    if tag == "IVb":
        return Fraction(-1), -1, -2.0
    if eq.gamma == 0:
        raise UnsupportedFamily("IVc with gamma=0 is w~0; use log_derivative_series")
    sign = 1 if tag == "IVcPlus" else -1
    return Fraction(-1), 1, sign * eq.gamma


def _asymptotic_raw(family, eq, N):
    if N > MAX_ASYMPTOTIC_N:
        raise ValueError(f"N must not exceed {MAX_ASYMPTOTIC_N}")
    step, klead, c0 = _family_setup(family, eq)
    kmax = klead + N
    lat = _Lattice(step, kmax + _MARGIN)
    Z = lat.mono(1)
    F = _residual_fn(lat, eq, Z)
    a = _solve(lat, F, klead, {klead: c0}, kmax)
    return lat, Z, (klead, a), step


def asymptotic_series(family: AsymptoticFamily, eq: EquationSpec, N: int = 12) -> SeriesExpansion:
    """Expansion of w at infinity for the given family; N slots after the leading one."""
    lat, Z, w, step = _asymptotic_raw(family, eq, N)
    return SeriesExpansion("infinity", -step, Fraction(w[0]) * step, w[1], N, None,
                           {"family": family.tag, "squareRootBranch": family.squareRootBranch})


def asymptotic_series_W(family: AsymptoticFamily, eq: EquationSpec, N: int = 12) -> SeriesExpansion:
    """Expansion of the first integral W at infinity for the given family."""
    lat, Z, w, step = _asymptotic_raw(family, eq, N)
    W, logc = _first_integral_series(lat, eq, Z, w)
    k0, a = W
    nz = np.nonzero(np.abs(a) > 1e-14 * np.abs(a).max())[0]
    first = int(nz[0]) if len(nz) else 0
    k0, a = k0 + first, a[first:first + N + 1]
    return SeriesExpansion("infinity", -step, Fraction(k0) * step, a, N, None,
                           {"family": family.tag, "squareRootBranch": family.squareRootBranch,
                            "quantity": "W"})


def log_derivative_series(eq: EquationSpec, sectorPair: str, N: int = 12) -> SeriesExpansion:
    """Expansion of w'/w where w is exponentially small.

    PIV with beta=0: sectorPair "02" (sectors 0 and 2, leading -2z) or "13"
    (leading +2z).  PII with alpha=0: "plus" or "minus" for the sign of the
    leading sqrt(z).
    """
    if eq.kind == "PIV":
        if eq.beta != 0:
            raise WrongParameters("log-derivative expansion needs beta = 0")
        if sectorPair not in ("02", "13"):
            raise WrongParameters("sectorPair must be '02' or '13' for PIV")
        step, klead = Fraction(-1), -1
        c0 = -2.0 if sectorPair == "02" else 2.0
        mode = "logIV"
    elif eq.kind == "PII":
        if eq.alpha != 0:
            raise WrongParameters("log-derivative expansion needs alpha = 0")
        if sectorPair not in ("plus", "minus"):
            raise WrongParameters("sectorPair must be 'plus' or 'minus' for PII")
        step, klead = Fraction(-1, 2), -1
        c0 = 1.0 if sectorPair == "plus" else -1.0
        mode = "logII"
    else:
        raise WrongParameters("log-derivative expansion exists for PII and PIV only")
    if N > MAX_ASYMPTOTIC_N:
        raise ValueError(f"N must not exceed {MAX_ASYMPTOTIC_N}")
    kmax = klead + N
    lat = _Lattice(step, kmax + _MARGIN)
    Z = lat.mono(1)
    F = _residual_fn(lat, eq, Z, mode)
    a = _solve(lat, F, klead, {klead: c0}, kmax)
    return SeriesExpansion("infinity", -step, Fraction(klead) * step, a, N, None,
                           {"family": "logDerivative", "sectorPair": sectorPair})
