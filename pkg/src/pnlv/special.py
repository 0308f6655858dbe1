"""Reference solutions: Riccati (Weber-Hermite, Airy) families, rational
solutions of IV, and a Hastings-McLeod shooter for II with alpha = 0.

A Riccati solution is w = -s u'/u with u entire.  Close to the origin u comes
from its Taylor recurrence; further out the Riccati equation itself is
integrated along rays.  The Riccati flow is first order and passes through
poles of w by switching to v = 1/w, so no pole hopping is needed.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .eqcore import EquationSpec, Jet
from .errors import BracketLost, DegenerateU, NoneKnown

SERIES_RADIUS = 2.0
_SERIES_MAX = 400


@lru_cache(maxsize=64)
def _taylor(family, s, gamma, init, n):
    a = np.zeros(n, dtype=complex)
    a[0], a[1] = init
    if family == "WH":
        for k in range(n - 2):
            a[k + 2] = s * (2 * k - 2 * gamma) * a[k] / ((k + 1) * (k + 2))
    else:
        for k in range(n - 2):
            prev = a[k - 1] if k >= 1 else 0
            a[k + 2] = -prev / (2 * (k + 1) * (k + 2))
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LinearizedSolution:
    """w = -s u'/u for a solution u of the linear equation behind a Riccati flow.

    family "WH":   w' = 2 gamma + s (2 z w + w^2),  u'' - 2 s z u' + 2 s gamma u = 0
    family "AIRY": w' = s (z/2 + w^2),              u'' + (z/2) u = 0
    init = (u(0), u'(0)).
    """
    eq: EquationSpec
    family: str
    s: int
    gamma: complex
    init: tuple

    # -- u by Taylor series -------------------------------------------------
    def _coeffs(self, n):
        return _taylor(self.family, self.s, complex(self.gamma), tuple(self.init), n)

    def u(self, z, deriv=0):
        z = complex(z)
        a = self._coeffs(_SERIES_MAX)
        k = np.arange(_SERIES_MAX)
        if deriv == 0:
            terms = a * z ** k
        else:
            terms = (a * k)[1:] * z ** k[:-1]
        tot = terms.sum()
        return complex(tot)

    # -- Riccati right-hand side --------------------------------------------
    def riccati(self, z, w):
        if self.family == "WH":
            return 2 * self.gamma + self.s * (2 * z * w + w * w)
        return self.s * (z / 2 + w * w)

    def riccati_2(self, z, w, w1):
        if self.family == "WH":
            return self.s * (2 * w + 2 * z * w1 + 2 * w * w1)
        return self.s * (0.5 + 2 * w * w1)

    def kernel_params(self):
        if self.family == "WH":
            return kernels.KIND["WH"], [2 * self.gamma, complex(self.s)]
        return kernels.KIND["AIRY"], [0j, complex(self.s)]

    # -- evaluation ---------------------------------------------------------
    def _state_series(self, z):
        """(y, flag) with y = w (flag 0) or 1/w (flag 1) from the u series."""
        u0 = self.u(z)
        u1 = self.u(z, 1)
        if abs(u0) >= 0.5 * abs(u1):
            return -self.s * u1 / u0, 0
        return -u0 / (self.s * u1), 1

    def state(self, z, tol=1e-13):
        """(y, flag) at z: w=y if flag==0 else w=1/y."""
        z = complex(z)
        r = abs(z)
        if r <= SERIES_RADIUS:
            return self._state_series(z)
        z0 = SERIES_RADIUS * z / r
        y0, f0 = self._state_series(z0)
        kind, par = self.kernel_params()
        _, Y, F, status, _ = kernels.run_path(kind, par, kernels.SEGMENT, [z0, z], [y0],
                                              flag=f0, tol=tol)
        if status != kernels.STATUS_DONE:
            raise DegenerateU(f"Riccati integration failed at {z}")
        return complex(Y[-1, 0]), int(F[-1])

    def jet(self, z, tol=1e-13):
        y, f = self.state(z, tol)
        if f == 1:
            if y == 0:
                raise ZeroDivisionError("z is a pole")
            y = 1 / y
        w1 = self.riccati(z, y)
        return Jet(complex(z), y, w1, self.riccati_2(z, y, w1))

    def w(self, z):
        return self.jet(z).w

    def ray(self, theta, r1, tol=1e-12, hmax=None, r0=0.0, aug=True):
        """Samples of the Riccati state along z = r e^{i theta}, r0 <= r <= r1.

        Returns (z, y, flags, intw) where w = y or 1/y according to flags and
        intw is the integral of w from the first sample (None with aug=False;
        a ray through a pole has no such integral).
        """
        e = cmath.exp(1j * theta)
        za = r0 * e
        zb = r1 * e
        if r0 <= SERIES_RADIUS:
            y0, f0 = self._state_series(za)
        else:
            y0, f0 = self.state(za, tol=min(tol, 1e-13))
        kind, par = self.kernel_params()
        L = abs(zb - za)
        hm = np.inf if hmax is None else hmax / L
        y_init = [y0, 0j] if aug else [y0]
        s, Y, F, status, _ = kernels.run_path(kind, par, kernels.SEGMENT, [za, zb],
                                              y_init, flag=f0, tol=tol, hmax=hm, aug=int(aug))
        if status != kernels.STATUS_DONE:
            raise DegenerateU(f"Riccati ray integration stopped (status {status})")
        return za + s * (zb - za), Y[:, 0], F, (Y[:, 1] if aug else None)


def weber_hermite(gamma, branch="plus", init=(1.0, 0.0)) -> LinearizedSolution:
    """Riccati solution w' = 2 gamma +- (2 z w + w^2) of IV.

    The plus branch solves IV with alpha = -1 - gamma, the minus branch with
    alpha = 1 + gamma; beta = -2 gamma^2 in both cases.
    """
    gamma = complex(gamma)
    u0, u1 = complex(init[0]), complex(init[1])
    if u0 == 0 and u1 == 0:
        raise DegenerateU("u is identically zero")
    s = 1 if branch == "plus" else -1
    alpha = -1 - gamma if s == 1 else 1 + gamma
    eq = EquationSpec.piv_gamma(alpha, gamma)
    return LinearizedSolution(eq, "WH", s, gamma, (u0, u1))


def airy_solution(branch="plus", init=(1.0, 0.0)) -> LinearizedSolution:
    """Riccati solution w' = +-(z/2 + w^2) of II with alpha = +-1/2."""
    u0, u1 = complex(init[0]), complex(init[1])
    if u0 == 0 and u1 == 0:
        raise DegenerateU("u is identically zero")
    s = 1 if branch == "plus" else -1
    return LinearizedSolution(EquationSpec.pii(s / 2), "AIRY", s, 0j, (u0, u1))


# ---------------------------------------------------------------------------
# rational solutions of IV


def _rational_catalog():
    import sympy as sp
    z = sp.Symbol("z")
    R = sp.Rational
    return z, [
        # (alpha, beta, w)
        (0, -2, -2 * z),
        (0, R(-2, 9), -R(2, 3) * z),
        (-2, -2, -1 / z),
        (2, -2, 1 / z),
        (-3, -8, -4 * z / (2 * z ** 2 - 1)),
        (3, -8, 4 * z / (2 * z ** 2 + 1)),
        (-4, -18, -(6 * z ** 2 - 3) / (2 * z ** 3 - 3 * z)),
        (-1, -8, -2 * z + 1 / z),
        (1, -8, -2 * z - 1 / z),
    ]


def piv_exact_residual(alpha, beta, w):
    """Exact residual of IV for a sympy expression w(z); zero for solutions."""
    import sympy as sp
    z = sp.Symbol("z")
    w1 = sp.diff(w, z)
    w2 = sp.diff(w1, z)
    res = 2 * w * w2 - (w1 ** 2 + 3 * w ** 4 + 8 * z * w ** 3
                        + 4 * (z ** 2 - alpha) * w ** 2 + 2 * beta)
    return sp.simplify(sp.together(res))


@dataclass(frozen=True)
class RationalSolution:
    eq: EquationSpec
    expr: object  # sympy expression in z

    def __call__(self, z):
        return self.jet(z).w

    def jet(self, z):
        import sympy as sp
        zs = sp.Symbol("z")
        f = sp.lambdify(zs, [self.expr, sp.diff(self.expr, zs), sp.diff(self.expr, zs, 2)],
                        "cmath")
        w, w1, w2 = (complex(v) for v in f(complex(z)))
        return Jet(complex(z), w, w1, w2)

    def __str__(self):
        return str(self.expr)


def rational_solutions(eq: EquationSpec):
    """Catalogued rational solutions of IV for the given (alpha, beta)."""
    import sympy as sp
    if eq.kind != "PIV":
        raise NoneKnown("rational catalogue covers IV only")
    _, cat = _rational_catalog()
    out = []
    for a, b, w in cat:
        if abs(eq.alpha - complex(a)) < 1e-12 and abs(eq.beta - complex(sp.N(b))) < 1e-12:
            out.append(RationalSolution(eq, w))
    if not out:
        raise NoneKnown(f"no catalogued rational solution for alpha={eq.alpha}, beta={eq.beta}")
    return out


# ---------------------------------------------------------------------------
# Hastings-McLeod


def _hm_shot(k, L, x_end, rtol=1e-13):
    """Continue the tail k*Ai from x=L to x_end on the real line.

    The tail is tiny, so error control has to be relative; scipy's DOP853
    with a negligible atol does that. Stops early on blow-up or sign change.
    """
    from scipy.integrate import solve_ivp
    from scipy.special import airy
    ai, aip, _, _ = airy(L)

    def f(x, y):
        return [y[1], x * y[0] + 2 * y[0] ** 3]

    def blow(x, y):
        return y[0] - 1e2
    blow.terminal = True

    def neg(x, y):
        return y[0]
    neg.terminal = True
    return solve_ivp(f, (L, x_end), [k * ai, k * aip], method="DOP853", rtol=rtol,
                     atol=1e-300, events=(blow, neg), dense_output=False)


def _hm_classify(k, L, rtol=1e-13):
    """+1 if the tail k*Ai continued leftwards blows up, -1 if it turns negative."""
    r = _hm_shot(k, L, -L, rtol)
    if len(r.t_events[0]):
        return 1
    if len(r.t_events[1]):
        return -1
    # reached -L without blow-up or sign change: judge by the final slope
    return 1 if r.y[1, -1] < -math.sqrt(L / 2) * r.y[0, -1] else -1


def hastings_mcleod_shoot(tolerance=1e-12, L=10.0, rtol=1e-13):
    """Bracket the Hastings-McLeod solution of II (alpha=0) by shooting.

    The tail w ~ k Ai(x) is imposed at x = L and continued to x = -L; k is
    bisected between tails that blow up and tails that oscillate negative.
    Returns (jet at 0, (w0_lo, w0_hi), k).
    """
    lo, hi = 0.5, 1.5
    if _hm_classify(lo, L, rtol) != -1 or _hm_classify(hi, L, rtol) != 1:
        raise BracketLost("initial bracket on the tail amplitude does not straddle")

    def at0(k):
        r = _hm_shot(k, L, 0.0, rtol)
        return float(r.y[0, -1]), float(r.y[1, -1])

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _hm_classify(mid, L, rtol) == 1:
            hi = mid
        else:
            lo = mid
        w_lo, w_hi = at0(lo)[0], at0(hi)[0]
        if abs(w_hi - w_lo) <= tolerance or hi - lo < 1e-15:
            break
    else:
        raise BracketLost("bisection did not converge")
    k = 0.5 * (lo + hi)
    w0, w1 = at0(k)
    return Jet(0j, complex(w0), complex(w1)), (min(w_lo, w_hi), max(w_lo, w_hi)), k
