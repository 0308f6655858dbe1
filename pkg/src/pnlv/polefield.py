"""Pole fields: sweeps that harvest poles (and zeros), strings of poles,
counting functions, residue bookkeeping, signatures and zero deficiency.

Every solution is reached through an accessor object with

    eq                      the equation
    ray(theta, r0, r1, hmax) -> RayData   samples along a ray segment
    step_to(anchor, z)      -> (Jet, anchor)   continue from a sample to z
    jet(z)                  -> Jet

Riccati solutions and Baecklund chains above them integrate the first order
Riccati flow, which passes poles without hopping.  Anything else goes
through integrate().
"""
from __future__ import annotations

import cmath
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .eqcore import EquationSpec, Jet, W_prime, disc_exponent, disc_radius, first_integral
from .errors import (AmbiguousAssignment, ContourHitsPole, PainleveError, SectorNotPoleFree,
                     UnchainedPoles, ZeroPolishFailed)
from .localseries import FIT_TOL, PoleSeed, h_from_jet, laurent_w
from .rescale import period_catalog

_POLE_ORDER = {"PI": 2, "PII": 1, "PIV": 1}
STRING_TAU = {"PI": Fraction(3, 4), "PII": Fraction(1, 2), "PIV": Fraction(1)}
ZERO_TRIGGER = 1e-4
ZERO_CLASS_TOL = 1e-3
DETOUR_POINTS = 32


def threads():
    try:
        return max(1, int(os.environ.get("PNLV_THREADS", "") or os.cpu_count() or 1))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# accessors


@dataclass
class RayData:
    z: np.ndarray
    w: np.ndarray
    v: np.ndarray           # w/w'
    anchor: object          # anchor(i): opaque state at sample i
    events: list = field(default_factory=list)   # PoleSeeds found on the way

    def last(self):
        return self.anchor(len(self.z) - 1)


class RiccatiAccessor:
    """Weber-Hermite / Airy solutions integrated as Riccati flows."""

    def __init__(self, sol, tol=1e-12):
        self.sol = sol
        self.eq = sol.eq
        self.tol = tol
        self.kind, self.par = sol.kernel_params()

    def _v(self, z, y, f):
        # w/w' written in the state variable so that poles cause no overflow
        sol = self.sol
        with np.errstate(all="ignore"):
            w = np.where(f == 0, y, 1 / y)
            if sol.family == "WH":
                yp = -(2 * sol.gamma * y * y + sol.s * (2 * z * y + 1))
                wp = sol.riccati(z, y)
            else:
                yp = -sol.s * (z * y * y / 2 + 1)
                wp = sol.riccati(z, y)
            v = np.where(f == 0, y / wp, -y / yp)
        return w, v

    def states(self, theta, r0, r1, hmax, start=None):
        if start is None:
            z, y, f, _ = self.sol.ray(theta, r1, tol=self.tol, hmax=hmax, r0=r0, aug=False)
            return z, y, np.asarray(f)
        e = cmath.exp(1j * theta)
        za, zb = r0 * e, r1 * e
        y0, f0 = self._advance(start, za)
        L = abs(zb - za)
        s, Y, F, status, _ = kernels.run_path(self.kind, self.par, kernels.SEGMENT, [za, zb],
                                              [y0], flag=f0, tol=self.tol, hmax=hmax / L)
        if status != kernels.STATUS_DONE:
            raise PainleveError(f"Riccati ray integration stopped (status {status})")
        return za + s * (zb - za), Y[:, 0], np.asarray(F)

    @staticmethod
    def _anchors(z, y, f):
        return lambda i: (complex(z[i]), complex(y[i]), int(f[i]))

    def ray(self, theta, r0, r1, hmax, start=None):
        z, y, f = self.states(theta, r0, r1, hmax, start)
        w, v = self._v(z, y, f)
        return RayData(z, w, v, self._anchors(z, y, f))

    def _advance(self, anchor, z):
        za, y, f = anchor
        if z == za:
            return y, f
        _, Y, F, status, _ = kernels.run_path(self.kind, self.par, kernels.SEGMENT, [za, z],
                                              [y], flag=f, tol=self.tol)
        if status != kernels.STATUS_DONE:
            raise PainleveError(f"Riccati step to {z} failed (status {status})")
        return complex(Y[-1, 0]), int(F[-1])

    def step_to(self, anchor, z):
        z = complex(z)
        y, f = self._advance(anchor, z)
        return self._jet(z, y, f), (z, y, f)

    def _jet(self, z, y, f):
        sol = self.sol
        w = y if f == 0 else (1 / y if y != 0 else complex("inf"))
        if not np.isfinite(w):
            return Jet(z, w, w, w)
        w1 = sol.riccati(z, w)
        return Jet(z, w, w1, sol.riccati_2(z, w, w1))

    def jet(self, z):
        return self.sol.jet(z)

    def anchor_at(self, z):
        y, f = self.sol.state(z, tol=min(self.tol, 1e-13))
        return (complex(z), y, f)

    def jets_many(self, Z):
        """Jets at many points.  Walking sideways along a circle is unstable
        for these flows (the special solutions attract radially), so every
        point is reached by a short step from the end of a radial ray."""
        Z = np.asarray(Z, dtype=complex)
        R = float(np.abs(Z).max())
        nray = max(64, int(math.ceil(2 * math.pi * R * R)))
        angle = np.angle(Z) % (2 * math.pi)
        idx = np.rint(angle / (2 * math.pi) * nray).astype(int) % nray
        out = [None] * len(Z)
        order = np.argsort(idx, kind="stable")
        cur, anchor = -1, None
        for i in order:
            k = idx[i]
            if k != cur:
                th = 2 * math.pi * k / nray
                anchor = self.anchor_at(abs(Z[i]) * cmath.exp(1j * th))
                cur = k
            out[i] = self.step_to(anchor, Z[i])[0]
        return out


class ChainAccessor(RiccatiAccessor):
    """Baecklund chain member evaluated from the states of its Riccati seed."""

    def __init__(self, chain, tol=1e-12):
        super().__init__(chain.seed, tol)
        self.chain = chain
        self.eq = chain.eq

    def ray(self, theta, r0, r1, hmax, start=None):
        z, y, f = self.states(theta, r0, r1, hmax, start)
        w, w1, _ = self.chain.from_state(z, y, f)
        with np.errstate(all="ignore"):
            v = w / w1
        return RayData(z, w, v, self._anchors(z, y, f))

    def _jet(self, z, y, f):
        w, w1, w2 = self.chain.from_state(np.array([z]), np.array([y]), np.array([f]))
        return Jet(z, complex(w[0]), complex(w1[0]), complex(w2[0]))

    def jet(self, z):
        return self.chain.jet(z)


class RotatedAccessor:
    """v(z) = -i w(iz) on top of another accessor."""

    def __init__(self, base):
        self.base = base
        e = base.eq
        self.eq = EquationSpec.piv_gamma(-e.alpha, e.gamma)

    def ray(self, theta, r0, r1, hmax, start=None):
        d = self.base.ray(theta + math.pi / 2, r0, r1, hmax, start)
        with np.errstate(all="ignore"):
            v = -1j * d.v  # (-i w)/(w') with z -> -iz
        return RayData(d.z / 1j, -1j * d.w, v, d.anchor)

    def step_to(self, anchor, z):
        j, a = self.base.step_to(anchor, 1j * complex(z))
        w2 = None if j.w2 is None else 1j * j.w2
        return Jet(complex(z), -1j * j.w, j.w1, w2), a

    def jet(self, z):
        j = self.base.jet(1j * complex(z))
        w2 = None if j.w2 is None else 1j * j.w2
        return Jet(complex(z), -1j * j.w, j.w1, w2)

    def anchor_at(self, z):
        return self.base.anchor_at(1j * complex(z))

    def jets_many(self, Z):
        out = []
        for j in _jets_many(self.base, 1j * np.asarray(Z, dtype=complex)):
            w2 = None if j.w2 is None else 1j * j.w2
            out.append(Jet(j.z / 1j, -1j * j.w, j.w1, w2))
        return out


class IntegratorAccessor:
    """General solutions through integrate(), from a jet at a base point."""

    def __init__(self, eq, start: Jet, tol=1e-10):
        self.eq = eq
        self.start = start
        self.tol = tol

    def _run(self, start, pts):
        from .integrate import PathSpec, integrate
        return integrate(self.eq, start, PathSpec.polyline(pts), tol=self.tol)

    def ray(self, theta, r0, r1, hmax, start=None):
        e = cmath.exp(1j * theta)
        start = start or self.start
        pts = [start.z]
        if abs(r0 * e - start.z) > 1e-14:
            pts.append(r0 * e)
        pts.append(r1 * e)
        from .integrate import PathSpec, integrate
        tr = integrate(self.eq, start, PathSpec.polyline(pts), tol=self.tol,
                       hmax=None if not np.isfinite(hmax) else hmax)
        idx = np.nonzero(np.abs(tr.z) >= r0 - 1e-12)[0]
        z = tr.z[idx]
        w = tr.w[idx]
        with np.errstate(all="ignore"):
            v = w / tr.w1[idx]
        ev = [s for s, _ in tr.poleEvents if abs(s.p) >= r0]
        return RayData(z, w, v, lambda i: tr.jet(int(idx[i])), ev)

    def step_to(self, anchor, z):
        z = complex(z)
        if z == anchor.z:
            j = anchor
        else:
            tr = self._run(anchor, [anchor.z, z])
            j = tr.jet(len(tr.z) - 1)
        if j.w2 is None:
            j = j.with_w2(self.eq)
        return j, j

    def jet(self, z):
        return self.step_to(self.start, z)[0]

    def anchor_at(self, z):
        return self.step_to(self.start, z)[1]


def accessor_for(obj, tol=1e-12):
    from .backlund import ChainSolution, RotatedSolution
    from .special import LinearizedSolution
    if isinstance(obj, (RiccatiAccessor, RotatedAccessor, IntegratorAccessor)):
        return obj
    if isinstance(obj, LinearizedSolution):
        return RiccatiAccessor(obj, tol)
    if isinstance(obj, ChainSolution):
        return ChainAccessor(obj, tol)
    if isinstance(obj, RotatedSolution):
        return RotatedAccessor(accessor_for(obj.base, tol))
    raise TypeError(f"no accessor for {type(obj).__name__}")


# ---------------------------------------------------------------------------
# catalogue


@dataclass
class PoleCatalog:
    eq: EquationSpec
    region: dict
    poles: list                      # PoleSeed, sorted by |p| then arg p
    zeros: list = field(default_factory=list)   # (z, sign) sign in {+1, -1, 0}
    stringIds: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def positions(self):
        return np.array([s.p for s in self.poles], dtype=complex)

    def residues(self):
        return np.array([s.eps for s in self.poles], dtype=int)

    def to_dict(self):
        e = self.eq
        ids = self.stringIds or [None] * len(self.poles)
        return {
            "eq": e.to_dict(),
            "region": self.region,
            "poles": [{"re": s.p.real, "im": s.p.imag, "eps": s.eps,
                       "h": {"re": s.h.real, "im": s.h.imag}, "stringId": sid}
                      for s, sid in zip(self.poles, ids)],
            "zeros": [{"re": z.real, "im": z.imag, "sign": sg} for z, sg in self.zeros],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        eq = EquationSpec.from_dict(d["eq"])
        poles = [PoleSeed(eq, complex(p["re"], p["im"]), p["eps"] if eq.kind != "PI" else 1,
                          complex(p["h"]["re"], p["h"]["im"])) for p in d["poles"]]
        zeros = [(complex(z["re"], z["im"]), z["sign"]) for z in d.get("zeros", [])]
        ids = [p.get("stringId") for p in d["poles"]]
        return cls(eq, d.get("region", {}), poles, zeros, ids if any(i is not None for i in ids) else [])

    def to_svg(self, size=480):
        return svg_pole_map(self, size)


def _sort_key(p):
    return (round(abs(p), 9), round(cmath.phase(p) % (2 * math.pi), 9))


def _pole_offset(eq, z, w, w1):
    """Estimate of z - p from a jet near a pole.  For IV the Laurent
    constant -p is removed first, which makes the estimate second order."""
    if eq.kind == "PIV":
        return -(w + z) / (w1 + 1)
    return -_POLE_ORDER[eq.kind] * w / w1


def _newton_pole(acc, eq, anchor, p, n, maxit=30):
    """Polish a pole position by p <- p - (z - p estimate); returns (p, anchor)."""
    scale = max(1.0, abs(p))
    # evaluate slightly off the pole: at the pole itself the jet is all
    # rounding noise, and the offset estimate is third order anyway
    rho = 1e-3 * disc_radius(eq, p)
    last = None
    for _ in range(maxit):
        z = p + rho
        j, anchor = acc.step_to(anchor, z)
        if not (np.isfinite(j.w) and np.isfinite(j.w1)) or j.w1 == 0:
            return p, anchor
        step = (z - _pole_offset(eq, z, j.w, j.w1)) - p
        p = p + step
        if abs(step) < 1e-13 * scale:
            return p, anchor
        # rounding floor of the accessor: steps stop shrinking
        if last is not None and abs(step) >= 0.5 * abs(last) and abs(step) < 1e-8 * scale:
            return p, anchor
        last = step
    raise PainleveError("pole polish did not converge")


def _lead(eq, z, w, t):
    """(w - regular part) * (z-p)^n; +-1 at a pole.  Near a pole of IV the
    constant Laurent term is -p, so -z is subtracted first."""
    if eq.kind == "PIV":
        w = w + z
    return w * t ** _POLE_ORDER[eq.kind]


def _confirm_pole(acc, eq, anchor, p, fit_tol):
    """Residue sign and h from jets at two points on a small circle."""
    rho = 0.1 * disc_radius(eq, p)
    z1 = p + rho
    z2 = p - rho
    j1, _ = acc.step_to(anchor, z1)
    j2, _ = acc.step_to(anchor, z2)
    lead = _lead(eq, z1, j1.w, z1 - p)
    if eq.kind == "PI":
        eps = 1
    else:
        eps = 1 if lead.real > 0 else -1
    if not abs(lead - eps) < 0.3:
        raise PainleveError(f"no pole of the expected type at {p}")
    h = h_from_jet(eq, p, eps, j1, N=14, iters=4)
    seed = PoleSeed(eq, p, eps, h)
    S = laurent_w(seed, 14)
    res = abs(S(z2) - j2.w) / abs(j2.w)
    return seed, res


def _newton_zero(acc, anchor, z, m, maxit=40):
    scale = max(1.0, abs(z))
    last = None
    for _ in range(maxit):
        j, anchor = acc.step_to(anchor, z)
        if j.w == 0:
            return z, j
        if not np.isfinite(j.w) or j.w1 == 0:
            break
        step = -m * j.w / j.w1
        z = z + step
        if abs(step) < 1e-12 * scale or (last is not None and abs(step) >= abs(last)
                                          and abs(step) < 1e-7 * scale):
            j, anchor = acc.step_to(anchor, z)
            return z, j
        last = step
    raise ZeroPolishFailed(f"Newton on w did not settle near {z}")


def _harvest(eq, d, want_zeros, zero_mult):
    n = _POLE_ORDER[eq.kind]
    with np.errstate(all="ignore"):
        delta = _pole_offset(eq, d.z, d.w, d.w / d.v)   # z - p near a pole
        accr = 0.5 * np.maximum(1.0, np.abs(d.z)) ** (-disc_exponent(eq))
        near = np.abs(delta) <= accr
        lead = _lead(eq, d.z, d.w, delta)    # close to the residue sign at a pole
        poleish = near & ((np.abs(lead - 1) < 0.5) | ((np.abs(lead + 1) < 0.5) & (n == 1)))
        zdelta = zero_mult * d.v
        zeroish = (np.abs(zdelta) <= accr) & (np.abs(d.w * d.v) < 0.1) if want_zeros else \
            np.zeros(len(d.z), bool)
    cands = []
    for i in np.nonzero(poleish)[0]:
        cands.append(("pole", complex(d.z[i] - delta[i]), abs(delta[i]), d.anchor(i)))
    for i in np.nonzero(zeroish)[0]:
        cands.append(("zero", complex(d.z[i] - zdelta[i]), abs(zdelta[i]), d.anchor(i)))
    return cands


def _fan(eq, r0, r1, t0, t1, spacing):
    """Bands [e_k, e_k+1] with angle grids that double from band to band.

    The ray count needed to keep neighbours within `spacing` disc radii grows
    like r^(1+b); every band ends where the doubled grid is exhausted.
    """
    full = abs((t1 - t0) - 2 * math.pi) < 1e-12
    span = t1 - t0
    b = disc_exponent(eq)

    def need(r):
        return span * r / (spacing * disc_radius(eq, r))

    growth = 2 ** (1 / (1 + b))
    e = max(r0, 0.0)
    hi = min(r1, max(e * growth, 1.0 * growth))
    n = max(8, int(math.ceil(need(hi))))
    bands = []
    while True:
        bands.append((e, hi, n))
        if hi >= r1:
            break
        e = hi
        n *= 2
        hi = e * growth
        while hi < r1 and need(hi) <= n:
            hi *= 1.05
        hi = min(r1, hi)
        if need(hi) > n:   # shrink back to where the grid is fine enough
            lo_, hi_ = e, hi
            for _ in range(40):
                mid = 0.5 * (lo_ + hi_)
                lo_, hi_ = (mid, hi_) if need(mid) <= n else (lo_, mid)
            hi = max(lo_, e * 1.001)
    out = []
    for e, hi, n in bands:
        if full:
            th = t0 + span * np.arange(n) / n
        else:
            th = t0 + span * np.arange(n) / max(n - 1, 1) if n > 1 else np.array([t0])
        out.append((e, hi, th))
    return out, full


def _dedupe(cands, tol_fn):
    """Keep the closest-approach candidate of every cluster of estimates."""
    from scipy.spatial import cKDTree
    out = []
    for kind in ("pole", "zero"):
        cs = sorted((c for c in cands if c[0] == kind), key=lambda c: c[2])
        if not cs:
            continue
        pts = np.array([[c[1].real, c[1].imag] for c in cs])
        tree = cKDTree(pts)
        gone = np.zeros(len(cs), bool)
        for i, c in enumerate(cs):
            if gone[i]:
                continue
            out.append(c)
            for j in tree.query_ball_point(pts[i], tol_fn(c[1])):
                gone[j] = True
    return out


def sweep(eq, solution, region, strategy=None) -> PoleCatalog:
    """Harvest poles (and optionally zeros) of a solution over an annulus sector.

    region: {"r0", "r1", "theta0", "theta1"} (angles default to a full turn).
    strategy: {"spacing": ray spacing in disc radii (1.0), "zeros": bool,
               "fitTol": Laurent confirmation tolerance, "threads": int}.
    """
    strategy = dict(strategy or {})
    acc = accessor_for(solution)
    eq = eq or acc.eq
    r0 = float(region.get("r0", 0.0))
    r1 = float(region["r1"])
    t0 = float(region.get("theta0", 0.0))
    t1 = float(region.get("theta1", t0 + 2 * math.pi))
    spacing = float(strategy.get("spacing", 1.0))
    want_zeros = bool(strategy.get("zeros", False)) and eq.kind == "PIV"
    fit_tol = float(strategy.get("fitTol", FIT_TOL))
    zero_mult = 2 if (eq.kind == "PIV" and abs(eq.beta) < 1e-14) else 1
    nthreads = int(strategy.get("threads", threads()))
    full = abs((t1 - t0) - 2 * math.pi) < 1e-12

    bands, _ = _fan(eq, r0, r1, t0, t1, spacing)
    cands, events, failures = [], [], []
    prev = None   # (thetas, end anchors) of the previous band
    nrays = 0
    for a, b, thetas in bands:
        dr = spacing * disc_radius(eq, b)
        starts = [None] * len(thetas)
        if prev is not None:
            pth, pend = prev
            # the previous grid is every other ray of this one (or a prefix of it)
            ratio = (len(thetas) - (0 if full else 1)) // max(len(pth) - (0 if full else 1), 1)
            for k in range(len(thetas)):
                j, rem = divmod(k, ratio)
                j = min(j, len(pth) - 1)
                if pend[j] is None:
                    continue
                starts[k] = pend[j] if rem == 0 else ("move", pend[j])
        ends = [None] * len(thetas)

        def run(k):
            th = float(thetas[k])
            st = starts[k]
            try:
                if isinstance(st, tuple) and len(st) == 2 and st[0] == "move":
                    st = acc.step_to(st[1], a * cmath.exp(1j * th))[1]
                if st is None and a > 0:
                    st = acc.anchor_at(a * cmath.exp(1j * th))
                d = acc.ray(th, a, b, dr, st)
                return _harvest(eq, d, want_zeros, zero_mult), d.events, d.last(), None
            except (PainleveError, ZeroDivisionError, ValueError) as exc:
                return [], [], None, f"ray theta={th:.6f} [{a:g},{b:g}]: {exc}"

        if nthreads > 1:
            with ThreadPoolExecutor(nthreads) as ex:
                results = list(ex.map(run, range(len(thetas))))
        else:
            results = [run(k) for k in range(len(thetas))]
        for k, (c, ev, last, err) in enumerate(results):
            cands.extend(c)
            events.extend(ev)
            ends[k] = last
            if err:
                failures.append(err)
        prev = (thetas, ends)
        nrays += len(thetas)

    cands = _dedupe(cands, lambda p: 0.5 * disc_radius(eq, p))
    poles, zeros = [], []
    rejected = {"pole": 0, "zero": 0}

    def inside(p):
        if not (r0 <= abs(p) <= r1):
            return False
        if full:
            return True
        ang = (cmath.phase(p) - t0) % (2 * math.pi)
        return ang <= (t1 - t0) + 1e-12

    n_ord = _POLE_ORDER[eq.kind]
    found = np.empty(len(cands), dtype=complex)
    nf = 0

    def seen(p):
        return nf and np.min(np.abs(found[:nf] - p)) < 0.5 * disc_radius(eq, p)

    for kind, p, _, anchor in cands:
        try:
            if kind == "pole":
                if seen(p):
                    continue
                p, anc = _newton_pole(acc, eq, anchor, p, n_ord)
                if not inside(p) or seen(p):
                    continue
                seed, res = _confirm_pole(acc, eq, anc, p, fit_tol)
                if res > fit_tol:
                    rejected["pole"] += 1
                    continue
                poles.append(seed)
                found[nf] = seed.p
                nf += 1
            else:
                z, j = _newton_zero(acc, anchor, p, zero_mult)
                sc = max(1.0, abs(z))
                if not inside(z) or abs(j.w) >= ZERO_TRIGGER * sc:
                    rejected["zero"] += 1
                    continue
                if any(abs(z - q) < 0.5 * disc_radius(eq, z) for q, _ in zeros):
                    continue
                zeros.append((z, _zero_sign(eq, j, sc)))
        except (PainleveError, ValueError, ZeroDivisionError, FloatingPointError):
            rejected[kind] += 1
    for s in events:
        if inside(s.p) and not any(abs(s.p - q.p) < 0.5 * disc_radius(eq, s.p) for q in poles):
            poles.append(s)

    poles.sort(key=lambda s: _sort_key(s.p))
    zeros.sort(key=lambda t: _sort_key(t[0]))
    region_d = {"r0": r0, "r1": r1, "theta0": t0, "theta1": t1}
    diag = {"rays": nrays, "bands": len(bands), "failedRays": failures, "rejected": rejected,
            "candidates": len(cands)}
    return PoleCatalog(eq, region_d, poles, zeros, diagnostics=diag)


def _zero_sign(eq, jet, scale):
    g = eq.gamma
    if abs(jet.w1 - 2 * g) < ZERO_CLASS_TOL * scale and abs(jet.w1 + 2 * g) < ZERO_CLASS_TOL * scale:
        return 0
    if abs(jet.w1 - 2 * g) < ZERO_CLASS_TOL * scale:
        return 1
    if abs(jet.w1 + 2 * g) < ZERO_CLASS_TOL * scale:
        return -1
    return 0


def merge_catalogs(a: PoleCatalog, b: PoleCatalog, tol=1e-8):
    """Poles of b not matched in a within tol, and vice versa."""
    pa, pb = a.positions(), b.positions()
    only_a = [p for p in pa if not len(pb) or np.min(np.abs(pb - p)) > tol * max(1, abs(p))]
    only_b = [p for p in pb if not len(pa) or np.min(np.abs(pa - p)) > tol * max(1, abs(p))]
    return only_a, only_b


# ---------------------------------------------------------------------------
# strings


@dataclass
class StringModel:
    memberIndices: list
    omega: complex
    tau: Fraction
    eps: int
    theta: float
    countCoeff: float
    checks: dict = field(default_factory=dict)

    def to_dict(self):
        return {"omega": {"re": self.omega.real, "im": self.omega.imag},
                "tau": {"num": self.tau.numerator, "den": self.tau.denominator},
                "eps": self.eps, "theta": self.theta, "countCoeff": self.countCoeff,
                "members": list(self.memberIndices), "checks": self.checks}


def _candidate_omegas(kind):
    k = {"PI": "i", "PII": "ii", "PIV": "iv"}[kind]
    oms = [om for _, om in period_catalog(k)]
    if not oms:
        oms = [1j * math.pi]
    out = []
    for om in oms:
        for r in (1, -1, 1j, -1j):
            out.append(om * r)
    return out


def _fit_count_coeff(radii, power, rfit=None):
    """Least squares n(r) = C r^power + D on the outer part of the range."""
    radii = np.sort(np.asarray(radii, dtype=float))
    if len(radii) < 3:
        return float("nan")
    rmax = radii[-1]
    lo = rfit[0] if rfit else rmax / 4
    n = np.arange(1, len(radii) + 1)
    m = radii >= lo
    if m.sum() < 3:
        m = np.ones(len(radii), bool)
    A = np.stack([radii[m] ** power, np.ones(m.sum())], axis=1)
    C, _ = np.linalg.lstsq(A, n[m], rcond=None)[0]
    return float(C)


def cluster_strings(catalog: PoleCatalog, min_members=6, omegas=None, rel_tol=0.3):
    """Greedy chaining of poles into strings p_{k+1} = p_k + omega p_k^-tau,
    seeded from the outermost poles inwards.  Returns (strings, unchained)."""
    eq = catalog.eq
    tau = STRING_TAU[eq.kind]
    t = float(tau)
    P = catalog.positions()
    order = np.argsort(-np.abs(P), kind="stable")
    used = np.zeros(len(P), bool)
    omegas = omegas or _candidate_omegas(eq.kind)
    strings = []
    for i0 in order:
        if used[i0]:
            continue
        best = None
        for om in omegas:
            chain = [i0]
            cur = P[i0]
            taken = {i0}
            while True:
                step = om * cur ** (-t)
                target = cur - step
                d = np.abs(P - target)
                d[used] = np.inf
                for k in taken:
                    d[k] = np.inf
                j = int(np.argmin(d)) if len(d) else -1
                if j < 0 or d[j] > rel_tol * abs(step) or abs(P[j]) >= abs(cur):
                    break
                chain.append(j)
                taken.add(j)
                cur = P[j]
            if best is None or len(chain) > len(best[0]):
                best = (chain, om)
        chain, om = best
        if len(chain) < min_members:
            continue
        for k in chain:
            used[k] = True
        chain = chain[::-1]  # inner to outer
        pts = P[chain]
        steps = (pts[1:] - pts[:-1]) * pts[:-1] ** t
        om_fit = complex(np.mean(steps[len(steps) // 2:]))
        eps_vals = [catalog.poles[k].eps for k in chain]
        eps = int(np.sign(np.sum(eps_vals))) or eps_vals[-1]
        theta = float(cmath.phase(pts[-1]))
        cc = _fit_count_coeff(np.abs(pts), 1 + t)
        strings.append(StringModel(list(map(int, chain)), om_fit, tau, eps, theta, cc,
                                   {"alternating": _alternates(eps_vals)}))
    unchained = [int(k) for k in range(len(P)) if not used[k]]
    ids = [None] * len(P)
    for sid, s in enumerate(strings):
        for k in s.memberIndices:
            ids[k] = sid
    catalog.stringIds = ids
    return strings, unchained


def _alternates(eps_vals):
    return all(a != b for a, b in zip(eps_vals, eps_vals[1:]))


def strings_or_raise(catalog, **kw):
    strings, unchained = cluster_strings(catalog, **kw)
    if not strings:
        raise UnchainedPoles(f"{len(unchained)} poles could not be chained into strings")
    return strings


def lemma_checks(model: StringModel, catalog: PoleCatalog, reference_omega=None):
    """Value ratio, angle convergence and counting coefficient of a string."""
    t = float(model.tau)
    om = reference_omega if reference_omega is not None else model.omega
    pts = catalog.positions()[model.memberIndices]
    # (s+t) theta* = t arg omega (mod 2 pi) with tau = s/t, i.e. (1+tau) theta* = arg omega
    target = cmath.phase(om) / (1 + t)
    branches = [target + 2 * math.pi * k / (1 + t) for k in range(int(math.ceil(1 + t)) + 1)]
    ang = min(abs(cmath.phase(cmath.exp(1j * (model.theta - b)))) for b in branches)
    expected_cc = 1 / ((1 + t) * abs(om))
    return {"omegaRatio": abs(model.omega) / abs(om),
            "angleError": ang,
            "countRatio": model.countCoeff / expected_cc,
            "n": len(pts)}


def string_recursion_sim(omega, tau, p0, K):
    """Exact iteration p_{k+1} = p_k + omega p_k^-tau with the asymptotic checks."""
    if K > 10 ** 7:
        raise ValueError("K must not exceed 1e7")
    omega = complex(omega)
    tau = float(tau)
    p = complex(p0)
    out = np.empty(K + 1, dtype=complex)
    out[0] = p
    if tau == 1.0:
        for k in range(K):
            p = p + omega / p
            out[k + 1] = p
    else:
        for k in range(K):
            p = p + omega * p ** (-tau)
            out[k + 1] = p
    pK = out[-1]
    e = 1 / (1 + tau)
    base = (K * (1 + tau) * omega) ** e
    # the limit may sit on any branch of the root
    roots = [base * cmath.exp(2j * math.pi * k * e) for k in range(int(math.ceil(1 + tau)) + 1)]
    ratio = min((pK / r for r in roots), key=lambda q: abs(q - 1))
    r = abs(pK)
    n = int(np.sum(np.abs(out) <= r))
    expected = r ** (1 + tau) / ((1 + tau) * abs(omega))
    ang = (1 + tau) * cmath.phase(pK) - cmath.phase(omega)
    ang = abs(cmath.phase(cmath.exp(1j * ang)))
    return {"iterates": out, "ratio": ratio, "countRatio": n / expected,
            "countCoeff": n / r ** (1 + tau), "angleError": ang, "r": r}


# ---------------------------------------------------------------------------
# counting


def counting_function(poles, r_grid=None, rfit=None):
    """n(r) on a grid, least-squares growth exponent on [rMax/4, rMax] and
    the normalised coefficient n(r) 2 pi / r^2 at the outer radius."""
    if isinstance(poles, PoleCatalog):
        P = poles.positions()
    elif isinstance(poles, StringModel):
        raise TypeError("pass the string's member positions")
    else:
        P = np.array([getattr(p, "p", p) for p in poles], dtype=complex)
    rad = np.sort(np.abs(P))
    rmax = rad[-1] if len(rad) else 1.0
    if r_grid is None:
        r_grid = np.linspace(rmax / 20, rmax, 80)
    r_grid = np.asarray(r_grid, dtype=float)
    n = np.searchsorted(rad, r_grid, side="right")
    lo, hi = rfit if rfit else (r_grid[-1] / 4, r_grid[-1])
    m = (r_grid >= lo) & (r_grid <= hi) & (n > 0)
    expo = float("nan")
    if m.sum() >= 3:
        expo = float(np.polyfit(np.log(r_grid[m]), np.log(n[m]), 1)[0])
    nu = float(n[-1] * 2 * math.pi / r_grid[-1] ** 2) if len(r_grid) else float("nan")
    return {"r": r_grid.tolist(), "n": n.tolist(), "exponent": expo, "nu": nu}


# ---------------------------------------------------------------------------
# residue bookkeeping


def _gl(k=8):
    x, wts = np.polynomial.legendre.leggauss(k)
    return x, wts


def contour_gamma(catalog: PoleCatalog, r, delta=0.5):
    """Circle |z|=r with arcs of pole discs replacing the parts inside them.

    Poles with |p|<r stay inside the contour.  Returns a list of pieces
    ("arc", centre, radius, phi0, phi1), counter-clockwise overall.
    """
    eq = catalog.eq
    near = []
    for s in catalog.poles:
        rho = disc_radius(eq, s.p, delta)
        if abs(abs(s.p) - r) < rho:
            if abs(abs(s.p) - r) < 1e-9:
                raise ContourHitsPole(f"pole {s.p} lies on |z|={r}")
            near.append((s.p, rho))
    near.sort(key=lambda t: cmath.phase(t[0]) % (2 * math.pi))
    cuts = []
    for p, rho in near:
        c = (r * r + abs(p) ** 2 - rho * rho) / (2 * r * abs(p))
        D = math.acos(max(-1.0, min(1.0, c)))
        th = cmath.phase(p) % (2 * math.pi)
        cuts.append((th - D, th + D, p, rho))
    for (a0, a1, _, _), (b0, b1, _, _) in zip(cuts, cuts[1:]):
        if b0 <= a1:
            raise ContourHitsPole("overlapping pole discs on the contour")
    if len(cuts) > 1 and cuts[0][0] + 2 * math.pi <= cuts[-1][1]:
        raise ContourHitsPole("overlapping pole discs on the contour")
    pieces = []
    start = cuts[0][1] if cuts else 0.0
    cur = start
    for k in range(len(cuts)):
        a0, a1, p, rho = cuts[(k + 1) % len(cuts)] if cuts else (0, 0, 0, 0)
        if k == len(cuts) - 1:
            a0 += 2 * math.pi
            a1 += 2 * math.pi
        pieces.append(("arc", 0j, r, cur, a0))
        A = r * cmath.exp(1j * a0) - p
        B = r * cmath.exp(1j * a1) - p
        fa, fb = cmath.phase(A), cmath.phase(B)
        if abs(p) < r:
            dphi = (fb - fa) % (2 * math.pi)
        else:
            dphi = -((fa - fb) % (2 * math.pi))
        pieces.append(("arc", p, rho, fa, fa + dphi))
        cur = a1
    if not cuts:
        pieces.append(("arc", 0j, r, 0.0, 2 * math.pi))
    return pieces


def _contour_nodes(pieces, panel, gl_k=8):
    x, wts = _gl(gl_k)
    Z, DZ = [], []
    for _, c, rad, f0, f1 in pieces:
        L = abs(f1 - f0) * rad
        if L == 0:
            continue
        npan = max(1, int(math.ceil(L / panel)))
        if c != 0j:
            npan = max(npan, DETOUR_POINTS // gl_k)
        edges = np.linspace(f0, f1, npan + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            mid, half = (a + b) / 2, (b - a) / 2
            phi = mid + half * x
            z = c + rad * np.exp(1j * phi)
            Z.append(z)
            DZ.append(1j * rad * np.exp(1j * phi) * half * wts)
    return np.concatenate(Z), np.concatenate(DZ)


def _jets_many(acc, Z):
    if hasattr(acc, "jets_many"):
        return acc.jets_many(Z)
    anchor = acc.anchor_at(Z[0])
    jets = []
    for z in Z:
        j, anchor = acc.step_to(anchor, z)
        jets.append(j)
    return jets


def residue_ledger(catalog: PoleCatalog, r, by="count", solution=None, delta=0.5, gl_k=8):
    """(n_plus(r), n_minus(r), Delta estimate) from the catalogue or by
    integrating w (and W) around the contour Gamma_r."""
    P = catalog.positions()
    E = catalog.residues()
    inside = np.abs(P) < r
    n_plus = int(np.sum(inside & (E == 1)))
    n_minus = int(np.sum(inside & (E == -1)))
    scale = 2 * math.pi / r ** 2
    if by == "count":
        return {"nPlus": n_plus, "nMinus": n_minus, "delta": (n_plus - n_minus) * scale,
                "sumResidues": n_plus - n_minus, "intW": -(n_plus + n_minus)}
    if by != "contour":
        raise ValueError("by must be 'count' or 'contour'")
    acc = accessor_for(solution)
    eq = catalog.eq
    pieces = contour_gamma(catalog, r, delta)
    Z, DZ = _contour_nodes(pieces, disc_radius(eq, r, delta), gl_k)
    jets = _jets_many(acc, Z)
    w = np.array([j.w for j in jets])
    # W is single valued, so the closed integral of W equals -int z W'(z) dz;
    # this avoids the algebraic W, which divides by w for IV
    Wp = np.array([W_prime(eq, j.z, j.w) for j in jets])
    Iw = complex(np.sum(w * DZ)) / (2j * math.pi)
    IW = -complex(np.sum(Z * Wp * DZ)) / (2j * math.pi)
    est = Iw.real
    n_est = -IW.real
    return {"nPlus": (n_est + est) / 2, "nMinus": (n_est - est) / 2, "delta": est * scale,
            "sumResidues": Iw, "intW": IW, "nodes": len(Z)}


# ---------------------------------------------------------------------------
# signatures and the ray residue rule


def infer_signature(solution, rProbe, catalog: PoleCatalog | None = None, tol=0.15, nfit=6):
    """Symbols of the four Stokes sectors of IV from W(z)/(2z) on the midlines."""
    from .backlund import SignatureIV
    acc = accessor_for(solution)
    eq = acc.eq
    cands = {"alpha": eq.alpha, "gamma": eq.gamma, "-gamma": -eq.gamma}
    syms, vals = [], []
    radii = np.linspace(0.6 * rProbe, rProbe, nfit)
    for nu in range(4):
        e = cmath.exp(1j * nu * math.pi / 2)
        zs = radii * e
        if catalog is not None and len(catalog.poles):
            P = catalog.positions()
            for z in zs:
                if np.min(np.abs(P - z)) < 2 * disc_radius(eq, z):
                    raise SectorNotPoleFree(f"pole near the midline of sector {nu} at {z}")
        Wz = np.array([first_integral(eq, acc.jet(z)).W for z in zs])
        A = np.stack([np.ones(nfit), zs ** -2], axis=1)
        a = complex(np.linalg.lstsq(A, Wz / (2 * zs), rcond=None)[0][0])
        dist = {k: abs(a - v) for k, v in cands.items()}
        best = sorted(dist, key=dist.get)
        thr = tol * max(1.0, abs(a))
        if dist[best[0]] > thr:
            raise AmbiguousAssignment(f"sector {nu}: a={a} matches no symbol")
        if abs(cands[best[0]] - cands[best[1]]) > 1e-12 and dist[best[1]] <= thr:
            raise AmbiguousAssignment(f"sector {nu}: a={a} is near {best[0]} and {best[1]}")
        if abs(cands[best[0]] - cands[best[1]]) <= 1e-12:
            raise AmbiguousAssignment(f"sector {nu}: symbols {best[0]} and {best[1]} coincide")
        syms.append(best[0])
        vals.append(a)
    return SignatureIV(tuple(syms), tuple(vals))


def ray_sign(theta):
    """+1 on the rays pi/4 and 5pi/4, -1 on 3pi/4 and 7pi/4."""
    k = int(round((theta % (2 * math.pi) - math.pi / 4) / (math.pi / 2))) % 4
    return 1 if k in (0, 2) else -1


def table1_residue(signature, theta):
    """Residue predicted for a string along the Stokes ray nearest theta:
    eps = s_ray (tau_cw - tau_ccw)/2 with tau = -2 where w ~ -2z, else 0."""
    k = int(round((theta % (2 * math.pi) - math.pi / 4) / (math.pi / 2))) % 4
    tau = [-2 if s == "alpha" else 0 for s in signature.symbols]
    cw, ccw = tau[k], tau[(k + 1) % 4]
    return ray_sign(theta) * (cw - ccw) // 2


# ---------------------------------------------------------------------------
# zeros and deficiency


def zero_catalog_and_deficiency(catalog: PoleCatalog, radii=None):
    """n(r,1/w)/n(r,w) and the deficiency estimate 1 - ratio at several radii.

    Zeros are counted with multiplicity (double when beta = 0)."""
    eq = catalog.eq
    mult = 2 if (eq.kind == "PIV" and abs(eq.beta) < 1e-14) else 1
    P = np.abs(catalog.positions())
    Zr = np.array([abs(z) for z, _ in catalog.zeros])
    rmax = catalog.region.get("r1", float(P.max()) if len(P) else 1.0)
    if radii is None:
        radii = [rmax]
    rows = []
    for r in radii:
        npol = int(np.sum(P < r))
        nzer = mult * int(np.sum(Zr < r))
        ratio = nzer / npol if npol else float("nan")
        rows.append({"r": float(r), "nPoles": npol, "nZeros": nzer, "ratio": ratio,
                     "deficiency": 1 - ratio})
    signs = {s: sum(1 for _, g in catalog.zeros if g == s) for s in (1, -1, 0)}
    return {"multiplicity": mult, "rows": rows, "zeroSigns": signs,
            "estimate": rows[-1]["deficiency"]}


def first_order_residual(jets, alpha):
    """Residual of w'^2 + 4w' - w^4 - 4zw^3 - 4(z^2-alpha)w^2 + 4 = 0, each
    term scaled by the sum of the magnitudes of the terms."""
    worst = 0.0
    for j in jets:
        z, w, w1 = j.z, j.w, j.w1
        terms = [w1 * w1, 4 * w1, -w ** 4, -4 * z * w ** 3, -4 * (z * z - alpha) * w * w, 4]
        worst = max(worst, abs(sum(terms)) / sum(abs(t) for t in terms))
    return worst


# ---------------------------------------------------------------------------
# pictures


def svg_pole_map(catalog: PoleCatalog, size=480):
    """Poles as filled (residue +1) or empty (-1) circles, zeros as stars,
    Stokes rays dashed."""
    P = catalog.positions()
    R = catalog.region.get("r1") or (float(np.abs(P).max()) if len(P) else 1.0)
    s = size / (2.2 * R)
    c = size / 2

    def xy(z):
        return c + s * z.real, c - s * z.imag

    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
              f'viewBox="0 0 {size} {size}">\n')
    out.write(f'<rect width="{size}" height="{size}" fill="white"/>\n')
    rays = [(2 * k + 1) * math.pi / 4 for k in range(4)] if catalog.eq.kind == "PIV" else \
        [2 * k * math.pi / 3 for k in range(3)]
    for th in rays:
        x, y = xy(1.1 * R * cmath.exp(1j * th))
        out.write(f'<line x1="{c:.2f}" y1="{c:.2f}" x2="{x:.2f}" y2="{y:.2f}" stroke="gray" '
                  f'stroke-dasharray="4,3"/>\n')
    for seed in catalog.poles:
        x, y = xy(seed.p)
        fill = "black" if seed.eps == 1 else "none"
        out.write(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{fill}" stroke="black"/>\n')
    for z, _ in catalog.zeros:
        x, y = xy(z)
        pts = []
        for k in range(10):
            rr = 3.5 if k % 2 == 0 else 1.5
            a = math.pi / 2 + k * math.pi / 5
            pts.append(f"{x + rr * math.cos(a):.2f},{y - rr * math.sin(a):.2f}")
        out.write(f'<polygon points="{" ".join(pts)}" fill="black"/>\n')
    out.write("</svg>\n")
    return out.getvalue()
