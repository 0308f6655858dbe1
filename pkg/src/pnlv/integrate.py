"""Adaptive integration along complex paths with Laurent-matched pole hops.

The stepper is the Dormand-Prince 5(4) pair from :mod:`pnlv.kernels`.  W and
its path integral are carried as two extra quadrature components.  When |w|
exceeds the pole trigger (in local units max(1,|z|)^a) the approach is
re-sampled, a Laurent model is fitted, and integration resumes on the far
side of the pole disc from the fitted series.
"""
from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .eqcore import (EquationSpec, FirstIntegralValue, Jet, disc_radius, first_integral,
                     local_scale_exponent, rhs, zero_guard)
from .errors import (CalibrationInvalid, DivisionNearZero, FitFailed, OffsetOutsideValidity,
                     PoleFitFailed, StepSizeUnderflow)
from .localseries import (PoleSeed, detect_pole, h_from_jet, laurent_W, laurent_w,
                          validity_radius)

POLE_TRIGGER = 1e3
DELTA = 0.5
FIT_WINDOW = (1e1, 1e3)
MIN_FIT_SAMPLES = 8


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class PathSpec:
    kind: str
    data: tuple

    @classmethod
    def segment(cls, z0, z1):
        return cls("segment", (complex(z0), complex(z1)))

    @classmethod
    def ray(cls, origin, theta, rMax):
        return cls("ray", (complex(origin), float(theta), float(rMax)))

    @classmethod
    def polyline(cls, points):
        pts = tuple(complex(p) for p in points)
        if len(pts) < 2:
            raise ValueError("polyline needs at least two points")
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise ValueError("polyline points must be distinct")
        return cls("polyline", pts)

    @classmethod
    def circle(cls, center, radius, turns=1.0, theta0=0.0):
        return cls("circle", (complex(center), float(radius), float(turns), float(theta0)))

    def pieces(self):
        """(pathkind, params, length) for each kernel piece."""
        if self.kind == "segment":
            z0, z1 = self.data
            return [(kernels.SEGMENT, [z0, z1], abs(z1 - z0))]
        if self.kind == "ray":
            o, th, r = self.data
            return [(kernels.SEGMENT, [o, o + r * cmath.exp(1j * th)], r)]
        if self.kind == "polyline":
            pts = self.data
            return [(kernels.SEGMENT, [a, b], abs(b - a)) for a, b in zip(pts, pts[1:])]
        c, R, turns, t0 = self.data
        t1 = t0 + 2 * math.pi * turns
        return [(kernels.ARC, [c, complex(R), complex(t0), complex(t1)],
                 abs(R * (t1 - t0)))]

    def start(self):
        pk, par, _ = self.pieces()[0]
        return _point(pk, par, 0.0)

    def length(self):
        return sum(p[2] for p in self.pieces())

    def to_dict(self):
        def enc(v):
            if isinstance(v, complex):
                return {"re": v.real, "im": v.imag}
            return v
        return {"kind": self.kind, "data": [enc(v) for v in self.data]}


def _point(pk, par, s):
    if pk == kernels.SEGMENT:
        return par[0] + s * (par[1] - par[0])
    c, R, t0, t1 = par
    return c + R.real * cmath.exp(1j * (t0.real + s * (t1.real - t0.real)))


def _dzds(pk, par, s):
    if pk == kernels.SEGMENT:
        return par[1] - par[0]
    c, R, t0, t1 = par
    dt = t1.real - t0.real
    return 1j * dt * R.real * cmath.exp(1j * (t0.real + s * dt))


def _closest_s(pk, par, p):
    if pk == kernels.SEGMENT:
        d = par[1] - par[0]
        s = ((p - par[0]) * d.conjugate()).real / abs(d) ** 2
        return min(1.0, max(0.0, s))
    c, R, t0, t1 = par
    ang = cmath.phase(p - c)
    dt = t1.real - t0.real
    # choose the representative of ang nearest the current sweep
    k = round((t0.real + dt / 2 - ang) / (2 * math.pi))
    s = (ang + 2 * math.pi * k - t0.real) / dt
    return min(1.0, max(0.0, s))


# ---------------------------------------------------------------------------
# trajectory


@dataclass
class Trajectory:
    eq: EquationSpec
    param: np.ndarray
    z: np.ndarray
    w: np.ndarray
    w1: np.ndarray
    w2: np.ndarray | None
    W: np.ndarray
    IW: np.ndarray
    flags: list
    poleEvents: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def samples(self):
        w2 = self.w2 if self.w2 is not None else [None] * len(self.z)
        return [Jet(complex(a), complex(b), complex(c), None if d is None else complex(d))
                for a, b, c, d in zip(self.z, self.w, self.w1, w2)]

    def jet(self, i):
        return Jet(complex(self.z[i]), complex(self.w[i]), complex(self.w1[i]),
                   None if self.w2 is None else complex(self.w2[i]))

    def to_csv(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        head = ["pathParam", "zRe", "zIm", "wRe", "wIm", "w1Re", "w1Im"]
        if self.w2 is not None:
            head += ["w2Re", "w2Im"]
        wr.writerow(head + ["flags"])
        for i in range(len(self.z)):
            vals = [self.param[i], self.z[i].real, self.z[i].imag, self.w[i].real,
                    self.w[i].imag, self.w1[i].real, self.w1[i].imag]
            if self.w2 is not None:
                vals += [self.w2[i].real, self.w2[i].imag]
            row = [repr(float(v)) for v in vals]
            wr.writerow(row + [self.flags[i]])
        return buf.getvalue()

    def pole_events_json(self):
        out = []
        for seed, par in self.poleEvents:
            d = seed.to_dict()
            d["pathParam"] = par
            out.append(d)
        return json.dumps(out, indent=1)

    @classmethod
    def from_csv(cls, eq, text):
        rows = list(csv.DictReader(io.StringIO(text)))
        z = np.array([complex(float(r["zRe"]), float(r["zIm"])) for r in rows])
        w = np.array([complex(float(r["wRe"]), float(r["wIm"])) for r in rows])
        w1 = np.array([complex(float(r["w1Re"]), float(r["w1Im"])) for r in rows])
        w2 = None
        if rows and "w2Re" in rows[0]:
            w2 = np.array([complex(float(r["w2Re"]), float(r["w2Im"])) for r in rows])
        par = np.array([float(r["pathParam"]) for r in rows])
        nan = np.full(len(rows), np.nan + 0j)
        return cls(eq, par, z, w, w1, w2, nan, nan.copy(), [r["flags"] for r in rows])


def _kind_params(eq):
    if eq.kind == "PI":
        return kernels.KIND["PI"], [0j]
    if eq.kind == "PII":
        return kernels.KIND["PII"], [eq.alpha]
    return kernels.KIND["PIV"], [eq.alpha]


def _state(eq, jet, W, IW):
    if eq.kind == "PIV":
        jet = jet.with_w2(eq)
        return [jet.w, jet.w1, jet.w2, W, IW]
    return [jet.w, jet.w1, W, IW]


def _initial_W(eq, jet):
    try:
        return first_integral(eq, jet).W, True
    except DivisionNearZero:
        return 0j, False


def _log_integral_W(Wser, z_in, z_out):
    """Integral of the Laurent series of W from z_in to z_out along a short path."""
    p = Wser.center
    t_in, t_out = z_in - p, z_out - p
    tot = 0j
    for c, e in zip(Wser.coeffs, Wser.exponents()):
        if c == 0:
            continue
        if e == -1:
            tot += c * cmath.log(t_out / t_in)
        else:
            ef = float(e) + 1
            tot += c * (t_out ** ef - t_in ** ef) / ef
    return tot


def integrate(eq: EquationSpec, start: Jet, path: PathSpec, tol: float = 1e-10,
              hmax: float | None = None, pole_trigger: float = POLE_TRIGGER,
              delta: float = DELTA, N_laurent: int = 24, max_poles: int = 10000) -> Trajectory:
    """Integrate eq from the start jet along path, hopping over poles."""
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-13, 1e-6]")
    if abs(start.z - path.start()) > 1e-12 * (1 + abs(start.z)):
        raise ValueError("start jet must lie at the path origin")
    kind, par = _kind_params(eq)
    a_exp = local_scale_exponent(eq)
    dim = 3 if eq.kind == "PIV" else 2
    W0, calibrated = _initial_W(eq, start)
    y = np.array(_state(eq, start, W0, 0j), dtype=complex)

    P, Z, Y, F = [], [], [], []
    events = []
    stats = {"accepted": 0, "rejected": 0, "attempted": 0}
    offset = 0.0
    n_hops = 0
    for pk, ppar, plen in path.pieces():
        hmax_s = np.inf if hmax is None else hmax / max(plen, 1e-300)
        s = 0.0
        keep_first = not P  # a new piece repeats the previous end sample
        flag_next = ""
        while True:
            ss, rows, _, status, st = kernels.run_path(
                kind, par, pk, ppar, y, s0=s, s1=1.0, tol=tol, hmax=hmax_s,
                trigger=pole_trigger, trig_exp=a_exp, aug=1)
            for k in stats:
                stats[k] += st[k]
            lo = 0 if keep_first else 1
            for i in range(lo, len(ss)):
                P.append(offset + ss[i] * plen)
                Z.append(_point(pk, ppar, ss[i]))
                Y.append(rows[i])
                F.append(flag_next if i == 0 else "")
            flag_next = ""
            if status == kernels.STATUS_DONE:
                y = rows[-1].copy()
                break
            if status in (kernels.STATUS_UNDERFLOW, kernels.STATUS_NONFINITE):
                raise StepSizeUnderflow(f"step size collapsed near z={Z[-1]}")
            if status == kernels.STATUS_FULL:
                raise StepSizeUnderflow("sample budget exhausted")
            # pole trigger
            n_hops += 1
            if n_hops > max_poles:
                raise PoleFitFailed("too many pole hops")
            s_trig = ss[-1]
            seed, approach = _fit_pole(eq, kind, par, pk, ppar, ss, rows, tol, a_exp,
                                       pole_trigger, N_laurent)
            r_hop = disc_radius(eq, seed.p, delta)
            Sw = laurent_w(seed, N_laurent)
            r_hop = min(r_hop, 0.9 * validity_radius(Sw))
            # h is weakly visible close to the pole; re-solve it at the disc edge
            seed = _refine_h(eq, seed, ss, rows, pk, ppar, r_hop, N_laurent)
            Sw = laurent_w(seed, N_laurent)
            s_c = _closest_s(pk, ppar, seed.p)
            speed = abs(_dzds(pk, ppar, s_c))
            s_out = s_c + r_hop / speed
            z_trig = _point(pk, ppar, s_trig)
            if s_out <= s_trig:
                s_out = s_trig + r_hop / speed
            if s_out >= 1.0:
                s_out = 1.0
            z_out = _point(pk, ppar, s_out)
            if abs(z_out - seed.p) < 1e-3 * r_hop:
                raise PoleFitFailed("path ends inside a pole disc")
            SW = laurent_W(seed, N_laurent)
            W_out = SW(z_out)
            IW_out = rows[-1][dim + 1] + _log_integral_W(SW, z_trig, z_out)
            jet_out = Jet(z_out, Sw(z_out), Sw(z_out, 1),
                          Sw(z_out, 2) if eq.kind == "PIV" else None)
            events.append((seed, offset + s_c * plen))
            y = np.array(_state(eq, jet_out, W_out, IW_out), dtype=complex)
            if not calibrated:
                calibrated = True  # W after a hop is the exact Laurent value
            s = s_out
            flag_next = "hop"
            keep_first = True
            if s >= 1.0:
                P.append(offset + plen)
                Z.append(z_out)
                Y.append(y.copy())
                F.append("hop")
                break
        offset += plen

    Y = np.array(Y)
    traj = Trajectory(eq, np.array(P), np.array(Z, dtype=complex), Y[:, 0], Y[:, 1],
                      Y[:, 2] if eq.kind == "PIV" else None, Y[:, dim], Y[:, dim + 1], F,
                      events)
    traj.diagnostics = _diagnostics(traj, stats, calibrated)
    return traj


def _fit_pole(eq, kind, par, pk, ppar, ss, rows, tol, a_exp, trigger, N):
    """Resample the approach to a pole densely and fit the Laurent model."""
    lo_w, hi_w = FIT_WINDOW
    z = np.array([_point(pk, ppar, s) for s in ss])
    sc = np.maximum(1.0, np.abs(z)) ** a_exp
    mag = np.abs(rows[:, 0]) / sc
    # earliest sample of the final approach that is already in the window
    i0 = len(ss) - 1
    while i0 > 0 and mag[i0 - 1] >= lo_w and mag[i0 - 1] <= mag[i0]:
        i0 -= 1
    if mag[i0] > lo_w and i0 > 0:
        i0 -= 1
    s_a, s_b = ss[i0], ss[-1]
    hm = max(abs(s_b - s_a) / (4 * MIN_FIT_SAMPLES), 1e-15)
    s2, rows2, _, _, _ = kernels.run_path(kind, par, pk, ppar, rows[i0], s0=s_a, s1=s_b,
                                          tol=tol, hmax=hm, trigger=0.0, aug=1)
    z2 = np.array([_point(pk, ppar, s) for s in s2])
    m2 = np.abs(rows2[:, 0]) / np.maximum(1.0, np.abs(z2)) ** a_exp
    sel = np.nonzero((m2 >= lo_w) & (m2 <= hi_w * 1.5))[0]
    if len(sel) < MIN_FIT_SAMPLES:
        sel = np.argsort(-m2)[:max(MIN_FIT_SAMPLES, 3)]
    jets = [Jet(complex(z2[i]), complex(rows2[i, 0]), complex(rows2[i, 1])) for i in sel]
    try:
        seed = detect_pole(eq, jets, N=min(N, 16))
    except FitFailed as exc:
        raise PoleFitFailed(str(exc)) from exc
    return seed, jets


def _refine_h(eq, seed, ss, rows, pk, ppar, r_lim, N):
    z = np.array([_point(pk, ppar, s) for s in ss])
    d = np.abs(z - seed.p)
    ok = np.nonzero(d <= r_lim)[0]
    if not len(ok):
        return seed
    i = ok[np.argmax(d[ok])]
    if d[i] < 0.3 * r_lim:
        return seed
    jet = Jet(complex(z[i]), complex(rows[i, 0]), complex(rows[i, 1]))
    h = h_from_jet(eq, seed.p, seed.eps, jet, N=N, h0=seed.h)
    return PoleSeed(eq, seed.p, seed.eps, h)


def _diagnostics(traj, stats, calibrated):
    eq = traj.eq
    d = dict(stats)
    d["nSamples"] = len(traj.z)
    d["nPoles"] = len(traj.poleEvents)
    d["calibrated"] = calibrated
    if eq.kind == "PIV" and traj.w2 is not None:
        w, w1, w2, z = traj.w, traj.w1, traj.w2, traj.z
        C = (w1 * w1 + 3 * w ** 4 + 8 * z * w ** 3 + 4 * (z * z - eq.alpha) * w * w
             + 2 * eq.beta - 2 * w * w2)
        d["maxConstraint"] = float(np.max(np.abs(C)))
    # drift of the carried W against the algebraic value
    drift = 0.0
    for i in range(len(traj.z)):
        if eq.kind == "PIV" and abs(traj.w[i]) < zero_guard(traj.z[i]):
            continue
        Wa = first_integral(eq, traj.jet(i)).W
        # the algebraic value cancels terms of size |w'|^2, so measure against that
        w, w1 = traj.w[i], traj.w1[i]
        size = abs(w1) ** 2 / (2 if eq.kind == "PI" else 4 * abs(w) if eq.kind == "PIV" else 1)
        drift = max(drift, abs(Wa - traj.W[i]) / (1 + abs(Wa) + size))
    d["maxFirstIntegralDrift"] = float(drift) if calibrated else None
    return d


def continue_W(traj: Trajectory, calibration: FirstIntegralValue):
    """W along the trajectory by quadrature, pinned to a calibration value."""
    eq = traj.eq
    dist = np.abs(traj.z - calibration.calibrationPoint)
    i = int(np.argmin(dist))
    if dist[i] > 1e-9 * (1 + abs(calibration.calibrationPoint)):
        raise CalibrationInvalid("calibration point is not a trajectory sample")
    if eq.kind == "PIV" and abs(traj.w[i]) < zero_guard(traj.z[i]):
        raise CalibrationInvalid("calibration sample lies within the zero guard")
    return list(traj.W + (calibration.W - traj.W[i]))


def growth_probe(traj: Trajectory, delta: float = DELTA) -> dict:
    """Empirical constants in w=O(|z|), w'=O(|z|^2+|w|^2), f#=O(|z|) for f=w/z."""
    eq = traj.eq
    z, w, w1 = traj.z, traj.w, traj.w1
    keep = np.abs(z) >= 1.0
    for seed, _ in traj.poleEvents:
        keep &= np.abs(z - seed.p) >= disc_radius(eq, seed.p, delta)
    out = {"nSamples": int(keep.sum())}
    if not keep.any():
        out.update(supWoverZ=None, supW1=None, supFsharp=None)
        return out
    zz, ww, ww1 = z[keep], w[keep], w1[keep]
    out["supWoverZ"] = float(np.max(np.abs(ww) / np.abs(zz)))
    out["supW1"] = float(np.max(np.abs(ww1) / (np.abs(zz) ** 2 + np.abs(ww) ** 2)))
    f = ww / zz
    fp = (ww1 * zz - ww) / zz ** 2
    out["supFsharp"] = float(np.max(np.abs(fp) / (1 + np.abs(f) ** 2) / np.abs(zz)))
    return out
