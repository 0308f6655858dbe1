"""Re-scaling windows w_h(zeta) = h^-a w(h + h^-b zeta), the autonomous limit
equations they approach, and cluster-set estimates of h^-d W(h)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .eqcore import DivisionNearZero, Jet, first_integral
from .errors import EvaluationFailed, NoAdmissibleSamples

EXPONENTS = {"PI": (Fraction(1, 2), Fraction(1, 4)),
             "PII": (Fraction(1, 2), Fraction(1, 2)),
             "PIV": (Fraction(1), Fraction(1))}
CLUSTER_EXPONENT = {"PI": Fraction(3, 2), "PII": Fraction(2), "PIV": Fraction(3)}
DELTA_FLOOR = 0.5

_LIMIT_KIND = {"PI": "i", "PII": "ii", "PIV": "iv", "i": "i", "ii": "ii", "iv": "iv"}


@dataclass(frozen=True)
class RescaleFrame:
    h: complex
    a: Fraction
    b: Fraction
    grid: tuple

    def __post_init__(self):
        if (self.a, self.b) not in EXPONENTS.values():
            raise ValueError("exponents must be one of (1/2,1/4), (1/2,1/2), (1,1)")

    @classmethod
    def for_kind(cls, kind, h, grid):
        a, b = EXPONENTS[kind]
        return cls(complex(h), a, b, tuple(complex(g) for g in grid))

    def points(self):
        hb = self.h ** (-float(self.b))
        return np.array([self.h + hb * g for g in self.grid])


def circle_grid(radius=0.5, n=32):
    return [radius * np.exp(2j * np.pi * k / n) for k in range(n)]


def _jet_of(accessor, z):
    if hasattr(accessor, "jet"):
        return accessor.jet(z)
    out = accessor(z)
    if isinstance(out, Jet):
        return out
    w, w1 = out[:2]
    return Jet(complex(z), complex(w), complex(w1))


def rescale_window(accessor, frame: RescaleFrame):
    """(zeta, w_h, dw_h/dzeta) on the frame grid."""
    a, b = float(frame.a), float(frame.b)
    zs = frame.points()
    w = np.empty(len(zs), dtype=complex)
    w1 = np.empty(len(zs), dtype=complex)
    for i, z in enumerate(zs):
        try:
            j = _jet_of(accessor, z)
        except Exception as exc:  # noqa: BLE001 - any accessor failure is reported the same way
            raise EvaluationFailed(f"accessor failed at z={z}: {exc}") from exc
        w[i], w1[i] = j.w, j.w1
    ha = frame.h ** (-a)
    hab = frame.h ** (-a - b)
    return np.array(frame.grid), ha * w, hab * w1


def limit_polynomial(kind, w, c):
    k = _LIMIT_KIND[kind]
    if k == "i":
        return 4 * w ** 3 + 2 * w - 2 * c
    if k == "ii":
        return w ** 4 + w ** 2 - c
    return w ** 4 + 4 * w ** 3 + 4 * w ** 2 - 4 * c * w


def limit_polynomial_dw(kind, w, c):
    k = _LIMIT_KIND[kind]
    if k == "i":
        return 12 * w ** 2 + 2
    if k == "ii":
        return 4 * w ** 3 + 2 * w
    return 4 * w ** 3 + 12 * w ** 2 + 8 * w - 4 * c


def limit_ode_residual(kind, w, w1, c) -> float:
    """max |w'^2 - P(w; c)| over the samples."""
    w = np.asarray(w, dtype=complex)
    w1 = np.asarray(w1, dtype=complex)
    return float(np.max(np.abs(w1 ** 2 - limit_polynomial(kind, w, c))))


def constant_limit_catalog(kind):
    """Constant limit functions w* with their parameters c* (double roots of P)."""
    k = _LIMIT_KIND[kind]
    if k == "i":
        r = 1 / math.sqrt(6)
        c = math.sqrt(2 / 27)
        return [(1j * r, 1j * c), (-1j * r, -1j * c)]
    if k == "ii":
        r = 1 / math.sqrt(2)
        return [(0j, 0j), (1j * r, -0.25 + 0j), (-1j * r, -0.25 + 0j)]
    return [(0j, 0j), (-2 + 0j, 0j), (-2 / 3 + 0j, -8 / 27 + 0j)]


def period_catalog(kind):
    """(c*, omega) for the trigonometric limits at exceptional parameters."""
    k = _LIMIT_KIND[kind]
    if k == "ii":
        return [(0j, 1j * math.pi), (-0.25 + 0j, math.pi * math.sqrt(2) + 0j)]
    if k == "iv":
        return [(0j, 1j * math.pi), (-8 / 27 + 0j, math.pi * math.sqrt(3) + 0j)]
    return []


def trig_limit(kind, c, zeta, sign=1):
    """Closed-form trigonometric limit functions and their derivatives."""
    zeta = np.asarray(zeta, dtype=complex)
    k = _LIMIT_KIND[kind]
    if k == "ii" and c == 0:
        w = sign / np.sinh(zeta)
        return w, -sign * np.cosh(zeta) / np.sinh(zeta) ** 2
    if k == "ii" and c == -0.25:
        s2 = math.sqrt(2)
        t = np.tan(zeta / s2)
        return sign * t / s2, sign * (1 + t * t) / 2
    if k == "iv" and c == 0:
        e = np.exp(2 * sign * zeta)
        return 2 * e / (1 - e), 4 * sign * e / (1 - e) ** 2
    if k == "iv" and abs(c + 8 / 27) < 1e-15:
        s3 = math.sqrt(3)
        t = np.tan(zeta / s3)
        den = 9 * t * t - 3
        return 8 / den, -8 * 18 * t * (1 + t * t) / s3 / den ** 2
    raise ValueError("no trigonometric limit catalogued for these parameters")


def pole_cluster_value(seed):
    """Cluster contribution of a pole from its Laurent data.

    I: 14 h p^-3/2 (the constant term of W at a pole of I is +14h),
    II: 10 eps h p^-2 - 7/36, IV: 2 h p^-3.
    """
    p, h = seed.p, seed.h
    k = seed.eq.kind
    if k == "PI":
        return 14 * h * p ** -1.5
    if k == "PII":
        return 10 * seed.eps * h * p ** -2 - 7 / 36
    return 2 * h * p ** -3


@dataclass
class ClusterEstimate:
    kind: str
    d: Fraction
    samples: list = field(default_factory=list)   # (h, value, scaledDistance)
    rejected: int = 0
    poleValues: list = field(default_factory=list)  # (p, value)

    def values(self):
        return np.array([v for _, v, _ in self.samples], dtype=complex)

    def histogram(self, bins=20, range_=None):
        v = self.values()
        if not len(v):
            return {"counts": [], "edges": []}
        mags = np.abs(v)
        counts, edges = np.histogram(mags, bins=bins, range=range_)
        return {"quantity": "|h^-d W(h)|", "counts": counts.tolist(),
                "edges": [float(e) for e in edges]}

    def to_dict(self):
        return {
            "kind": self.kind, "d": str(self.d), "rejected": self.rejected,
            "samples": [{"h": {"re": h.real, "im": h.imag}, "value": {"re": v.real, "im": v.imag},
                         "scaledDistance": s} for h, v, s in self.samples],
            "poles": [{"p": {"re": p.real, "im": p.imag}, "value": {"re": v.real, "im": v.imag}}
                      for p, v in self.poleValues],
            "histogram": self.histogram(),
        }


def cluster_estimate(accessor, theta, rRange, poles, deltaFloor=DELTA_FLOOR, n=60, eq=None):
    """Samples of h^-d W(h) along the ray arg h = theta, admitted only when
    |h|^b dist(h, poles) >= deltaFloor; also the pole-based contributions."""
    eq = eq or accessor.eq
    kind = eq.kind
    _, b = EXPONENTS[kind]
    d = CLUSTER_EXPONENT[kind]
    P = np.array([s.p for s in poles], dtype=complex)
    est = ClusterEstimate(kind, d)
    r0, r1 = rRange
    for r in np.linspace(r0, r1, n):
        h = r * np.exp(1j * theta)
        dist = np.min(np.abs(P - h)) if len(P) else np.inf
        scaled = float(abs(h) ** float(b) * dist)
        if scaled < deltaFloor:
            est.rejected += 1
            continue
        try:
            j = _jet_of(accessor, h)
            W = first_integral(eq, j).W
        except (DivisionNearZero, EvaluationFailed, ZeroDivisionError):
            est.rejected += 1
            continue
        est.samples.append((complex(h), complex(W * h ** (-float(d))), scaled))
    for s in poles:
        est.poleValues.append((s.p, complex(pole_cluster_value(s))))
    if not est.samples:
        raise NoAdmissibleSamples("no sample cleared the pole-distance floor")
    return est
