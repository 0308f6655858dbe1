"""Equations I, II and IV: parameters, right-hand sides and first integrals.

The fourth equation is kept in two forms.  The algebraic form

    2 w w'' = w'^2 + 3 w^4 + 8 z w^3 + 4 (z^2 - alpha) w^2 + 2 beta

needs a division by w, so near zeros of w the differentiated (third order,
polynomial) form is used instead and the algebraic relation is carried as a
conserved constraint.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, replace
from typing import Optional

from .errors import DivisionNearZero

KINDS = ("PI", "PII", "PIV")

ZERO_GUARD = 1e-3


def zero_guard(z) -> float:
    return ZERO_GUARD * max(1.0, abs(z))


@dataclass(frozen=True)
class EquationSpec:
    kind: str
    alpha: complex = 0j
    beta: complex = 0j
    gamma: complex = 0j
    gammaBranch: str = "plus"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown equation kind {self.kind!r}")
        if self.gammaBranch not in ("plus", "minus"):
            raise ValueError("gammaBranch must be 'plus' or 'minus'")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "gamma", complex(self.gamma))

    @classmethod
    def pi(cls):
        return cls("PI")

    @classmethod
    def pii(cls, alpha):
        return cls("PII", alpha=alpha)

    @classmethod
    def piv(cls, alpha, beta, branch="plus"):
        """PIV from (alpha, beta); gamma is the chosen branch of sqrt(-beta/2)."""
        g = cmath.sqrt(-complex(beta) / 2)
        if branch == "minus":
            g = -g
        return cls("PIV", alpha=alpha, beta=beta, gamma=g, gammaBranch=branch)

    @classmethod
    def piv_gamma(cls, alpha, gamma):
        """PIV from (alpha, gamma); beta = -2 gamma^2 and the branch is recorded."""
        gamma = complex(gamma)
        principal = cmath.sqrt(gamma * gamma)
        branch = "plus" if abs(principal - gamma) <= abs(principal + gamma) else "minus"
        return cls("PIV", alpha=alpha, beta=-2 * gamma * gamma, gamma=gamma,
                   gammaBranch=branch)

    def params(self):
        return (self.alpha, self.beta, self.gamma)

    def to_dict(self):
        return {
            "kind": self.kind,
            "alpha": {"re": self.alpha.real, "im": self.alpha.imag},
            "beta": {"re": self.beta.real, "im": self.beta.imag},
            "gammaBranch": self.gammaBranch,
        }

    @classmethod
    def from_dict(cls, d):
        kind = d["kind"]
        a = complex(d["alpha"]["re"], d["alpha"]["im"])
        b = complex(d["beta"]["re"], d["beta"]["im"])
        if kind == "PI":
            return cls.pi()
        if kind == "PII":
            return cls.pii(a)
        return cls.piv(a, b, d.get("gammaBranch", "plus"))


@dataclass(frozen=True)
class Jet:
    z: complex
    w: complex
    w1: complex
    w2: Optional[complex] = None

    def with_w2(self, eq: EquationSpec) -> "Jet":
        if self.w2 is not None:
            return self
        return replace(self, w2=rhs(eq, self))


@dataclass(frozen=True)
class FirstIntegralValue:
    W: complex
    calibrationPoint: complex


def rhs(eq: EquationSpec, jet: Jet) -> complex:
    """Second derivative w'' from the equation."""
    z, w, w1 = jet.z, jet.w, jet.w1
    if eq.kind == "PI":
        return z + 6 * w * w
    if eq.kind == "PII":
        return eq.alpha + z * w + 2 * w ** 3
    if abs(w) < zero_guard(z):
        raise DivisionNearZero(f"|w|={abs(w):.3g} below zero guard at z={z}")
    return (w1 * w1 + 3 * w ** 4 + 8 * z * w ** 3
            + 4 * (z * z - eq.alpha) * w * w + 2 * eq.beta) / (2 * w)


def rhs3(eq: EquationSpec, jet: Jet) -> complex:
    """Third derivative for PIV from the differentiated equation."""
    if eq.kind != "PIV":
        raise ValueError("rhs3 is defined for PIV only")
    z, w, w1 = jet.z, jet.w, jet.w1
    return (6 * w * w * w1 + 4 * w * w + 12 * z * w * w1 + 4 * z * w
            + 4 * (z * z - eq.alpha) * w1)


def W_prime(eq: EquationSpec, z, w):
    """Derivative of the first integral W."""
    if eq.kind == "PI":
        return w
    if eq.kind == "PII":
        return w * w
    return w * w + 2 * z * w


def first_integral(eq: EquationSpec, jet: Jet) -> FirstIntegralValue:
    z, w, w1 = jet.z, jet.w, jet.w1
    if eq.kind == "PI":
        W = (4 * w ** 3 + 2 * z * w - w1 * w1) / 2
    elif eq.kind == "PII":
        W = w ** 4 + z * w * w + 2 * eq.alpha * w - w1 * w1
    else:
        if abs(w) < zero_guard(z):
            raise DivisionNearZero(f"|w|={abs(w):.3g} below zero guard at z={z}")
        W = (w ** 4 + 4 * z * w ** 3 + 4 * (z * z - eq.alpha) * w * w
             - 2 * eq.beta - w1 * w1) / (4 * w)
    return FirstIntegralValue(W=complex(W), calibrationPoint=complex(z))


def constraint_residual(eq: EquationSpec, jet: Jet) -> float:
    """|C| for the algebraic PIV relation evaluated on a jet carrying w''."""
    if jet.w2 is None:
        raise ValueError("constraint_residual needs w2")
    z, w, w1, w2 = jet.z, jet.w, jet.w1, jet.w2
    C = (w1 * w1 + 3 * w ** 4 + 8 * z * w ** 3 + 4 * (z * z - eq.alpha) * w * w
         + 2 * eq.beta - 2 * w * w2)
    return abs(C)


def ode_residual(eq: EquationSpec, z, w, w1, w2, relative=True):
    """Residual of the equation in polynomial form.

    With relative=True the residual is divided by the sum of the absolute
    values of the individual terms, which keeps the number meaningful near
    poles and at large |z|.
    """
    if eq.kind == "PI":
        terms = (w2, -z, -6 * w * w)
    elif eq.kind == "PII":
        terms = (w2, -eq.alpha, -z * w, -2 * w ** 3)
    else:
        terms = (2 * w * w2, -w1 * w1, -3 * w ** 4, -8 * z * w ** 3,
                 -4 * (z * z - eq.alpha) * w * w, -2 * eq.beta)
    r = abs(sum(terms))
    if not relative:
        return r
    scale = sum(abs(t) for t in terms)
    return r / scale if scale > 0 else r


def local_scale_exponent(eq: EquationSpec) -> float:
    """Growth exponent a with w = O(|z|^a) off pole discs."""
    return 1.0 if eq.kind == "PIV" else 0.5


def disc_exponent(eq: EquationSpec) -> float:
    """Exponent b of the pole disc radius delta*|p|^(-b)."""
    return {"PI": 0.25, "PII": 0.5, "PIV": 1.0}[eq.kind]


def disc_radius(eq: EquationSpec, p, delta=0.5) -> float:
    return delta * max(1.0, abs(p)) ** (-disc_exponent(eq))
