"""Backlund transformations of II and IV, trivial symmetries, signature
algebra and chains of sub-normal solutions.

Jets are transformed pointwise; the derivative of the image is obtained in
closed form by differentiating the transformation and eliminating w'' with
the equation.
"""
from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .eqcore import EquationSpec, Jet, rhs, zero_guard
from .errors import (AtZeroOfW, AtZeroOfWTilde, DenominatorVanishes, ParameterExcluded)

CBRT2 = 2 ** (1 / 3)


@dataclass(frozen=True)
class ParameterState:
    alpha: complex
    gamma: complex
    history: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "gamma", complex(self.gamma))

    @property
    def beta(self):
        return -2 * self.gamma ** 2

    def eq(self):
        return EquationSpec.piv_gamma(self.alpha, self.gamma)

    def push(self, alpha, gamma, step):
        return ParameterState(alpha, gamma, self.history + (step,))


def forward_params(ps: ParameterState) -> ParameterState:
    a, g = ps.alpha, ps.gamma
    return ps.push((1 - a + 3 * g) / 2, (1 + a + g) / 2, "forward")


def inverse_params(ps: ParameterState) -> ParameterState:
    a, g = ps.alpha, ps.gamma
    return ps.push((-1 - a + 3 * g) / 2, (a + g - 1) / 2, "inverse")


def _w2(eq, jet):
    if jet.w2 is not None:
        return jet.w2
    return rhs(eq, jet)


def biv_forward(jet: Jet, ps: ParameterState):
    """w~ = (w' - 2 gamma - 2 z w - w^2) / (2 w) with its derivative."""
    z, w, w1 = jet.z, jet.w, jet.w1
    if abs(w) < zero_guard(z):
        raise AtZeroOfW(f"|w|={abs(w):.3g} at z={z}")
    g = ps.gamma
    eq = ps.eq()
    w2 = rhs(eq, Jet(z, w, w1))
    N = w1 - 2 * g - 2 * z * w - w * w
    N1 = w2 - 2 * w - 2 * z * w1 - 2 * w * w1
    wt = N / (2 * w)
    wt1 = (N1 * w - N * w1) / (2 * w * w)
    return Jet(z, wt, wt1), forward_params(ps)


def biv_inverse(jet: Jet, ps: ParameterState):
    """w = -(w~' + 2 gamma~ + 2 z w~ + w~^2) / (2 w~) with its derivative."""
    z, w, w1 = jet.z, jet.w, jet.w1
    if abs(w) < zero_guard(z):
        raise AtZeroOfWTilde(f"|w~|={abs(w):.3g} at z={z}")
    g = ps.gamma
    eq = ps.eq()
    w2 = rhs(eq, Jet(z, w, w1))
    M = w1 + 2 * g + 2 * z * w + w * w
    M1 = w2 + 2 * w + 2 * z * w1 + 2 * w * w1
    wn = -M / (2 * w)
    wn1 = -(M1 * w - M * w1) / (2 * w * w)
    return Jet(z, wn, wn1), inverse_params(ps)


def bii_transforms(jet: Jet, alpha, direction="plus", guard=1e-10):
    """B+ (alpha -> alpha+1) or B- (alpha -> alpha-1) for equation II."""
    alpha = complex(alpha)
    z, w, w1 = jet.z, jet.w, jet.w1
    w2 = alpha + z * w + 2 * w ** 3
    if direction == "plus":
        if alpha == -0.5:
            raise ParameterExcluded("B+ is undefined for alpha = -1/2")
        D = w1 + w * w + z / 2
        if abs(D) < guard * (1 + abs(w1) + abs(w) ** 2 + abs(z)):
            raise DenominatorVanishes(f"w'+w^2+z/2 vanishes at z={z}")
        D1 = w2 + 2 * w * w1 + 0.5
        c = alpha + 0.5
        return Jet(z, -w - c / D, -w1 + c * D1 / (D * D)), alpha + 1
    if direction == "minus":
        if alpha == 0.5:
            raise ParameterExcluded("B- is undefined for alpha = 1/2")
        E = w1 - w * w - z / 2
        if abs(E) < guard * (1 + abs(w1) + abs(w) ** 2 + abs(z)):
            raise DenominatorVanishes(f"w'-w^2-z/2 vanishes at z={z}")
        E1 = w2 - 2 * w * w1 - 0.5
        c = alpha - 0.5
        return Jet(z, -w + c / E, -w1 - c * E1 / (E * E)), alpha - 1
    raise ValueError("direction must be 'plus' or 'minus'")


def bii_half_transform(jet: Jet, sign=1):
    """Map a solution of II with alpha = 1/2 to one with alpha = 0.

    z = -2^(1/3) t and -2^(1/3) y(t)^2 = w' - w^2 - z/2; returns the jet of
    y at t (derivative in t).
    """
    z, w, w1 = jet.z, jet.w, jet.w1
    v = w1 - w * w - z / 2
    w2 = 0.5 + z * w + 2 * w ** 3
    v1 = w2 - 2 * w * w1 - 0.5
    y = sign * cmath.sqrt(-v / CBRT2)
    if y == 0:
        raise DenominatorVanishes("y vanishes; derivative undefined")
    t = -z / CBRT2
    return Jet(t, y, v1 / (2 * y)), 0j


def trivial_symmetries(jet: Jet, eq: EquationSpec, which="rotate"):
    """v(z) = -i w(iz) (alpha -> -alpha) or v(z) = conj w(conj z)."""
    if eq.kind != "PIV":
        raise ValueError("trivial symmetries are implemented for IV")
    if which == "rotate":
        z = -1j * jet.z
        w2 = None if jet.w2 is None else 1j * jet.w2
        new = Jet(z, -1j * jet.w, jet.w1, w2)
        return new, EquationSpec.piv_gamma(-eq.alpha, eq.gamma)
    if which == "conjugate":
        c = lambda x: None if x is None else complex(x).conjugate()
        new = Jet(c(jet.z), c(jet.w), c(jet.w1), c(jet.w2))
        return new, EquationSpec.piv_gamma(eq.alpha.conjugate(), eq.gamma.conjugate())
    raise ValueError("which must be 'rotate' or 'conjugate'")


# ---------------------------------------------------------------------------
# signatures

SYMBOLS = ("alpha", "gamma", "-gamma")
_NEG = {"alpha": "alpha", "gamma": "-gamma", "-gamma": "gamma"}


@dataclass(frozen=True)
class SignatureIV:
    """Leading W-asymptotics W ~ 2 a_nu z on the Stokes sectors Sigma_0..Sigma_3."""
    symbols: tuple
    values: tuple = (None, None, None, None)

    def __post_init__(self):
        if len(self.symbols) != 4 or any(s not in SYMBOLS for s in self.symbols):
            raise ValueError("signature entries must be alpha, gamma or -gamma")

    @classmethod
    def from_params(cls, symbols, alpha, gamma):
        val = {"alpha": complex(alpha), "gamma": complex(gamma), "-gamma": -complex(gamma)}
        return cls(tuple(symbols), tuple(val[s] for s in symbols))

    def order_condition(self, tol=1e-9):
        """a1-a0, a1-a2, a3-a2, a3-a0 real and non-negative."""
        a = self.values
        if any(v is None for v in a):
            return None
        d = [a[1] - a[0], a[1] - a[2], a[3] - a[2], a[3] - a[0]]
        return all(abs(x.imag) <= tol and x.real >= -tol for x in d)

    def __str__(self):
        return "(" + " ".join(self.symbols) + ")"


def signature_transform(sig: SignatureIV, which) -> SignatureIV:
    s, v = sig.symbols, sig.values
    if which == "rotate":
        ns = (_NEG[s[1]], _NEG[s[2]], _NEG[s[3]], _NEG[s[0]])
        nv = tuple(None if x is None else -x for x in (v[1], v[2], v[3], v[0]))
        return SignatureIV(ns, nv)
    if which == "conjugate":
        c = lambda x: None if x is None else complex(x).conjugate()
        return SignatureIV((s[0], s[3], s[2], s[1]), (c(v[0]), c(v[3]), c(v[2]), c(v[1])))
    raise ValueError("which must be 'rotate' or 'conjugate'")


# abstract shapes with letters in order of first appearance
_FORMS = {1: "aabb", 2: "abab", 3: "aaab", 4: "abac", 5: "aacb"}
_CONCRETE = {"a": "alpha", "b": "-gamma", "c": "gamma"}


def _shape(symbols):
    seen = {}
    out = []
    for s in symbols:
        if s not in seen:
            seen[s] = "abc"[len(seen)]
        out.append(seen[s])
    return "".join(out), seen


@dataclass
class CanonicalForm:
    form: int
    moves: tuple
    abstract: SignatureIV
    concrete: tuple
    relabel: dict = field(default_factory=dict)
    branchFlip: bool = False


def canonical_form(sig: SignatureIV) -> CanonicalForm:
    """Reduce a signature by the dihedral action to one of the five forms.

    Breadth-first over move words in {rotate, conjugate}; the group has
    eight elements so words of length <= 8 suffice.  The abstract letters are
    then identified with alpha, -gamma, gamma (recording a branch flip of
    gamma when the letter b carries the symbol +gamma).
    """
    frontier = [((), sig)]
    seen = set()
    for depth in range(9):
        nxt = []
        for moves, s in frontier:
            key = s.symbols
            if key in seen:
                continue
            seen.add(key)
            shape, letters = _shape(s.symbols)
            for num, form in _FORMS.items():
                # letters may appear in any order: try all relabelings
                for perm in itertools.permutations("abc"):
                    mp = dict(zip("abc", perm))
                    if "".join(mp[c] for c in shape) == form:
                        inv = {sym: mp[l] for sym, l in letters.items()}
                        concrete = tuple(_CONCRETE[inv[x]] for x in s.symbols)
                        bsym = [sym for sym, l in inv.items() if l == "b"]
                        flip = bool(bsym) and bsym[0] == "gamma"
                        return CanonicalForm(num, moves, s, concrete, inv, flip)
            nxt.append((moves + ("rotate",), signature_transform(s, "rotate")))
            nxt.append((moves + ("conjugate",), signature_transform(s, "conjugate")))
        frontier = nxt
    raise ValueError(f"signature {sig} has no canonical form (constant signature)")


def delta_of_signature(sig: SignatureIV):
    """Delta(w) and per-sector contributions: -2(-1)^nu where w ~ -2z, else 0."""
    contrib = [(-2 * (-1) ** nu if s == "alpha" else 0) for nu, s in enumerate(sig.symbols)]
    return sum(contrib), contrib


def signature_after_forward(sig: SignatureIV, ps: ParameterState) -> SignatureIV:
    """Signature of the forward transform: alpha -> gamma~, -gamma -> -gamma~, gamma -> alpha~."""
    new = forward_params(ps)
    m = {"alpha": "gamma", "-gamma": "-gamma", "gamma": "alpha"}
    return SignatureIV.from_params(tuple(m[s] for s in sig.symbols), new.alpha, new.gamma)


# ---------------------------------------------------------------------------
# chains


def chain_build(k: int, alpha0, parity="even"):
    """Parameter states from a Weber-Hermite seed (alpha0 + gamma0 = -1) up a
    chain of inverse transforms of length 2k (even) or 2k-1 (odd)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    n = 2 * k if parity == "even" else 2 * k - 1
    if n < 0:
        raise ValueError("odd chains need k >= 1")
    ps = ParameterState(alpha0, -1 - complex(alpha0), ("weber-hermite",))
    out = [ps]
    for _ in range(n):
        ps = inverse_params(ps)
        out.append(ps)
    return out


def _chain_symbolic(order, alpha0, gamma0):
    """w_k as rational functions of (z, w0) and their z-derivatives."""
    import sympy as sp
    z, w0 = sp.symbols("z w0")
    def exact(x):
        # exact binary rationals keep sympy's cancellation exact
        x = complex(x)
        return sp.nsimplify(sp.Rational(x.real) + sp.I * sp.Rational(x.imag), rational=True)

    a, g = exact(alpha0), exact(gamma0)
    d0 = 2 * g + 2 * z * w0 + w0 ** 2  # w0'

    def D(expr):
        return sp.diff(expr, z) + sp.diff(expr, w0) * d0

    w = w0
    wd = d0
    for _ in range(order):
        w_new = -(wd + 2 * g + 2 * z * w + w ** 2) / (2 * w)
        a, g = (-1 - a + 3 * g) / 2, (a + g - 1) / 2
        w = sp.cancel(sp.together(w_new))
        wd = sp.cancel(sp.together(D(w)))
    wdd = sp.cancel(sp.together(D(wd)))
    return z, w0, w, wd, wdd


@dataclass
class ChainSolution:
    """Order-n member of a chain above a Weber-Hermite solution.

    w_n is a rational function of (z, w0); near poles of w0 it is evaluated
    in the variable v0 = 1/w0 instead.
    """
    seed: object  # special.LinearizedSolution with s = +1
    order: int
    params: list
    _fw: object = None
    _fv: object = None

    def __post_init__(self):
        import sympy as sp
        z, w0, w, wd, wdd = _chain_symbolic(self.order, self.params[0].alpha,
                                            self.params[0].gamma)
        v0 = sp.Symbol("v0")
        exprs_w = [w, wd, wdd]
        exprs_v = [sp.cancel(sp.together(e.subs(w0, 1 / v0))) for e in exprs_w]
        self._fw = sp.lambdify((z, w0), exprs_w, "numpy")
        self._fv = sp.lambdify((z, v0), exprs_v, "numpy")
        self.exprs = exprs_w

    @property
    def eq(self):
        return self.params[-1].eq()

    def from_state(self, z, y, flags):
        """(w, w', w'') arrays from Riccati states (w0 = y or 1/y by flag)."""
        z = np.asarray(z, dtype=complex)
        y = np.asarray(y, dtype=complex)
        flags = np.asarray(flags)
        out = [np.empty_like(z) for _ in range(3)]
        m0 = flags == 0
        with np.errstate(all="ignore"):
            if m0.any():
                r = self._fw(z[m0], y[m0])
                for i in range(3):
                    out[i][m0] = np.broadcast_to(r[i], z[m0].shape)
            if (~m0).any():
                r = self._fv(z[~m0], y[~m0])
                for i in range(3):
                    out[i][~m0] = np.broadcast_to(r[i], z[~m0].shape)
        return out

    def jet(self, z):
        y, f = self.seed.state(z)
        w, w1, w2 = self.from_state(np.array([z]), np.array([y]), np.array([f]))
        return Jet(complex(z), complex(w[0]), complex(w1[0]), complex(w2[0]))


def chain_solution(seed, order: int) -> ChainSolution:
    """Build the order-n chain member above a plus-branch Weber-Hermite seed."""
    if seed.family != "WH" or seed.s != 1:
        raise ValueError("chains start from a plus-branch Weber-Hermite solution")
    ps = ParameterState(seed.eq.alpha, seed.gamma, ("weber-hermite",))
    params = [ps]
    for _ in range(order):
        params.append(inverse_params(params[-1]))
    return ChainSolution(seed, order, params)


@dataclass
class RotatedSolution:
    """v(z) = -i w(iz) for any accessor with a .jet method (alpha -> -alpha)."""
    base: object

    @property
    def eq(self):
        e = self.base.eq
        return EquationSpec.piv_gamma(-e.alpha, e.gamma)

    def jet(self, z):
        j = self.base.jet(1j * complex(z))
        w2 = None if j.w2 is None else 1j * j.w2
        return Jet(complex(z), -1j * j.w, j.w1, w2)
