"""Dense complex polynomials in exact-rational or big-float coefficient mode.

Exact coefficients are Gaussian rationals (sympy's ``QQ_I`` domain, backed by
gmpy2 when available); big-float coefficients are ``mpc`` values of a private
mpmath context carrying the requested number of mantissa bits. Conversion only
goes one way, rational to float.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, List, Sequence, Tuple, Union
import logging

from cachetools import LRUCache, cached
from mpmath import MPContext
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.domains.gaussiandomains import GaussianRational

from eigenwkb.config import settings
from eigenwkb.utils.errors import NonConvergence

logger = logging.getLogger(__name__)

# Degree of the zero polynomial; compares below every integer degree.
ZERO_DEGREE = float("-inf")


class Mode(str, Enum):
    RATIONAL = "rational"
    FLOAT = "float"


@cached(LRUCache(maxsize=32))
def get_context(bits: int) -> MPContext:
    """Private mpmath context with ``bits`` of working precision."""
    ctx = MPContext()
    ctx.prec = bits
    return ctx


# --- scalars -----------------------------------------------------------------

def _qq(value: Fraction):
    return QQ(value.numerator, value.denominator)


def exact(value: Any) -> GaussianRational:
    """Coerce ints, Fractions, decimal/fraction strings, (re, im) pairs and
    Python complex numbers into an exact Gaussian rational."""
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (tuple, list)):
        re, im = value
        return QQ_I(_qq(Fraction(re)), _qq(Fraction(im)))
    if isinstance(value, complex):
        return QQ_I(_qq(Fraction(value.real)), _qq(Fraction(value.imag)))
    return QQ_I(_qq(Fraction(value)), QQ(0))


def is_exact(value: Any) -> bool:
    return isinstance(value, (GaussianRational, int, Fraction))


def parts(value: GaussianRational) -> Tuple[Fraction, Fraction]:
    """Real and imaginary parts of an exact scalar as Fractions."""
    return (Fraction(int(value.x.numerator), int(value.x.denominator)),
            Fraction(int(value.y.numerator), int(value.y.denominator)))


def to_mp(value: Any, ctx: MPContext):
    """Round a scalar to an ``mpc`` of ``ctx``; already-float values pass through."""
    if isinstance(value, GaussianRational):
        re, im = parts(value)
        return ctx.mpc(ctx.convert(re), ctx.convert(im))
    if isinstance(value, Fraction):
        return ctx.mpc(ctx.convert(value))
    return ctx.mpc(value)


def is_zero(value: Any) -> bool:
    return not value


def falling_factorial(n: int, k: int) -> int:
    """(n)_k = n (n-1) ... (n-k+1), with (n)_0 = 1."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    result = 1
    for i in range(k):
        result *= n - i
    return result


def falling_factorial_scalar(r: Any, k: int):
    """Falling factorial of a rational or complex-rational argument, exact."""
    r = exact(r)
    result = QQ_I.one
    for i in range(k):
        result = result * (r - i)
    return result


# --- polynomials -------------------------------------------------------------

@dataclass(frozen=True)
class Poly:
    coeffs: Tuple[Any, ...]
    mode: Mode = Mode.RATIONAL
    bits: int = settings.DEFAULT_BITS

    def __post_init__(self):
        coeffs = list(self.coeffs)
        while coeffs and is_zero(coeffs[-1]):
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[Any], mode: Mode = Mode.RATIONAL,
                    bits: int = None) -> "Poly":
        bits = bits or settings.DEFAULT_BITS
        if mode == Mode.RATIONAL:
            return cls(tuple(exact(c) for c in coeffs), Mode.RATIONAL, bits)
        ctx = get_context(bits)
        return cls(tuple(to_mp(c, ctx) for c in coeffs), Mode.FLOAT, bits)

    @classmethod
    def zero(cls, mode: Mode = Mode.RATIONAL, bits: int = None) -> "Poly":
        return cls((), mode, bits or settings.DEFAULT_BITS)

    @classmethod
    def monomial(cls, k: int, coeff: Any = 1, mode: Mode = Mode.RATIONAL,
                 bits: int = None) -> "Poly":
        return cls.from_coeffs([0] * k + [coeff], mode, bits)

    @classmethod
    def from_roots(cls, roots: Sequence[Any], mode: Mode = Mode.RATIONAL,
                   bits: int = None) -> "Poly":
        result = cls.from_coeffs([1], mode, bits)
        for r in roots:
            result = result * cls.from_coeffs([-r, 1], mode, bits)
        return result

    @property
    def ctx(self) -> MPContext:
        return get_context(self.bits)

    @property
    def degree(self) -> Union[int, float]:
        return len(self.coeffs) - 1 if self.coeffs else ZERO_DEGREE

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self):
        if not self.coeffs:
            return self._zero()
        return self.coeffs[-1]

    @property
    def is_monic(self) -> bool:
        if not self.coeffs:
            return False
        if self.mode == Mode.RATIONAL:
            return self.lead == QQ_I.one
        ctx = self.ctx
        return abs(self.lead - 1) <= ctx.eps

    def coeff(self, i: int):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self._zero()

    def _zero(self):
        return QQ_I.zero if self.mode == Mode.RATIONAL else self.ctx.mpc(0)

    def _coerce(self, other: "Poly") -> Tuple["Poly", "Poly"]:
        if self.mode == other.mode:
            if self.mode == Mode.FLOAT and self.bits != other.bits:
                bits = max(self.bits, other.bits)
                return to_float(self, bits), to_float(other, bits)
            return self, other
        bits = self.bits if self.mode == Mode.FLOAT else other.bits
        return to_float(self, bits), to_float(other, bits)

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self._coerce(other)
        n = max(len(a.coeffs), len(b.coeffs))
        return Poly(tuple(a.coeff(i) + b.coeff(i) for i in range(n)), a.mode, a.bits)

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs), self.mode, self.bits)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: Union["Poly", Any]) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        a, b = self._coerce(other)
        if a.is_zero or b.is_zero:
            return Poly.zero(a.mode, a.bits)
        out = [a._zero()] * (len(a.coeffs) + len(b.coeffs) - 1)
        for i, x in enumerate(a.coeffs):
            if is_zero(x):
                continue
            for j, y in enumerate(b.coeffs):
                out[i + j] = out[i + j] + x * y
        return Poly(tuple(out), a.mode, a.bits)

    __rmul__ = __mul__

    def scale(self, factor: Any) -> "Poly":
        if self.mode == Mode.RATIONAL:
            if is_exact(factor):
                factor = exact(factor)
                return Poly(tuple(c * factor for c in self.coeffs), self.mode, self.bits)
            return to_float(self, self.bits).scale(factor)
        factor = to_mp(factor, self.ctx)
        return Poly(tuple(c * factor for c in self.coeffs), self.mode, self.bits)

    def __call__(self, z: Any):
        return evaluate(self, z)


def to_float(p: Poly, bits: int = None) -> Poly:
    """One-directional downcast of a polynomial to big-float coefficients."""
    bits = bits or p.bits
    ctx = get_context(bits)
    return Poly(tuple(to_mp(c, ctx) for c in p.coeffs), Mode.FLOAT, bits)


def evaluate(p: Poly, z: Any):
    """Horner evaluation; exact when both p and z are exact."""
    if p.mode == Mode.RATIONAL and is_exact(z):
        z = exact(z)
        acc = QQ_I.zero
        for c in reversed(p.coeffs):
            acc = acc * z + c
        return acc
    ctx = p.ctx
    z = to_mp(z, ctx)
    acc = ctx.mpc(0)
    for c in reversed(p.coeffs):
        acc = acc * z + to_mp(c, ctx)
    return acc


def derivative(p: Poly, k: int = 1) -> Poly:
    """k-th derivative; the zero polynomial once k exceeds the degree."""
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    out = []
    for i in range(k, len(p.coeffs)):
        out.append(p.coeffs[i] * falling_factorial(i, k))
    return Poly(tuple(out), p.mode, p.bits)


def antiderivative(p: Poly) -> Poly:
    """Primitive vanishing at z = 0."""
    if p.mode == Mode.RATIONAL:
        out = [QQ_I.zero] + [c / QQ_I(i + 1, 0) for i, c in enumerate(p.coeffs)]
    else:
        out = [p.ctx.mpc(0)] + [c / (i + 1) for i, c in enumerate(p.coeffs)]
    return Poly(tuple(out), p.mode, p.bits)


def compose_shift(p: Poly, a: Any) -> Poly:
    """Taylor shift: the polynomial z -> p(z + a)."""
    if p.mode == Mode.RATIONAL and not is_exact(a):
        p = to_float(p)
    shift = Poly.from_coeffs([a, 1], p.mode, p.bits)
    result = Poly.zero(p.mode, p.bits)
    for c in reversed(p.coeffs):
        result = result * shift + Poly((c,), p.mode, p.bits)
    return result


def reverse(p: Poly, d: int) -> Poly:
    """z^d p(1/z) for d >= deg p."""
    if p.degree > d:
        raise ValueError("reversal length below the degree")
    padded = list(p.coeffs) + [p._zero()] * (d + 1 - len(p.coeffs))
    return Poly(tuple(reversed(padded)), p.mode, p.bits)


def falling_factorial_poly(k: int, mode: Mode = Mode.RATIONAL, bits: int = None) -> Poly:
    """The polynomial (z)_k = z (z-1) ... (z-k+1)."""
    return Poly.from_roots(list(range(k)), mode, bits)


# --- root finding ------------------------------------------------------------

def _horner_with_derivative(coeffs: Sequence[Any], z, ctx):
    value = ctx.mpc(0)
    slope = ctx.mpc(0)
    scale = ctx.mpf(0)
    az = abs(z)
    for c in reversed(coeffs):
        slope = slope * z + value
        value = value * z + c
        scale = scale * az + abs(c)
    return value, slope, scale


def _initial_circle(coeffs: Sequence[Any], ctx) -> List[Any]:
    n = len(coeffs) - 1
    center = -coeffs[n - 1] / (n * coeffs[n])
    value, _, _ = _horner_with_derivative(coeffs, center, ctx)
    radius = abs(value / coeffs[n]) ** (ctx.mpf(1) / n)
    if not radius:
        radius = ctx.mpf(1)
    offset = ctx.mpf("0.7")
    return [center + radius * ctx.expj(2 * ctx.pi * k / n + offset) for k in range(n)]


def roots(p: Poly, max_iterations: int = None) -> List[Any]:
    """All roots with multiplicity by Aberth-Ehrlich simultaneous iteration.

    Roots at the origin are split off exactly first. A root is accepted when
    |p(r)| falls below 2^(-bits/2) times sum |a_k| |r|^k; the output is sorted
    by (real, imag) so repeated calls agree.
    """
    if p.degree < 1:
        raise ValueError("roots() needs a polynomial of degree >= 1")
    max_iterations = max_iterations or settings.ROOT_MAX_ITERATIONS
    q = p if p.mode == Mode.FLOAT else to_float(p)
    ctx = q.ctx
    coeffs = list(q.coeffs)
    zero_roots = 0
    while is_zero(coeffs[zero_roots]):
        zero_roots += 1
    coeffs = coeffs[zero_roots:]
    found = [ctx.mpc(0)] * zero_roots
    n = len(coeffs) - 1
    if n == 0:
        return found
    if n == 1:
        return sorted(found + [-coeffs[0] / coeffs[1]], key=lambda r: (r.real, r.imag))

    tol = ctx.ldexp(ctx.mpf(1), -(q.bits // 2))
    approx = _initial_circle(coeffs, ctx)
    for iteration in range(max_iterations):
        pending = False
        for i in range(n):
            z = approx[i]
            value, slope, scale = _horner_with_derivative(coeffs, z, ctx)
            if abs(value) <= tol * scale:
                continue
            pending = True
            if not slope:
                approx[i] = z + tol * (1 + abs(z))
                continue
            ratio = value / slope
            repulsion = ctx.mpc(0)
            for j in range(n):
                if j != i:
                    diff = z - approx[j]
                    if diff:
                        repulsion += 1 / diff
            approx[i] = z - ratio / (1 - ratio * repulsion)
        if not pending:
            logger.debug("Aberth iteration converged after %d sweeps (degree %d)", iteration, n)
            return sorted(found + approx, key=lambda r: (r.real, r.imag))
    worst = max(abs(_horner_with_derivative(coeffs, z, ctx)[0]) for z in approx)
    raise NonConvergence(max_iterations, worst)
