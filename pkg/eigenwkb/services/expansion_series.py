"""Laurent series at infinity for the eigenvalue branch.

With lambda_n - rho_00 = L(n) for the monic degree-M polynomial L, the
shifted eigenvalue parameter satisfies 1/eps_n = L(n)^(1/M) =
n + sum_j gamma_j n^-j, and inverting gives n = sum_k h_k eps_n^(k-1).
Everything here stays exact on rational operators.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Any, List, Sequence, Tuple
import logging

from sympy.polys.domains import QQ_I

from eigenwkb.config import settings
from eigenwkb.services.combinatorics import potential
from eigenwkb.services.operator_core import ExactlySolvableOperator, epsilon
from eigenwkb.services.poly_core import Mode, Poly, exact, falling_factorial_poly, get_context, is_zero, to_mp
from eigenwkb.utils.errors import TableRangeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LaurentTail:
    """c_0 z^e + c_1 z^(e-1) + ... known exactly through z^(e - order + 1)."""
    lead_exponent: int
    coeffs: Tuple[Any, ...]
    order: int

    def __post_init__(self):
        coeffs = list(self.coeffs)[:self.order]
        coeffs += [QQ_I.zero] * (self.order - len(coeffs))
        lead, order = self.lead_exponent, self.order
        while coeffs and is_zero(coeffs[0]):
            coeffs.pop(0)
            lead -= 1
            order -= 1
        if not coeffs:
            raise ValueError("series vanishes to its truncation order")
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "lead_exponent", lead)
        object.__setattr__(self, "order", order)

    @classmethod
    def from_poly(cls, p: Poly, order: int) -> "LaurentTail":
        if p.mode != Mode.RATIONAL:
            raise ValueError("series algebra runs on exact coefficients")
        return cls(int(p.degree), tuple(reversed(p.coeffs)), order)

    def coeff(self, exponent: int):
        i = self.lead_exponent - exponent
        if i < 0:
            return QQ_I.zero
        if i >= self.order:
            raise TableRangeError("laurent", exponent, self.order)
        return self.coeffs[i]

    @property
    def lowest_exponent(self) -> int:
        return self.lead_exponent - self.order + 1

    def __add__(self, other: "LaurentTail") -> "LaurentTail":
        lead = max(self.lead_exponent, other.lead_exponent)
        low = max(self.lowest_exponent, other.lowest_exponent)
        coeffs = [self.coeff(e) + other.coeff(e) for e in range(lead, low - 1, -1)]
        return LaurentTail(lead, tuple(coeffs), lead - low + 1)

    def __mul__(self, other: "LaurentTail") -> "LaurentTail":
        order = min(self.order, other.order)
        out = [QQ_I.zero] * order
        for i in range(order):
            for j in range(order - i):
                out[i + j] = out[i + j] + self.coeffs[i] * other.coeffs[j]
        return LaurentTail(self.lead_exponent + other.lead_exponent, tuple(out), order)

    def __pow__(self, k: int) -> "LaurentTail":
        if k < 1:
            raise ValueError("integer powers start at 1")
        result = self
        for _ in range(k - 1):
            result = result * self
        return result

    def power(self, r: Fraction) -> "LaurentTail":
        """Rational power of a series with leading coefficient 1, through the
        potential polynomials of its normalized tail."""
        r = Fraction(r)
        if self.coeffs[0] != QQ_I.one:
            raise ValueError("fractional powers need a leading coefficient of 1")
        lead = self.lead_exponent * r
        if lead.denominator != 1:
            raise ValueError(f"z^{self.lead_exponent} has no single-valued power {r}")
        xs = [self.coeffs[m] * factorial(m) for m in range(1, self.order)]
        coeffs = [potential(r, m, xs) / QQ_I(factorial(m), 0) for m in range(self.order)]
        return LaurentTail(int(lead), tuple(coeffs), self.order)


@dataclass(frozen=True)
class SeriesTables:
    order: int
    gamma: Tuple[Any, ...]
    q: Tuple[Tuple[Any, ...], ...]
    h: Tuple[Any, ...]

    def gamma_at(self, j: int):
        if not 0 <= j <= self.order:
            raise TableRangeError("gamma", j, self.order)
        return self.gamma[j]

    def q_at(self, j: int, k: int):
        if not (0 <= j <= self.order and 0 <= k <= self.order):
            raise TableRangeError("q", (j, k), self.order)
        return self.q[j][k]

    def h_at(self, k: int):
        if not 0 <= k <= self.order + 1:
            raise TableRangeError("h", k, self.order)
        return self.h[k]


def lambda_poly(op: ExactlySolvableOperator) -> Poly:
    """sum_{k=1}^M rho_{k,k} (z)_k."""
    mode, bits = op.mode, op.bits
    result = Poly.zero(mode, bits)
    for k in range(1, op.M + 1):
        c = op.coeff(k, k)
        if not is_zero(c):
            result = result + falling_factorial_poly(k, mode, bits).scale(c)
    return result


def gamma_coeffs(op: ExactlySolvableOperator, P: int = None) -> List[Any]:
    """gamma_0..gamma_P with lambda_poly(z)^(1/M) = z + sum_j gamma_j z^-j."""
    P = settings.SERIES_ORDER if P is None else P
    if P < 0:
        raise ValueError("series order must be nonnegative")
    radicand = LaurentTail.from_poly(lambda_poly(op), P + 2)
    root = radicand.power(Fraction(1, op.M))
    return [root.coeff(-j) for j in range(P + 1)]


def q_table(gamma: Sequence[Any], P: int = None) -> Tuple[Tuple[Any, ...], ...]:
    """q[j][k] = P^(-k)_j(gamma_0, 2! gamma_1, ..., j! gamma_{j-1}) / j!, so that
    eps_n^k = sum_j q_{j,k} n^(-k-j)."""
    P = settings.SERIES_ORDER if P is None else P
    if len(gamma) < P:
        raise TableRangeError("gamma", P - 1, len(gamma) - 1)
    xs = [exact(g) * factorial(m) for m, g in enumerate(gamma[:P], start=1)]
    return tuple(
        tuple(potential(-k, j, xs) / QQ_I(factorial(j), 0) for k in range(P + 1))
        for j in range(P + 1)
    )


def h_coeffs(gamma: Sequence[Any], q: Sequence[Sequence[Any]], P: int = None) -> List[Any]:
    """h_0..h_{P+1}: h_0 = 1, h_1 = -gamma_0, then
    h_{j+1} = -gamma_j - sum_{k=1}^{j-1} h_{k+1} q_{j-k,k}."""
    P = settings.SERIES_ORDER if P is None else P
    if len(gamma) < P + 1:
        raise TableRangeError("gamma", P, len(gamma) - 1)
    if len(q) < P + 1:
        raise TableRangeError("q", P, len(q) - 1)
    h = [QQ_I.one, -exact(gamma[0])]
    for j in range(1, P + 1):
        acc = -exact(gamma[j])
        for k in range(1, j):
            acc = acc - h[k + 1] * q[j - k][k]
        h.append(acc)
    return h


def series_tables(op: ExactlySolvableOperator, P: int = None) -> SeriesTables:
    P = settings.SERIES_ORDER if P is None else P
    gamma = gamma_coeffs(op, P)
    q = q_table(gamma, P)
    h = h_coeffs(gamma, q, P)
    logger.debug("series tables of order %d for M=%d", P, op.M)
    return SeriesTables(order=P, gamma=tuple(gamma), q=q, h=tuple(h))


def n_reconstruct_residual(op: ExactlySolvableOperator, n: int, p: int,
                           tables: SeriesTables, bits: int = None):
    """n - sum_{k=0}^p h_k eps_n^(k-1), expected to be O(eps_n^p)."""
    bits = bits or settings.DEFAULT_BITS
    ctx = get_context(bits)
    eps = epsilon(op, n, bits)
    acc = ctx.mpc(0)
    for k in range(p + 1):
        acc += to_mp(tables.h_at(k), ctx) * eps ** (k - 1)
    return n - acc
