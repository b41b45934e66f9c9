"""Exactly solvable operators L = sum_k rho_k(z) d^k/dz^k, their triangular
action on monomials, eigenvalues and monic eigenpolynomials."""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence
import hashlib
import json
import logging

from sympy.polys.domains import QQ_I

from eigenwkb.config import settings
from eigenwkb.services.poly_core import (
    Mode, Poly, derivative, exact, falling_factorial, get_context, is_zero, to_float, to_mp,
)
from eigenwkb.utils.errors import InvalidOperator, Resonance, ZeroShiftedEigenvalue

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Violation:
    k: int
    condition: str
    detail: str

    def __str__(self) -> str:
        return f"rho_{self.k}: {self.detail}"


@dataclass(frozen=True)
class ExactlySolvableOperator:
    M: int
    rho: tuple

    @classmethod
    def from_polys(cls, rho: Sequence[Poly]) -> "ExactlySolvableOperator":
        return cls(len(rho) - 1, tuple(rho))

    @property
    def mode(self) -> Mode:
        return Mode.FLOAT if any(p.mode == Mode.FLOAT for p in self.rho) else Mode.RATIONAL

    @property
    def bits(self) -> int:
        return max(p.bits for p in self.rho)

    def coeff(self, k: int, j: int):
        """rho_{k,j}, the coefficient of z^j in rho_k."""
        return self.rho[k].coeff(j)

    @property
    def rho00(self):
        return self.coeff(0, 0)

    @property
    def kappa(self):
        """(M-1)/2 - rho_{M-1,M-1}/M, the exponent shift of the leading factor."""
        M = self.M
        value = self.coeff(M - 1, M - 1)
        if self.mode == Mode.RATIONAL:
            return QQ_I(M - 1, 0) / QQ_I(2, 0) - value / QQ_I(M, 0)
        ctx = get_context(self.bits)
        return ctx.mpf(M - 1) / 2 - to_mp(value, ctx) / M


@dataclass(frozen=True)
class EigenPair:
    n: int
    eigenvalue: Any
    Q: Poly
    epsilon: Any = None


def validate(op: ExactlySolvableOperator) -> List[Violation]:
    """Every violated structural condition; an empty list means the operator is valid."""
    violations = []
    if op.M < 2:
        violations.append(Violation(op.M, "order", f"order M = {op.M} is below 2"))
    if len(op.rho) != op.M + 1:
        violations.append(Violation(op.M, "length", f"expected {op.M + 1} coefficients, got {len(op.rho)}"))
        return violations
    for k, p in enumerate(op.rho):
        if p.degree > k:
            violations.append(Violation(k, "degree", f"degree {p.degree} exceeds {k}"))
    rho_M = op.rho[op.M]
    if rho_M.degree != op.M:
        violations.append(Violation(op.M, "leading_degree", f"rho_M has degree {rho_M.degree}, not M = {op.M}"))
    elif not rho_M.is_monic:
        violations.append(Violation(op.M, "monic", "rho_M is not monic"))
    return violations


def ensure_valid(op: ExactlySolvableOperator) -> ExactlySolvableOperator:
    violations = validate(op)
    if violations:
        raise InvalidOperator(violations)
    return op


def apply(op: ExactlySolvableOperator, f: Poly) -> Poly:
    """L[f] = sum_k rho_k f^(k)."""
    result = Poly.zero(f.mode, f.bits)
    for k, rho_k in enumerate(op.rho):
        if rho_k.is_zero:
            continue
        fk = derivative(f, k)
        if fk.is_zero:
            break
        result = result + rho_k * fk
    return result


def _entry(op: ExactlySolvableOperator, j: int, k: int):
    d = k - j
    acc = QQ_I.zero if op.mode == Mode.RATIONAL else get_context(op.bits).mpc(0)
    for m in range(max(d, 0), min(op.M, k) + 1):
        c = op.coeff(m, m - d)
        if not is_zero(c):
            acc = acc + c * falling_factorial(k, m)
    return acc


def action_matrix(op: ExactlySolvableOperator, N: int) -> List[List[Any]]:
    """T[j][k] = coefficient of z^j in L[z^k] for 0 <= j, k <= N.

    Entries with j > k vanish and so do those with k - j > M.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    zero = QQ_I.zero if op.mode == Mode.RATIONAL else get_context(op.bits).mpc(0)
    table = [[zero] * (N + 1) for _ in range(N + 1)]
    for k in range(N + 1):
        for j in range(max(0, k - op.M), k + 1):
            table[j][k] = _entry(op, j, k)
    return table


def eigenvalue(op: ExactlySolvableOperator, n: int):
    """lambda_n = sum_{k <= min(M, n)} rho_{k,k} (n)_k."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    acc = QQ_I.zero if op.mode == Mode.RATIONAL else get_context(op.bits).mpc(0)
    for k in range(min(op.M, n) + 1):
        acc = acc + op.coeff(k, k) * falling_factorial(n, k)
    return acc


def _same(a, b, op: ExactlySolvableOperator) -> bool:
    if op.mode == Mode.RATIONAL:
        return a == b
    ctx = get_context(op.bits)
    tol = ctx.ldexp(ctx.mpf(1), -(op.bits // 2))
    return abs(a - b) <= tol * max(1, abs(b))


def resonant_degrees(op: ExactlySolvableOperator, N: int) -> List[int]:
    """Degrees n <= N for which some j < n shares the eigenvalue."""
    values = [eigenvalue(op, n) for n in range(N + 1)]
    return [n for n in range(1, N + 1) if any(_same(values[j], values[n], op) for j in range(n))]


def eigenpoly(op: ExactlySolvableOperator, n: int) -> EigenPair:
    """Monic Q_n with (L - lambda_n) Q_n = 0 by back-substitution on the
    banded triangular system of the action matrix."""
    lam = eigenvalue(op, n)
    diagonal = [eigenvalue(op, j) for j in range(n + 1)]
    for j in range(n):
        if _same(diagonal[j], lam, op):
            raise Resonance(j, n)
    one = QQ_I.one if op.mode == Mode.RATIONAL else get_context(op.bits).mpc(1)
    coeffs = [one * 0] * (n + 1)
    coeffs[n] = one
    for j in range(n - 1, -1, -1):
        acc = one * 0
        for k in range(j + 1, min(n, j + op.M) + 1):
            acc = acc + _entry(op, j, k) * coeffs[k]
        coeffs[j] = -acc / (diagonal[j] - lam)
    Q = Poly(tuple(coeffs), op.mode, op.bits)
    logger.debug("built Q_%d (mode %s)", n, op.mode.value)
    eps = None
    if not _same(lam, op.rho00, op):
        eps = epsilon(op, n)
    return EigenPair(n=n, eigenvalue=lam, Q=Q, epsilon=eps)


def epsilon(op: ExactlySolvableOperator, n: int, bits: Optional[int] = None):
    """The M-th root of 1/(lambda_n - rho_00) whose argument is closest to 0,
    ties broken toward nonnegative imaginary part."""
    bits = bits or max(op.bits, settings.DEFAULT_BITS)
    ctx = get_context(bits)
    shifted = eigenvalue(op, n) - op.rho00
    if is_zero(shifted):
        raise ZeroShiftedEigenvalue(n)
    base = ctx.root(1 / to_mp(shifted, ctx), op.M)
    best, best_key = None, None
    for k in range(op.M):
        candidate = base * ctx.expj(2 * ctx.pi * k / op.M)
        angle = abs(ctx.arg(candidate))
        key = (angle, 0 if candidate.imag >= 0 else 1)
        if best_key is None or _better(key, best_key, ctx):
            best, best_key = candidate, key
    return best


def _better(key, best_key, ctx) -> bool:
    tol = ctx.ldexp(ctx.mpf(1), -(ctx.prec // 2))
    if key[0] < best_key[0] - tol:
        return True
    if abs(key[0] - best_key[0]) <= tol:
        return key[1] < best_key[1]
    return False


def to_float_operator(op: ExactlySolvableOperator, bits: int) -> ExactlySolvableOperator:
    """Explicit downcast of every coefficient polynomial."""
    return ExactlySolvableOperator(op.M, tuple(to_float(p, bits) for p in op.rho))


def content_hash(op_json: Dict[str, Any]) -> str:
    """git-style blob hash of the canonical operator JSON."""
    payload = json.dumps(op_json, sort_keys=True, separators=(",", ":")).encode()
    header = f"blob {len(payload)}\0".encode()
    return hashlib.sha1(header + payload).hexdigest()
