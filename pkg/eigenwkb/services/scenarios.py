"""Built-in operator families and the scenario records the harness runs."""
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Any, List, Sequence, Tuple
import json
import logging

from eigenwkb.config import settings
from eigenwkb.services.operator_core import ExactlySolvableOperator, ensure_valid, resonant_degrees
from eigenwkb.services.poly_core import Mode, Poly, derivative
from eigenwkb.utils.codec import operator_from_json
from eigenwkb.utils.errors import DegreeTooSmall, NotMonic

logger = logging.getLogger(__name__)


def _poly(coeffs: Sequence[Any]) -> Poly:
    return Poly.from_coeffs(coeffs, Mode.RATIONAL)


def legendre2() -> ExactlySolvableOperator:
    """(z^2 - 1) v'' + 2z v'; eigenpolynomials are the monic Legendre
    polynomials, lambda_n = n(n + 1)."""
    return ensure_valid(ExactlySolvableOperator(2, (
        Poly.zero(),
        _poly([0, 2]),
        _poly([-1, 0, 1]),
    )))


def jacobi4(c: Any = 1) -> ExactlySolvableOperator:
    """(z^2-1)^2 v'''' + 4z(z^2-1) v''' + 2(z-1)((1+2c)z + 2c + 3) v'',
    with lambda_n = n(n-1)(n^2 - n + 4c)."""
    c = Fraction(c)
    rho2 = _poly([-1, 1]) * _poly([2 * c + 3, 1 + 2 * c]) * 2
    return ensure_valid(ExactlySolvableOperator(4, (
        Poly.zero(),
        Poly.zero(),
        rho2,
        _poly([0, -4, 0, 4]),
        _poly([1, 0, -2, 0, 1]),
    )))


def build_masson_shapiro(P_M: Poly) -> ExactlySolvableOperator:
    """The operator v -> (P_M v)^(M), i.e. rho_k = C(M, k) P_M^(M-k)."""
    if P_M.degree < 2:
        raise DegreeTooSmall(f"P_M must have degree >= 2, got {P_M.degree}")
    if not P_M.is_monic:
        raise NotMonic("P_M must be monic")
    M = int(P_M.degree)
    rho = tuple(derivative(P_M, M - k).scale(comb(M, k)) for k in range(M + 1))
    return ensure_valid(ExactlySolvableOperator(M, rho))


def masson_shapiro(coeffs: Sequence[Any] = (0, -1, 0, 1)) -> ExactlySolvableOperator:
    return build_masson_shapiro(_poly(coeffs))


def monomial(M: int, lower: Any = 0, extra: Sequence[Any] = ()) -> ExactlySolvableOperator:
    """rho_M = z^M and rho_{M-1} = lower z^(M-1) + extra[0] + extra[1] z + ...;
    every other coefficient vanishes."""
    if len(extra) > M - 1:
        raise ValueError(f"extra holds at most {M - 1} coefficients")
    prev = list(extra) + [0] * (M - 1 - len(extra)) + [lower]
    rho = [Poly.zero() for _ in range(M - 1)] + [_poly(prev), Poly.monomial(M)]
    return ensure_valid(ExactlySolvableOperator(M, tuple(rho)))


def custom(path: str) -> ExactlySolvableOperator:
    data = json.loads(Path(path).read_text())
    return ensure_valid(operator_from_json(data))


def build_operator(name: str, params: dict = None) -> ExactlySolvableOperator:
    """Operator of a built-in family by name."""
    params = params or {}
    if name == "legendre2":
        return legendre2()
    if name == "jacobi4":
        return jacobi4(params.get("c", 1))
    if name == "masson_shapiro":
        return masson_shapiro(params.get("P", (0, -1, 0, 1)))
    if name == "monomial":
        return monomial(int(params.get("M", 2)), params.get("lower", 0), params.get("extra", ()))
    if name == "custom":
        if "file" not in params:
            raise ValueError("custom scenarios need a 'file' parameter")
        return custom(params["file"])
    raise ValueError(f"unknown scenario '{name}'; expected one of {settings.SCENARIOS}")


@dataclass
class Scenario:
    name: str
    op: ExactlySolvableOperator
    n_grid: List[int]
    z_grid: List[Tuple[Fraction, Fraction]]
    bits: int = settings.HARNESS_BITS
    order: int = settings.SERIES_ORDER
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.n_grid = sorted(set(self.n_grid))
        if self.n_grid:
            skipped = set(resonant_degrees(self.op, max(self.n_grid)))
            if skipped & set(self.n_grid):
                logger.info("%s: skipping resonant degrees %s", self.name,
                            sorted(skipped & set(self.n_grid)))
            self.n_grid = [n for n in self.n_grid if n not in skipped]
