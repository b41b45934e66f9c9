"""JSON encodings shared by the CLI, the HTTP service and the report writer.

Polynomials are ``{"coeffs": [[re, im], ...]}`` lowest degree first. Exact
parts are written as Fraction strings ("-1/3", "2"); float parts as decimal
strings carrying enough digits to round-trip at their precision.
"""
from fractions import Fraction
from math import ceil, log10
from typing import Any, Dict, List, Tuple

from eigenwkb.config import settings
from eigenwkb.services.operator_core import ExactlySolvableOperator
from eigenwkb.services.poly_core import Mode, Poly, exact, get_context, is_exact, parts, to_mp


def digits_for(bits: int) -> int:
    return int(ceil(bits * log10(2))) + settings.OUTPUT_DIGITS_MARGIN


def format_real(x: Any, bits: int) -> str:
    if isinstance(x, (Fraction, int)):
        return str(Fraction(x))
    ctx = get_context(bits)
    return ctx.nstr(ctx.mpf(x), digits_for(bits))


def scalar_to_json(value: Any, bits: int = None) -> List[str]:
    bits = bits or settings.DEFAULT_BITS
    if is_exact(value):
        re, im = parts(exact(value))
        return [str(re), str(im)]
    ctx = get_context(bits)
    value = to_mp(value, ctx)
    return [format_real(value.real, bits), format_real(value.imag, bits)]


def scalar_from_json(pair: List[str], mode: Mode = Mode.RATIONAL, bits: int = None):
    bits = bits or settings.DEFAULT_BITS
    re, im = pair
    if mode == Mode.RATIONAL:
        return exact((Fraction(re), Fraction(im)))
    ctx = get_context(bits)
    return ctx.mpc(ctx.mpf(re), ctx.mpf(im))


def poly_to_json(p: Poly) -> Dict[str, Any]:
    return {"coeffs": [scalar_to_json(c, p.bits) for c in p.coeffs]}


def poly_from_json(data: Dict[str, Any], mode: Mode = Mode.RATIONAL, bits: int = None) -> Poly:
    bits = bits or settings.DEFAULT_BITS
    coeffs = [scalar_from_json(pair, mode, bits) for pair in data["coeffs"]]
    return Poly(tuple(coeffs), mode, bits)


def operator_to_json(op: ExactlySolvableOperator) -> Dict[str, Any]:
    return {"M": op.M, "rho": [poly_to_json(p) for p in op.rho]}


def operator_from_json(data: Dict[str, Any], mode: Mode = Mode.RATIONAL,
                       bits: int = None) -> ExactlySolvableOperator:
    rho = tuple(poly_from_json(p, mode, bits) for p in data["rho"])
    return ExactlySolvableOperator(int(data["M"]), rho)


def parse_point(text: str) -> Tuple[Fraction, Fraction]:
    """'RE,IM' (or a bare 'RE') as exact parts."""
    pieces = [piece.strip() for piece in text.split(",")]
    if len(pieces) == 1:
        return Fraction(pieces[0]), Fraction(0)
    if len(pieces) != 2:
        raise ValueError(f"cannot parse complex point '{text}'")
    return Fraction(pieces[0]), Fraction(pieces[1])
