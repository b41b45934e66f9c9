"""Adaptive contour quadrature on top of mpmath's tanh-sinh rule."""
from typing import Any, Callable, NamedTuple
import logging

from mpmath import MPContext

from eigenwkb.config import settings
from eigenwkb.utils.errors import QuadratureFailure

logger = logging.getLogger(__name__)


class QuadResult(NamedTuple):
    value: Any
    error: Any


def default_tolerance(ctx: MPContext):
    return ctx.ldexp(ctx.mpf(1), -(ctx.prec // 2))


def integrate(f: Callable[[Any], Any], ctx: MPContext, tol: Any = None,
              max_depth: int = None) -> QuadResult:
    """Integral of f over [0, 1].

    Each panel is accepted once mpmath's error estimate drops below its share
    of ``tol``; otherwise it is bisected, down to ``max_depth`` levels.
    """
    tol = tol if tol is not None else default_tolerance(ctx)
    max_depth = max_depth if max_depth is not None else settings.QUAD_MAX_DEPTH
    total = ctx.mpc(0)
    error = ctx.mpf(0)
    deepest = 0
    pending = [(ctx.mpf(0), ctx.mpf(1), 0)]
    while pending:
        a, b, depth = pending.pop()
        value, err = ctx.quad(f, [a, b], error=True)
        if err <= tol * (b - a):
            total += value
            error += err
            deepest = max(deepest, depth)
            continue
        if depth >= max_depth:
            raise QuadratureFailure(depth, err)
        mid = (a + b) / 2
        pending.append((mid, b, depth + 1))
        pending.append((a, mid, depth + 1))
    if deepest:
        logger.debug("quadrature bisected to depth %d", deepest)
    return QuadResult(total, error)


def integrate_segment(f: Callable[[Any], Any], a: Any, b: Any, ctx: MPContext,
                      tol: Any = None) -> QuadResult:
    """Integral of f along the straight segment from a to b."""
    delta = b - a
    result = integrate(lambda s: f(a + s * delta), ctx, tol)
    return QuadResult(result.value * delta, result.error * abs(delta))
