import pytest

from eigenwkb.services.poly_core import get_context
from eigenwkb.services.quadrature import default_tolerance, integrate, integrate_segment
from eigenwkb.utils.errors import QuadratureFailure


def test_polynomial_on_unit_interval():
    ctx = get_context(256)
    result = integrate(lambda u: u * u, ctx)
    assert abs(result.value - ctx.mpf(1) / 3) < ctx.mpf(10) ** -60
    assert result.error <= default_tolerance(ctx)


def test_complex_segment():
    ctx = get_context(256)
    result = integrate_segment(lambda t: 1 / t, ctx.mpc(1), ctx.mpc(0, 1), ctx)
    assert abs(result.value - ctx.mpc(0, ctx.pi / 2)) < ctx.mpf(10) ** -60


def test_real_segment():
    ctx = get_context(128)
    result = integrate_segment(lambda t: 1 / t, ctx.mpf(1), ctx.mpf(2), ctx)
    assert abs(result.value - ctx.log(2)) < ctx.mpf(10) ** -30


def test_failure_is_reported():
    ctx = get_context(128)
    with pytest.raises(QuadratureFailure):
        integrate(lambda u: ctx.sign(u - ctx.mpf(1) / 3), ctx, max_depth=3)
