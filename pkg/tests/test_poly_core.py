from fractions import Fraction
import random

import pytest

from eigenwkb.services.poly_core import (
    Mode, Poly, ZERO_DEGREE, antiderivative, compose_shift, derivative, evaluate, exact,
    falling_factorial, falling_factorial_poly, falling_factorial_scalar, get_context, parts,
    reverse, roots, to_float, to_mp,
)
from eigenwkb.utils.errors import NonConvergence


def P(*coeffs):
    return Poly.from_coeffs(coeffs)


def test_trailing_zeros_are_trimmed():
    p = P(1, 2, 0, 0)
    assert p.degree == 1
    assert p.coeffs == (exact(1), exact(2))


def test_zero_polynomial():
    z = Poly.zero()
    assert z.is_zero
    assert z.degree == ZERO_DEGREE
    assert z.degree < 0
    assert not z.is_monic


def test_exact_coercions():
    assert exact("1/3") == exact(Fraction(1, 3))
    assert exact((1, -2)) == exact(complex(1, -2))
    assert parts(exact(("3/4", "-1/2"))) == (Fraction(3, 4), Fraction(-1, 2))


def test_arithmetic():
    assert P(1, 1) * P(-1, 1) == P(-1, 0, 1)
    assert P(1, 2) + P(0, -2, 3) == P(1, 0, 3)
    assert P(1, 2) - P(1, 2) == Poly.zero()
    assert P(1, 2).scale(Fraction(1, 2)) == P(Fraction(1, 2), 1)


def test_exact_evaluation():
    p = P(0, 1, 1)
    assert evaluate(p, Fraction(1, 2)) == exact(Fraction(3, 4))
    assert p(exact((0, 1))) == exact((-1, 1))


def test_float_evaluation_matches_exact():
    p = P(Fraction(1, 3), -2, 5)
    ctx = get_context(128)
    value = evaluate(to_float(p, 128), ctx.mpf("0.25"))
    expected = ctx.mpf(1) / 3 - ctx.mpf(1) / 2 + ctx.mpf(5) / 16
    assert abs(value - expected) < ctx.mpf(2) ** -120


def test_mixed_modes_go_float():
    q = P(1, 1) + to_float(P(0, 1), 128)
    assert q.mode == Mode.FLOAT
    assert q.bits == 128


def test_derivative_and_antiderivative():
    assert derivative(P(0, 0, 0, 1), 2) == P(0, 6)
    assert derivative(P(1, 1), 5).is_zero
    assert antiderivative(P(0, 0, 3)) == P(0, 0, 0, 1)
    with pytest.raises(ValueError):
        derivative(P(1), -1)


def random_poly(rng, degree):
    return Poly.from_coeffs([(Fraction(rng.randint(-9, 9), rng.randint(1, 6)), rng.randint(-5, 5))
                             for _ in range(degree + 1)])


def random_point(rng):
    return exact((Fraction(rng.randint(-12, 12), rng.randint(1, 8)), Fraction(rng.randint(-12, 12), 7)))


def test_evaluation_is_multiplicative():
    rng = random.Random(11)
    bits = 128
    ctx = get_context(bits)
    for _ in range(25):
        p, q = random_poly(rng, rng.randint(0, 8)), random_poly(rng, rng.randint(0, 8))
        z = random_point(rng)
        assert evaluate(p * q, z) == evaluate(p, z) * evaluate(q, z)

        zf = to_mp(z, ctx)
        value = evaluate(to_float(p * q, bits), zf)
        expected = evaluate(to_float(p, bits), zf) * evaluate(to_float(q, bits), zf)
        # Horner rounding grows with the size of the terms, not of the value
        r = abs(zf)
        scale = (sum(abs(to_mp(c, ctx)) * r ** k for k, c in enumerate(p.coeffs))
                 * sum(abs(to_mp(c, ctx)) * r ** k for k, c in enumerate(q.coeffs)))
        assert abs(value - expected) <= ctx.mpf(2) ** (8 - bits) * max(scale, 1)


def test_derivative_is_linear():
    rng = random.Random(5)
    for _ in range(25):
        p, q = random_poly(rng, rng.randint(0, 9)), random_poly(rng, rng.randint(0, 9))
        a, b = random_point(rng), random_point(rng)
        combo = Poly.from_coeffs([a]) * p + Poly.from_coeffs([b]) * q
        for k in (1, 2, 3):
            assert derivative(combo, k) == Poly.from_coeffs([a]) * derivative(p, k) + \
                Poly.from_coeffs([b]) * derivative(q, k)



def test_compose_shift():
    assert compose_shift(P(0, 0, 1), 1) == P(1, 2, 1)
    assert compose_shift(P(-1, 0, 1), -1) == P(0, -2, 1)


def test_reverse():
    assert reverse(P(2, 1), 2) == P(0, 1, 2)
    with pytest.raises(ValueError):
        reverse(P(0, 0, 1), 1)


def test_falling_factorials():
    assert falling_factorial(5, 2) == 20
    assert falling_factorial(3, 0) == 1
    assert falling_factorial(2, 3) == 0
    assert falling_factorial_scalar(Fraction(1, 2), 2) == exact(Fraction(-1, 4))
    assert falling_factorial_poly(3) == P(0, 2, -3, 1)


def test_from_roots():
    assert Poly.from_roots([1, 2]) == P(2, -3, 1)
    assert Poly.from_roots([]) == P(1)


def test_monic():
    assert P(-1, 0, 1).is_monic
    assert not P(-1, 0, 2).is_monic
    assert to_float(P(-1, 0, 1), 64).is_monic


def test_roots_of_simple_quadratic():
    found = roots(to_float(P(-1, 0, 1), 128))
    assert len(found) == 2
    assert abs(found[0] + 1) < 1e-15
    assert abs(found[1] - 1) < 1e-15


def test_roots_at_origin_are_split_exactly():
    found = roots(P(0, 0, -1, 1))
    assert found[0] == 0 and found[1] == 0
    assert abs(found[2] - 1) < 1e-30


def test_roots_of_unity():
    p = to_float(P(1, 0, 0, 0, 1), 128)
    found = roots(p)
    assert len(found) == 4
    for r in found:
        assert abs(evaluate(p, r)) < 1e-15
        assert abs(abs(r) - 1) < 1e-15


def test_double_roots():
    found = roots(to_float(P(1, 0, -2, 0, 1), 256))
    assert len(found) == 4
    assert all(abs(r + 1) < 1e-15 for r in found[:2])
    assert all(abs(r - 1) < 1e-15 for r in found[2:])


def test_roots_are_deterministic():
    p = P(3, -1, 2, 0, 1, 1)
    first = roots(p)
    second = roots(p)
    assert first == second


def test_roots_report_nonconvergence():
    with pytest.raises(NonConvergence):
        roots(P(3, -1, 2, 7, 1, 1), max_iterations=1)


def test_roots_need_positive_degree():
    with pytest.raises(ValueError):
        roots(P(5))


def test_roots_reconstruct_the_polynomial():
    rng = random.Random(3)
    grid = [(a, b) for a in range(-4, 5) for b in range(-2, 3)]
    ctx = get_context(256)
    for degree in (5, 12, 20):
        p = Poly.from_roots([exact(r) for r in rng.sample(grid, degree)])
        rebuilt = Poly.from_roots(roots(to_float(p, 256)), Mode.FLOAT, 256)
        assert rebuilt.degree == degree
        for c, d in zip(p.coeffs, rebuilt.coeffs):
            c = to_mp(c, ctx)
            assert abs(d - c) <= ctx.mpf(2) ** -64 * max(abs(c), 1)
