from fractions import Fraction

import pytest

from eigenwkb.services.operator_core import (
    ExactlySolvableOperator, action_matrix, apply, content_hash, eigenpoly, eigenvalue, ensure_valid,
    epsilon, resonant_degrees, to_float_operator, validate,
)
from eigenwkb.services.poly_core import Mode, Poly, exact, get_context, parts, to_mp
from eigenwkb.services.scenarios import jacobi4
from eigenwkb.utils.codec import operator_to_json
from eigenwkb.utils.errors import InvalidOperator, Resonance, ZeroShiftedEigenvalue


def P(*coeffs):
    return Poly.from_coeffs(coeffs)


def test_legendre_eigenvalues(legendre):
    for n in range(12):
        assert eigenvalue(legendre, n) == exact(n * (n + 1))


@pytest.mark.parametrize("c", [1, Fraction(1, 2), 3])
def test_jacobi_eigenvalues(c):
    op = jacobi4(c)
    for n in range(31):
        assert eigenvalue(op, n) == exact(n * (n - 1) * (n * n - n + 4 * Fraction(c)))


def test_known_jacobi_eigenpolynomials(jacobi):
    assert eigenpoly(jacobi, 2).Q == P(Fraction(-5, 3), Fraction(2, 3), 1)
    assert eigenpoly(jacobi, 3).Q == P(Fraction(-1, 6), Fraction(-4, 3), Fraction(1, 2), 1)


@pytest.mark.parametrize("c", [1, Fraction(1, 2), 3])
def test_eigenpolynomials_solve_the_equation(c):
    op = jacobi4(c)
    for n in [0, 2, 5, 9, 16, 30]:
        pair = eigenpoly(op, n)
        assert pair.Q.is_monic
        assert pair.Q.degree == n
        assert apply(op, pair.Q) == pair.Q.scale(pair.eigenvalue)


def test_jacobi_eigenpolynomials_vanish_at_one(jacobi):
    for n in range(2, 11):
        assert eigenpoly(jacobi, n).Q(1) == exact(0)


def test_legendre_three_term_recurrence(legendre):
    z = P(0, 1)
    previous, current = P(1), z
    for n in range(1, 25):
        assert eigenpoly(legendre, n).Q == current
        nxt = z * current - previous.scale(Fraction(n * n, 4 * n * n - 1))
        previous, current = current, nxt


def test_resonance(jacobi):
    assert resonant_degrees(jacobi, 10) == [1]
    with pytest.raises(Resonance) as info:
        eigenpoly(jacobi, 1)
    assert (info.value.j, info.value.n) == (0, 1)


def test_action_matrix_is_banded_upper_triangular(jacobi):
    T = action_matrix(jacobi, 12)
    for j in range(13):
        for k in range(13):
            if j > k or k - j > jacobi.M:
                assert T[j][k] == exact(0)
        assert T[j][j] == eigenvalue(jacobi, j)


def test_action_matrix_columns_match_apply(cubic_ms):
    T = action_matrix(cubic_ms, 6)
    for k in range(7):
        image = apply(cubic_ms, Poly.monomial(k))
        assert [T[j][k] for j in range(7)] == [image.coeff(j) for j in range(7)]


def test_validate_accepts_builtins(legendre, jacobi, cubic_ms, monomial3):
    for op in (legendre, jacobi, cubic_ms, monomial3):
        assert validate(op) == []


def test_validate_reports_every_violation():
    op = ExactlySolvableOperator(2, (P(0, 1), P(0, 1), P(-1, 0, 2)))
    violations = validate(op)
    assert {(v.k, v.condition) for v in violations} == {(0, "degree"), (2, "monic")}
    with pytest.raises(InvalidOperator):
        ensure_valid(op)


def test_validate_structure():
    assert [v.condition for v in validate(ExactlySolvableOperator(1, (P(0), P(0, 1))))] == ["order"]
    assert [v.condition for v in validate(ExactlySolvableOperator(2, (P(0), P(0, 1))))] == ["length"]
    short = validate(ExactlySolvableOperator(2, (P(0), P(0, 1), P(0, 1))))
    assert [v.condition for v in short] == ["leading_degree"]


def test_epsilon(legendre):
    ctx = get_context(256)
    eps = epsilon(legendre, 3)
    assert abs(eps - 1 / ctx.sqrt(12)) < ctx.mpf(10) ** -60
    assert abs(eps.imag) < ctx.mpf(10) ** -60


def test_epsilon_prefers_the_root_nearest_the_positive_axis():
    # lambda_n - rho_00 negative: both square roots are imaginary, the upper one wins
    op = ExactlySolvableOperator(2, (P(0), P(0, -5), P(0, 0, 1)))
    eps = epsilon(op, 2)
    assert eps.imag > 0
    assert abs(eps.real) < 1e-60


def test_epsilon_is_undefined_at_rho00(legendre):
    with pytest.raises(ZeroShiftedEigenvalue):
        epsilon(legendre, 0)
    assert eigenpoly(legendre, 0).epsilon is None
    assert eigenpoly(legendre, 4).epsilon is not None


def test_float_mode_follows_exact_mode(legendre):
    exact_Q = eigenpoly(legendre, 7).Q
    fop = to_float_operator(legendre, 128)
    assert fop.mode == Mode.FLOAT
    float_Q = eigenpoly(fop, 7).Q
    ctx = get_context(128)
    for a, b in zip(float_Q.coeffs, exact_Q.coeffs):
        assert abs(a - to_mp(b, ctx)) < 1e-30


def test_kappa(legendre, jacobi, cubic_ms, monomial3):
    assert legendre.kappa == exact(Fraction(-1, 2))
    assert jacobi.kappa == exact(Fraction(1, 2))
    assert cubic_ms.kappa == exact(-2)
    assert monomial3.kappa == exact(1)


def test_content_hash(legendre, jacobi):
    first = content_hash(operator_to_json(legendre))
    assert len(first) == 40
    assert first == content_hash(operator_to_json(legendre))
    assert first != content_hash(operator_to_json(jacobi))


@pytest.mark.parametrize("name", ["legendre", "jacobi", "cubic_ms"])
def test_epsilon_times_n_tends_to_one(name, request):
    op = request.getfixturevalue(name)
    kappa = abs(float(parts(op.kappa)[0]))
    for n in (50, 100, 200):
        assert abs(n * epsilon(op, n) - 1) <= 2 * kappa / n
