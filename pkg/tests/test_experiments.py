from fractions import Fraction

import pytest

from eigenwkb.services.cache_manager import cache_manager
from eigenwkb.services.experiments import ExperimentRunner, ResultRow, cached_eigenpair
from eigenwkb.services.scenarios import Scenario, jacobi4, legendre2, masson_shapiro, monomial

POINTS = [(Fraction(2), Fraction(0)), (Fraction(0), Fraction(3))]


@pytest.fixture
def monomial_runner():
    sc = Scenario(name="monomial", op=monomial(3, lower=1), n_grid=[2, 3, 5], z_grid=POINTS, bits=128)
    return ExperimentRunner(sc)


@pytest.fixture
def legendre_runner():
    sc = Scenario(name="legendre2", op=legendre2(), n_grid=[10, 20, 40], z_grid=POINTS[:1], bits=128)
    return ExperimentRunner(sc)


def rows_at(result, z=None, j=None):
    return [r for r in result.rows
            if (z is None or r.z == z) and (j is None or r.aux.get("j") == j)]


def test_monomial_predictor_is_exact(monomial_runner):
    result = monomial_runner.run("strong")
    assert len(result.rows) == 6
    assert all(r.error is None for r in result.rows)
    assert result.max_rel_error < 1e-30


def test_monomial_ratio_and_nth_root(monomial_runner):
    for name in ("ratio", "nth_root"):
        result = monomial_runner.run(name)
        assert len(result.rows) == 6
        assert result.max_rel_error < 1e-30


def test_monomial_correction_vanishes(monomial_runner):
    result = monomial_runner.run("c1")
    assert len(result.rows) == 4
    for row in result.rows:
        assert row.aux["cauchy_diff"] < 1e-30
        assert row.aux["previous_n"] < row.n


def test_monomial_cauchy_transform(monomial_runner):
    result = monomial_runner.run("cauchy")
    for j in (0, 1):
        rows = rows_at(result, j=j)
        assert len(rows) == 6
        assert max(float(r.rel_error) for r in rows) < 1e-30
    assert len(rows_at(result, j=3)) == 6
    assert result.summary["max_rel_error_j1"] < 1e-30


def test_monomial_zeros_sit_on_the_hull(monomial_runner):
    result = monomial_runner.run("zeros")
    assert result.summary["n"] == 5
    assert result.summary["zero_count"] == 5
    assert result.summary["max_hull_distance"] == 0
    assert result.summary["hausdorff_to_hull"] == 0
    assert len(result.rows) == 5


def test_unknown_experiment(monomial_runner):
    with pytest.raises(ValueError):
        monomial_runner.run("spectrum")


def test_empty_grid_runs_nothing():
    sc = Scenario(name="legendre2", op=legendre2(), n_grid=[], z_grid=POINTS[:1], bits=128)
    assert ExperimentRunner(sc).run("strong").rows == []


def test_non_finite_values_become_error_records(monomial_runner):
    mp = monomial_runner.mp
    row = monomial_runner.row(5, POINTS[0], mp.mpf(1), mp.mpf(0))
    assert row.error is not None
    assert row.rel_error is None and row.measured is None
    assert monomial_runner.row(5, POINTS[0], mp.mpf(0), mp.mpf(0)).rel_error == 0


def test_rows_sort_by_scenario_degree_and_point():
    rows = [ResultRow("b", 1, (0, 0)), ResultRow("a", 2, (1, 0)), ResultRow("a", 2, (0, 5)),
            ResultRow("a", 1, (3, 0))]
    ordered = sorted(rows, key=lambda r: r.sort_key)
    assert [(r.scenario, r.n, r.z) for r in ordered] == [
        ("a", 1, (3, 0)), ("a", 2, (0, 5)), ("a", 2, (1, 0)), ("b", 1, (0, 0)),
    ]


def test_eigenpairs_are_cached(legendre):
    assert cached_eigenpair(legendre, 6) is cached_eigenpair(legendre, 6)
    stats = cache_manager.stats()
    assert stats["hits"]["eigenpair"] == 1
    assert stats["misses"]["eigenpair"] == 1


def test_legendre_strong_asymptotics_improve(legendre_runner):
    rows = legendre_runner.run("strong").rows
    errors = [float(r.rel_error) for r in sorted(rows, key=lambda r: r.n)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.05


def test_legendre_ratio_test(legendre_runner):
    rows = legendre_runner.run("ratio").rows
    assert max(float(r.rel_error) for r in rows if r.n == 40) < 1e-2


def test_resonant_successor_is_skipped_in_ratio_test():
    sc = Scenario(name="jacobi4", op=jacobi4(1), n_grid=[0, 2], z_grid=POINTS[:1], bits=128)
    result = ExperimentRunner(sc).run("ratio")
    assert [r.n for r in result.rows] == [2]


JACOBI_POINTS = [(Fraction(2), Fraction(0)), (Fraction(1), Fraction(1)), (Fraction(-3), Fraction(1, 2))]


@pytest.mark.slow
def test_jacobi_strong_asymptotics():
    sc = Scenario(name="jacobi4", op=jacobi4(1), n_grid=[25, 50, 100], z_grid=JACOBI_POINTS, bits=512)
    runner = ExperimentRunner(sc)
    strong = runner.run("strong")
    ratio = runner.run("ratio")
    for z in sc.z_grid:
        rows = {r.n: float(r.rel_error) for r in rows_at(strong, z=z)}
        assert rows[100] <= 0.1
        assert rows[100] / rows[50] <= 0.7
        ratios = {r.n: float(r.rel_error) for r in rows_at(ratio, z=z)}
        assert ratios[25] > ratios[50] > ratios[100]
        assert ratios[100] <= 1e-3


@pytest.mark.slow
def test_jacobi_cauchy_transform():
    points = [(Fraction(2), Fraction(0)), (Fraction(1), Fraction(1)), (Fraction(-2), Fraction(1))]
    sc = Scenario(name="jacobi4", op=jacobi4(1), n_grid=[100], z_grid=points, bits=512)
    result = ExperimentRunner(sc).run("cauchy")
    first = rows_at(result, j=1)
    second = rows_at(result, j=2)
    assert len(first) == len(second) == 3
    assert max(float(r.rel_error) for r in first) <= 0.05
    assert max(float(r.rel_error) for r in second) <= 0.1
    assert result.summary["max_rel_error_j1"] <= 0.05


@pytest.mark.slow
def test_masson_shapiro_strong_asymptotics():
    sc = Scenario(name="masson_shapiro", op=masson_shapiro(), n_grid=[60],
                  z_grid=[(Fraction(2), Fraction(0)), (Fraction(3), Fraction(0))], bits=256)
    result = ExperimentRunner(sc).run("strong")
    assert result.max_rel_error <= 0.05


@pytest.mark.slow
def test_jacobi_zeros_approach_the_hull():
    sc = Scenario(name="jacobi4", op=jacobi4(1), n_grid=[100], z_grid=[], bits=512)
    result = ExperimentRunner(sc).run("zeros")
    assert result.summary["zero_count"] == 100
    assert result.summary["max_hull_distance"] <= 0.05
    assert result.summary["hausdorff_to_hull"] <= 0.05
