import pytest
import sys
import os

# Add the repository root to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from eigenwkb.services.cache_manager import cache_manager
from eigenwkb.services.scenarios import jacobi4, legendre2, masson_shapiro, monomial


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running asymptotic checks at harness precision")


@pytest.fixture(autouse=True)
def setup_test_environment():
    """Start every test from an empty result cache"""
    cache_manager.clear()
    yield
    cache_manager.clear()


@pytest.fixture
def legendre():
    return legendre2()


@pytest.fixture
def jacobi():
    return jacobi4(1)


@pytest.fixture
def cubic_ms():
    """Masson-Shapiro operator of P_3 = z^3 - z"""
    return masson_shapiro()


@pytest.fixture
def monomial3():
    return monomial(3)
