from fractions import Fraction

import pytest

from polyrep.catalog import load_entry
from polyrep.config import load_config
from polyrep.models import BudgetConfig


@pytest.fixture(autouse=True)
def isolated_xdg_state_home(tmp_path, monkeypatch):
    """Route default runtime state into the per-test temporary directory."""
    monkeypatch.setenv("XDG_STATE_HOME", str(tmp_path / "state"))
    monkeypatch.delenv("POLYREP_STATE_DIR", raising=False)
    monkeypatch.delenv("POLYREP_BUDGET_SCALE", raising=False)
    monkeypatch.delenv("POLYREP_LOG_LEVEL", raising=False)
    load_config.cache_clear()
    yield
    load_config.cache_clear()


@pytest.fixture
def budget():
    """Search budget sized for unit tests."""
    return BudgetConfig(samples=120, max_exponent=64, max_terms=20_000)


@pytest.fixture
def square():
    """The unit square [0, 1]^2."""
    return load_entry("square")


@pytest.fixture
def triangle():
    return load_entry("triangle")


def frac_point(*coords):
    return tuple(Fraction(c) for c in coords)
