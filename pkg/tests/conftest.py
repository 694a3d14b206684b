import numpy as np
import pytest

from weakjoint.config import get_settings
from weakjoint.models.operators import Operator, StateVector


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Each test sees default settings, unaffected by the caller's environment."""
    for name in ("WEAKJOINT_THREADS", "WEAKJOINT_LOG_LEVEL", "WEAKJOINT_OUTPUT_DIR"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, dim: int) -> Operator:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return Operator(0.5 * (m + m.conj().T), None, hermitian=True)


def random_state(rng, dim: int, factorization=None) -> StateVector:
    return StateVector(rng.normal(size=dim) + 1j * rng.normal(size=dim), factorization)
