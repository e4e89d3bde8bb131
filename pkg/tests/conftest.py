# ==============================================================================
# conftest.py
# Fixtures compartidas: operadores de referencia y generadores de ejemplo.
# ==============================================================================

import numpy as np
import pytest

from loewner.generators import TimeFunction, example_generator
from loewner.linalg_spectral import analyze


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture(scope="session")
def A_ejemplo():
    """diag(2.5, 1): m = 1, k₊ = 2.5, n₀ = 2."""
    return analyze(np.diag([2.5, 1.0]))


@pytest.fixture(scope="session")
def A_resonante():
    """diag(2, 1): resonancia z₂² e₁ en grado 2."""
    return analyze(np.diag([2.0, 1.0]))


@pytest.fixture(scope="session")
def h_ejemplo():
    """h(z,t) = (2.5 z₁ + e^{−t} z₂², z₂)."""
    return example_generator(2.5, TimeFunction.exp_decay(1.0))


@pytest.fixture(scope="session")
def h_ventana():
    """h(z,t) = (2 z₁ + 1_{[0,3]}(t) z₂², z₂): resonante pero acotada."""
    return example_generator(2.0, TimeFunction.window(3.0))
