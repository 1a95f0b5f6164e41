import functools

import numpy as np
import pytest

from geored.scenarios import load_scenario


@functools.lru_cache(maxsize=None)
def _cached(name):
    return load_scenario(name)


@pytest.fixture
def scenario():
    """Loader for builtin scenarios, cached across the session."""
    return _cached


@pytest.fixture
def rng():
    return np.random.default_rng(42)
