import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hardymorrey.grid import Grid, GridFunction

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_function(grid: Grid, seed: int, positive: bool = False) -> GridFunction:
    v = np.random.default_rng(seed).standard_normal(grid.shape)
    return GridFunction(grid, np.abs(v) if positive else v)
