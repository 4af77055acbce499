"""Pytest configuration."""

import math

import numpy as np
import pytest

from hyperrelax.grid import State, make_grid
from hyperrelax.models import ModelSpec


@pytest.fixture
def rng():
    """Seeded generator so random states are reproducible."""
    return np.random.default_rng(20240521)


@pytest.fixture
def periodic_grid():
    """[0, 2 pi) with 64 points."""
    return make_grid(0.0, 2.0 * math.pi, 64)


@pytest.fixture
def wave_grid():
    """Small version of the solitary-wave domain."""
    return make_grid(-50.0, 50.0, 128)


@pytest.fixture
def random_state(rng):
    """Factory for smooth random states: a few Fourier modes per component."""

    def make(model: ModelSpec, zero_mean: bool = False) -> State:
        grid = model.grid
        x = (grid.nodes - grid.left) * (2.0 * math.pi / grid.length)
        data = np.zeros((model.field_count, grid.n))
        for j in range(model.field_count):
            data[j] = 0.0 if zero_mean else rng.normal()
            for k in range(1, 6):
                data[j] += rng.normal() * np.sin(k * x) + rng.normal() * np.cos(k * x)
        return State(grid, data)

    return make
