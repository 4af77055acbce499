"""Tests for grids, fields and discrete norms."""

import math

import numpy as np
import pytest

from hyperrelax._errors import GridMismatchError, InvalidDomainError, NonFiniteStateError
from hyperrelax.grid import (
    Field,
    State,
    fields_to_csv,
    format_float,
    l2_inner,
    l2_norm,
    make_grid,
    mass,
)


def test_make_grid_spacing():
    """Test the published BBM domain gives h = 200/1024."""
    grid = make_grid(-50, 150, 1024)
    assert grid.h == 0.1953125
    assert grid.nodes[0] == -50.0
    assert grid.nodes.size == 1024


def test_make_grid_excludes_right_endpoint():
    """Test nodes of a four-point grid on [0, 2 pi)."""
    grid = make_grid(0.0, 2.0 * math.pi, 4)
    np.testing.assert_allclose(grid.nodes, [0.0, math.pi / 2, math.pi, 3 * math.pi / 2])
    assert grid.h == pytest.approx(math.pi / 2)


@pytest.mark.parametrize("left,right,n", [(0.0, 1.0, 2), (1.0, 1.0, 10), (2.0, 1.0, 10)])
def test_make_grid_rejects_bad_domain(left, right, n):
    """Test invalid bounds or too few points."""
    with pytest.raises(InvalidDomainError):
        make_grid(left, right, n)


def test_grid_nodes_are_read_only():
    """Test grids cannot be mutated through their nodes."""
    grid = make_grid(0.0, 1.0, 8)
    with pytest.raises(ValueError):
        grid.nodes[0] = 5.0


def test_grid_equality_by_value():
    """Test grids compare by bounds and size."""
    assert make_grid(0, 1, 8) == make_grid(0.0, 1.0, 8)
    assert make_grid(0, 1, 8) != make_grid(0, 1, 16)
    with pytest.raises(GridMismatchError):
        make_grid(0, 1, 8).require_same(make_grid(0, 2, 8))


def test_wrap_maps_into_domain():
    """Test periodic wrapping of coordinates."""
    grid = make_grid(-50.0, 50.0, 16)
    np.testing.assert_allclose(grid.wrap(np.array([60.0, -60.0, 0.0])), [-40.0, 40.0, 0.0])


def test_l2_norm_values(periodic_grid):
    """Test zero, constant and sine norms."""
    assert l2_norm(Field(periodic_grid, np.zeros(64))) == 0.0
    unit = make_grid(0.0, 1.0, 37)
    assert l2_norm(Field(unit, np.ones(37))) == pytest.approx(1.0, rel=1e-14)
    sine = Field.from_function(periodic_grid, np.sin)
    assert l2_norm(sine) == pytest.approx(1.7724539, abs=1e-7)


def test_l2_inner_values(periodic_grid):
    """Test orthogonality and the constant case."""
    sine = Field.from_function(periodic_grid, np.sin)
    cosine = Field.from_function(periodic_grid, np.cos)
    assert l2_inner(sine, Field(periodic_grid, np.zeros(64))) == 0.0
    assert abs(l2_inner(sine, cosine)) < 1e-14
    unit = make_grid(0.0, 1.0, 10)
    two = Field(unit, np.full(10, 2.0))
    assert l2_inner(two, two) == pytest.approx(4.0, rel=1e-14)
    assert l2_inner(sine, sine) == pytest.approx(l2_norm(sine) ** 2, rel=1e-14)


def test_l2_inner_rejects_mismatched_grids():
    """Test inner products across grids fail."""
    f = Field(make_grid(0, 1, 8), np.ones(8))
    g = Field(make_grid(0, 2, 8), np.ones(8))
    with pytest.raises(GridMismatchError):
        l2_inner(f, g)


def test_mass_values(periodic_grid):
    """Test mass of zero, constant and sine fields."""
    assert mass(Field(periodic_grid, np.zeros(64))) == 0.0
    grid = make_grid(-2.0, 3.0, 20)
    assert mass(Field(grid, np.full(20, 1.5))) == pytest.approx(7.5, rel=1e-14)
    assert abs(mass(Field.from_function(periodic_grid, np.sin))) < 1e-14


def test_field_validation():
    """Test shape and finiteness checks."""
    grid = make_grid(0.0, 1.0, 8)
    with pytest.raises(GridMismatchError):
        Field(grid, np.zeros(7))
    with pytest.raises(NonFiniteStateError):
        Field(grid, np.array([0.0] * 7 + [math.nan]))


def test_state_components(periodic_grid):
    """Test building a state from fields and reading them back."""
    f = Field.from_function(periodic_grid, np.sin)
    g = Field.from_function(periodic_grid, np.cos)
    state = State.from_fields([f, g])
    assert state.m == 2
    np.testing.assert_array_equal(state.field(1).values, g.values)
    assert len(state.fields) == 2
    assert state.with_data(np.zeros((2, 64))).m == 2


def test_state_rejects_mixed_grids():
    """Test fields from different grids cannot share a state."""
    f = Field(make_grid(0, 1, 8), np.ones(8))
    g = Field(make_grid(0, 1, 16), np.ones(16))
    with pytest.raises(GridMismatchError):
        State.from_fields([f, g])


def test_fields_to_csv_layout():
    """Test the x column comes first and floats round-trip."""
    grid = make_grid(0.0, 1.0, 4)
    text = fields_to_csv(grid, {"q0": np.array([0.1, 0.2, 0.3, 1.0 / 3.0])})
    lines = text.splitlines()
    assert lines[0] == "x,q0"
    assert len(lines) == 5
    assert float(lines[4].split(",")[1]) == 1.0 / 3.0
    assert format_float(0.1) == "0.10000000000000001"
