"""Tests for the nonlinear fluxes and their split forms."""

import numpy as np
import pytest

from hyperrelax._internal.flux import Flux, split_cubic, split_quadratic
from hyperrelax.grid import inner_values
from hyperrelax.sbp import build_upwind_pair
from hyperrelax.types import FluxKind


def test_flux_values():
    """Test f and f' for every kind."""
    u = np.array([2.0])
    assert Flux(FluxKind.NONE).value(u)[0] == 0.0
    assert Flux(FluxKind.QUADRATIC).value(u)[0] == 2.0
    assert Flux(FluxKind.QUADRATIC).derivative(u)[0] == 2.0
    gardner = Flux(FluxKind.GARDNER, sigma=1.0)
    assert gardner.value(u)[0] == pytest.approx(2.0 + 8.0 / 3.0)
    assert gardner.derivative(u)[0] == pytest.approx(6.0)


def test_derivative_increment_matches_difference(rng):
    """Test f'(u + d) - f'(u) for the cubic flux."""
    flux = Flux(FluxKind.GARDNER, sigma=0.3)
    u = rng.standard_normal(10)
    d = 1e-3 * rng.standard_normal(10)
    np.testing.assert_allclose(
        flux.derivative_increment(u, d), flux.derivative(u + d) - flux.derivative(u), atol=1e-13
    )


def test_split_forms_annihilate_constants(periodic_grid):
    """Test D1 of a constant state vanishes in split form."""
    d1 = build_upwind_pair(3, periodic_grid).dcentral
    c = np.full(64, 1.7)
    assert np.max(np.abs(split_quadratic(d1, c))) < 1e-12
    assert np.max(np.abs(split_cubic(d1, c))) < 1e-12


@pytest.mark.parametrize("kind", [FluxKind.QUADRATIC, FluxKind.GARDNER])
def test_split_form_conserves_energy_and_mass(kind, periodic_grid, rng):
    """Test <u, div f(u)> = 0 and sum div f(u) = 0 for the skew-symmetric split."""
    d1 = build_upwind_pair(7, periodic_grid).dcentral
    u = rng.standard_normal(64)
    div = Flux(kind, sigma=0.5).divergence(d1, u)
    h = periodic_grid.h
    scale = h * np.sum(np.abs(u * div))
    assert abs(inner_values(h, u, div)) < 1e-12 * scale
    assert abs(h * np.sum(div)) < 1e-12 * scale


def test_split_form_is_consistent(periodic_grid):
    """Test the split form approximates (u^2/2)_x for smooth data."""
    d1 = build_upwind_pair(7, periodic_grid).dcentral
    x = periodic_grid.nodes
    u = np.sin(x)
    exact = np.sin(x) * np.cos(x)
    assert np.max(np.abs(split_quadratic(d1, u) - exact)) < 1e-6
