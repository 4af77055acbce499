"""Tests for truncated Taylor jets."""

import math

import numpy as np
import pytest

from hyperrelax._errors import UnsupportedProfileError
from hyperrelax._internal import jets
from hyperrelax._internal.jets import Jet


def _seed(t, x, order):
    return Jet.variable(np.asarray(t), 0, order), Jet.variable(np.asarray(x), 1, order)


def test_polynomial_derivatives():
    """Test mixed derivatives of t^2 x^3."""
    t, x = _seed(2.0, 3.0, 5)
    w = t**2 * x**3
    assert float(w.value) == pytest.approx(4.0 * 27.0)
    assert float(w.derivative(1, 0)) == pytest.approx(2 * 2.0 * 27.0)
    assert float(w.derivative(0, 2)) == pytest.approx(4.0 * 6 * 3.0)
    assert float(w.derivative(2, 3)) == pytest.approx(2.0 * 6.0)


def test_trig_derivatives_cycle():
    """Test d^k/dx^k sin(x - t)."""
    t, x = _seed(0.4, 1.3, 6)
    w = jets.sin(x - t)
    theta = 1.3 - 0.4
    expected = [math.sin(theta), math.cos(theta), -math.sin(theta), -math.cos(theta)]
    for k in range(6):
        assert float(w.derivative(0, k)) == pytest.approx(expected[k % 4], rel=1e-12)
    assert float(w.derivative(1, 1)) == pytest.approx(math.sin(theta), rel=1e-12)


def test_sech_matches_closed_form():
    """Test sech'' = sech - 2 sech^3 at a batch of points."""
    x_values = np.linspace(-3.0, 3.0, 7)
    _, x = _seed(np.zeros(7), x_values, 2)
    w = jets.sech(x)
    s = 1.0 / np.cosh(x_values)
    np.testing.assert_allclose(w.value, s, rtol=1e-13)
    np.testing.assert_allclose(w.derivative(0, 1), -s * np.tanh(x_values), atol=1e-13)
    np.testing.assert_allclose(w.derivative(0, 2), s - 2.0 * s**3, atol=1e-12)


def test_exp_and_division():
    """Test exp and quotient rules."""
    t, x = _seed(0.5, 0.2, 3)
    w = jets.exp(-t) / (1.0 + x * x)
    assert float(w.derivative(1, 0)) == pytest.approx(-math.exp(-0.5) / 1.04)
    assert float(w.derivative(0, 1)) == pytest.approx(
        math.exp(-0.5) * -2.0 * 0.2 / 1.04**2
    )


def test_plain_arrays_pass_through():
    """Test jet functions accept ordinary arrays."""
    np.testing.assert_allclose(jets.sin(np.array([0.0, math.pi / 2])), [0.0, 1.0], atol=1e-15)
    assert jets.cosh(0.0) == 1.0


def test_derivative_beyond_order():
    """Test asking past the truncation order fails."""
    t, _ = _seed(0.0, 0.0, 2)
    with pytest.raises(UnsupportedProfileError, match="outside the jet order"):
        t.derivative(2, 1)
