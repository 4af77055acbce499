"""Tests for initial-condition expressions and log-log fitting."""

import math

import numpy as np
import pytest

from hyperrelax._errors import ConfigError
from hyperrelax._internal.expressions import compile_expression
from hyperrelax._internal.fitting import loglog_slope


def test_gaussian_expression():
    """Test the BBM Gaussian written as an expression."""
    fn = compile_expression("2*exp(-0.02*x**2)")
    x = np.array([0.0, 5.0, -10.0])
    np.testing.assert_allclose(fn(x), 2.0 * np.exp(-0.02 * x * x), rtol=1e-15)


def test_constants_and_functions():
    """Test pi, e, unary minus and the sech helper."""
    fn = compile_expression("-sech(x) + sin(pi*x) + e")
    x = np.array([0.0, 0.5])
    np.testing.assert_allclose(fn(x), -1.0 / np.cosh(x) + np.sin(math.pi * x) + math.e)


def test_constant_expression_broadcasts():
    """Test an expression without x fills the grid."""
    fn = compile_expression("1.5")
    np.testing.assert_array_equal(fn(np.zeros(4)), np.full(4, 1.5))


@pytest.mark.parametrize(
    "source",
    [
        "__import__('os')",
        "y + 1",
        "x if x else 0",
        "sin(x, 2)",
        "exp(x=1)",
        "x[0]",
        "open('f')",
        "2 *",
    ],
)
def test_rejected_expressions(source):
    """Test anything outside the whitelist is a config error."""
    with pytest.raises(ConfigError):
        compile_expression(source)


def test_loglog_slope_exact_power():
    """Test the slope of a pure power law."""
    xs = [1e-1, 1e-2, 1e-3]
    assert loglog_slope(xs, [3.0 * x**2 for x in xs]) == pytest.approx(2.0)


def test_loglog_slope_skips_unusable_points():
    """Test zero, negative and NaN values are ignored."""
    xs = [1.0, 0.1, 0.01, 0.001]
    ys = [1.0, 0.1, 0.0, math.nan]
    assert loglog_slope(xs, ys) == pytest.approx(1.0)
    assert loglog_slope(xs, [0.0] * 4) is None
    assert loglog_slope([1.0], [1.0]) is None
