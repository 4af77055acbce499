"""Tests for error classes."""

import pytest

from hyperrelax._errors import (
    ConfigError,
    FieldCountError,
    GridMismatchError,
    HyperRelaxError,
    InvalidDomainError,
    InvalidParameterError,
    NoExactSolutionError,
    NonFiniteStateError,
    StageSolveError,
    TableauError,
    UnknownModelError,
    UnsupportedModelError,
    UnsupportedOrderError,
    UnsupportedProfileError,
)


def test_base_error():
    """Test base HyperRelaxError."""
    error = HyperRelaxError("test message")
    assert str(error) == "test message"
    assert isinstance(error, Exception)


@pytest.mark.parametrize(
    "cls",
    [
        InvalidDomainError,
        GridMismatchError,
        UnsupportedOrderError,
        InvalidParameterError,
        NoExactSolutionError,
        UnsupportedModelError,
        TableauError,
        UnsupportedProfileError,
    ],
)
def test_plain_errors_inherit_from_base(cls):
    """Test every plain error is a HyperRelaxError."""
    error = cls("failed")
    assert isinstance(error, HyperRelaxError)
    assert str(error) == "failed"


def test_field_count_error_stores_counts():
    """Test FieldCountError keeps expected and actual counts."""
    error = FieldCountError("wrong", expected=5, actual=3)
    assert (error.expected, error.actual) == (5, 3)
    assert str(error) == "wrong"


def test_unknown_model_error_stores_name():
    """Test UnknownModelError keeps the requested name."""
    error = UnknownModelError("Unknown model", name="heat")
    assert error.name == "heat"


def test_non_finite_state_error_time():
    """Test NonFiniteStateError keeps the failure time."""
    assert NonFiniteStateError("nan", time=12.5).time == 12.5
    assert NonFiniteStateError("nan").time is None


def test_stage_solve_error_context():
    """Test StageSolveError keeps gamma and the model name."""
    error = StageSolveError("singular", gamma=0.05, model_name="ks_hyper")
    assert error.gamma == 0.05
    assert error.model_name == "ks_hyper"


def test_config_error_path():
    """Test ConfigError carries the file path."""
    assert ConfigError("bad", path="study.toml").path == "study.toml"
    assert ConfigError("bad").path is None
