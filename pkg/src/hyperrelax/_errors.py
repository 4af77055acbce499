"""Error classes for hyperrelax."""


class HyperRelaxError(Exception):
    """Base exception for all hyperrelax errors."""


class InvalidDomainError(HyperRelaxError):
    """Grid bounds or point count are not usable."""


class GridMismatchError(HyperRelaxError):
    """Operands live on different grids."""


class FieldCountError(HyperRelaxError):
    """State has the wrong number of components for a model."""

    def __init__(self, message: str, expected: int, actual: int):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class UnsupportedOrderError(HyperRelaxError):
    """Operator order unavailable or grid too small for the stencil."""


class InvalidParameterError(HyperRelaxError):
    """Model parameters outside their admissible range."""


class UnknownModelError(HyperRelaxError):
    """Model name is not registered."""

    def __init__(self, message: str, name: str):
        super().__init__(message)
        self.name = name


class NoExactSolutionError(HyperRelaxError):
    """Model has no registered exact solution."""


class UnsupportedModelError(HyperRelaxError):
    """Operation is not available for this model."""


class NonFiniteStateError(HyperRelaxError):
    """State contains NaN or infinite values."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class StageSolveError(HyperRelaxError):
    """Implicit stage system is singular."""

    def __init__(self, message: str, gamma: float, model_name: str):
        super().__init__(message)
        self.gamma = gamma
        self.model_name = model_name


class TableauError(HyperRelaxError):
    """Runge-Kutta tableau violates its order or consistency conditions."""


class UnsupportedProfileError(HyperRelaxError):
    """Profile cannot provide what a residual construction needs."""


class ConfigError(HyperRelaxError):
    """Study configuration is missing, malformed or inconsistent."""

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.path = path
