"""Type definitions for hyperrelax."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from hyperrelax._errors import ConfigError, InvalidParameterError

FloatArray = npt.NDArray[np.float64]


class StepMode(str, Enum):
    """How the additive Runge-Kutta step treats the stiff part."""

    IMEX = "imex"
    EXPLICIT_ONLY = "explicit_only"


class FluxKind(str, Enum):
    """Nonlinear flux of the principal variable."""

    NONE = "none"
    QUADRATIC = "quadratic"  # f = u^2/2
    GARDNER = "gardner"  # f = sigma u^2/2 + u^3/3


class ReferenceKind(str, Enum):
    """Reference solution used by tau-convergence studies."""

    LIMIT_NUMERIC = "limit_numeric"
    EXACT = "exact"


class TimeLanding(str, Enum):
    """How relaxation runs reach the final time."""

    LAND_ON_T = "land_on_t"
    ACCEPT_NEAR_T = "accept_near_t"


@dataclass(frozen=True)
class Params:
    """Model parameters.

    ``tau`` is ignored by limit models. ``init_variant`` selects an alternative
    initializer where a model offers one (``None`` uses the model default).
    """

    tau: float = 1.0
    mu: float = 0.0
    sigma: float = 1.0
    sigma0: int = 1
    m: int = 3
    flux: FluxKind = FluxKind.QUADRATIC
    init_variant: str | None = None

    def __post_init__(self) -> None:
        if not (self.tau > 0.0 and math.isfinite(self.tau)):
            raise InvalidParameterError(f"tau must be positive and finite, got {self.tau}")
        if self.mu < 0.0:
            raise InvalidParameterError(f"mu must be nonnegative, got {self.mu}")
        if self.sigma0 not in (1, -1):
            raise InvalidParameterError(f"sigma0 must be +1 or -1, got {self.sigma0}")
        if self.m < 1:
            raise InvalidParameterError(f"m must be a positive integer, got {self.m}")


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping options."""

    dt: float
    mode: StepMode = StepMode.IMEX
    # Relative bound on the stage-solve residual; exceeding it is logged
    stage_tol: float = 1e-8
    # Diagnostics are recorded every ``record_every`` accepted steps and at T
    record_every: int = 1

    def __post_init__(self) -> None:
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise InvalidParameterError(f"dt must be positive and finite, got {self.dt}")
        if self.stage_tol <= 0.0:
            raise InvalidParameterError(f"stage_tol must be positive, got {self.stage_tol}")
        if self.record_every < 1:
            raise InvalidParameterError(f"record_every must be >= 1, got {self.record_every}")


@dataclass(frozen=True)
class RelaxationConfig:
    """Relaxation-in-time options for a weighted quadratic invariant."""

    weights: tuple[float, ...]
    gamma_floor: float = 1e-14
    enabled: bool = True
    landing: TimeLanding = TimeLanding.LAND_ON_T
    landing_tol: float = 1e-12

    def __post_init__(self) -> None:
        if not self.weights or any(not w > 0.0 for w in self.weights):
            raise InvalidParameterError(f"relaxation weights must be positive, got {self.weights}")
        if self.gamma_floor <= 0.0:
            raise InvalidParameterError(f"gamma_floor must be positive, got {self.gamma_floor}")


@dataclass
class StudyConfig:
    """Configuration of a tau-convergence or error-growth study."""

    # Models
    limit_model: str
    hyper_model: str
    model_overrides: dict[str, Any] = field(default_factory=dict)

    # Grid and operators
    left: float = -50.0
    right: float = 150.0
    n: int = 1024
    order: int = 7

    # Time
    dt: float = 0.1
    t_final: float | None = None
    traversals: float | None = None
    mode: StepMode | None = None
    landing: TimeLanding = TimeLanding.LAND_ON_T

    # Study
    initial_condition: str = "exact"
    tau_list: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5)
    reference: ReferenceKind = ReferenceKind.LIMIT_NUMERIC
    relaxation: bool = False
    floor_threshold: float = 0.05
    samples: int = 40

    # Output
    name: str = "study"
    output_dir: Path = Path("results")
    formats: tuple[str, ...] = ("csv", "svg")

    def __post_init__(self) -> None:
        if (self.t_final is None) == (self.traversals is None):
            raise ConfigError("exactly one of T and traversals must be given")
        if self.t_final is not None and not self.t_final > 0.0:
            raise ConfigError(f"T must be positive, got {self.t_final}")
        if self.traversals is not None and not self.traversals > 0.0:
            raise ConfigError(f"traversals must be positive, got {self.traversals}")
        if not self.dt > 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if any(t <= 0.0 for t in self.tau_list):
            raise ConfigError(f"tau_list entries must be positive, got {self.tau_list}")
        if any(b >= a for a, b in zip(self.tau_list, self.tau_list[1:])):
            raise ConfigError(f"tau_list must be strictly decreasing, got {self.tau_list}")
        if not 0.0 <= self.floor_threshold < 1.0:
            raise ConfigError(f"floor_threshold must lie in [0, 1), got {self.floor_threshold}")
        unknown = set(self.formats) - {"csv", "svg"}
        if unknown:
            raise ConfigError(f"Unknown output formats: {sorted(unknown)}")


@dataclass
class ConvergenceRow:
    """Errors of one hyperbolization run at the final time."""

    tau: float
    errors: tuple[float, ...]
    diverged: bool = False
    in_fit: bool = False


@dataclass
class StudyResult:
    """Outcome of a tau-convergence study."""

    rows: list[ConvergenceRow]
    slopes: tuple[float | None, ...]
    final_time: float
    # Runtime metadata, not written to CSV
    runtime_seconds: float = 0.0
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass
class GrowthSeries:
    """Error history of one solitary-wave run."""

    label: str
    tau: float | None
    relaxation: bool
    times: list[float]
    errors: list[float]
    gammas: list[float]
    exponent: float | None = None


@dataclass
class GrowthReport:
    """Outcome of an error-growth study."""

    series: list[GrowthSeries]
    final_time: float
    runtime_seconds: float = 0.0
