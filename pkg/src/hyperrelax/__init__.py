"""hyperrelax: hyperbolic approximations of higher-order PDEs."""

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
from hyperrelax._version import __version__
from hyperrelax.experiments import converge_tau, error_growth, preset, run_simulation
from hyperrelax.grid import Field, Grid, State, l2_inner, l2_norm, make_grid, mass
from hyperrelax.imex import ARS443, IMEXTableau, TimeSeries, audit_tableau, imex_step, integrate
from hyperrelax.models import (
    ModelSpec,
    available_models,
    build_model,
    energy,
    energy_rate,
    exact_solution,
    expected_energy_rate,
    flux_jacobian,
    init_hyperbolic,
    jacobian_eigenvalues,
    rhs,
    rhs_explicit,
    rhs_implicit,
    traversal_time,
)
from hyperrelax.relaxation import relaxation_gamma, relaxed_update
from hyperrelax.residuals import (
    SechProfile,
    TravelingWaveProfile,
    TrigSumProfile,
    construct_bar_q,
    scaling_study,
    verify_identities,
)
from hyperrelax.sbp import OperatorSet, audit_operators, build_upwind_pair, fourier_symbol
from hyperrelax.types import (
    Params,
    RelaxationConfig,
    StepMode,
    StepperConfig,
    StudyConfig,
    StudyResult,
    TimeLanding,
)

__all__ = [
    "__version__",
    # Grid and operators
    "Grid",
    "Field",
    "State",
    "make_grid",
    "l2_inner",
    "l2_norm",
    "mass",
    "OperatorSet",
    "build_upwind_pair",
    "fourier_symbol",
    "audit_operators",
    # Models
    "ModelSpec",
    "Params",
    "available_models",
    "build_model",
    "rhs",
    "rhs_explicit",
    "rhs_implicit",
    "init_hyperbolic",
    "energy",
    "energy_rate",
    "expected_energy_rate",
    "flux_jacobian",
    "jacobian_eigenvalues",
    "exact_solution",
    "traversal_time",
    # Time stepping
    "IMEXTableau",
    "ARS443",
    "StepMode",
    "StepperConfig",
    "TimeSeries",
    "imex_step",
    "integrate",
    "audit_tableau",
    "RelaxationConfig",
    "TimeLanding",
    "relaxation_gamma",
    "relaxed_update",
    # Residual verifier
    "TrigSumProfile",
    "SechProfile",
    "TravelingWaveProfile",
    "construct_bar_q",
    "verify_identities",
    "scaling_study",
    # Studies
    "StudyConfig",
    "StudyResult",
    "converge_tau",
    "error_growth",
    "preset",
    "run_simulation",
    # Errors
    "HyperRelaxError",
    "InvalidDomainError",
    "GridMismatchError",
    "FieldCountError",
    "UnsupportedOrderError",
    "InvalidParameterError",
    "UnknownModelError",
    "NoExactSolutionError",
    "UnsupportedModelError",
    "NonFiniteStateError",
    "StageSolveError",
    "TableauError",
    "UnsupportedProfileError",
    "ConfigError",
]
