"""Registry of limit PDEs and their hyperbolic approximations.

Every model is a method-of-lines right-hand side on a periodic grid, split as

    dq/dt = E(q) + L(q)

where ``E`` (:func:`rhs_explicit`) holds the nonlinear flux in split form and
``L`` (:func:`rhs_implicit`) is the linear, possibly stiff, part. Limit models
have one component; a hyperbolization with leading derivative order ``m`` has
``m`` components ``q_0, ..., q_{m-1}`` with ``q_0`` the principal variable.

Models are created by name with :func:`build_model`. New models register a
factory with :func:`register_model`.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from hyperrelax._errors import (
    FieldCountError,
    InvalidParameterError,
    NoExactSolutionError,
    UnknownModelError,
    UnsupportedModelError,
)
from hyperrelax._internal import jets
from hyperrelax._internal.flux import Flux
from hyperrelax.grid import Field, Grid, State, inner_values
from hyperrelax.sbp import CirculantOperator, OperatorSet, build_upwind_pair, chain
from hyperrelax.types import FloatArray, FluxKind, Params, StepMode

logger = logging.getLogger(__name__)

Rate = Callable[[FloatArray], FloatArray]

GEN_KAWAHARA_SIGMA = 2.0 / math.sqrt(90.0)
GARDNER_SPEED = 1.2


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form solution u(t, x) = profile(t, x - speed * t).

    ``profile`` is written with :mod:`hyperrelax._internal.jets` functions, so
    it accepts plain arrays as well as Taylor jets.
    """

    name: str
    speed: float
    profile: Callable[[Any, Any], Any]

    def __call__(self, t: Any, x: Any) -> Any:
        return self.profile(t, x - self.speed * t)

    def sample(self, grid: Grid, t: float) -> FloatArray:
        """Values at the grid nodes, with the wave position wrapped periodically."""
        xi = grid.wrap(grid.nodes - self.speed * t)
        return np.asarray(self.profile(t, xi), dtype=np.float64)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A registered model bound to a grid, an operator set and parameters."""

    name: str
    family: str
    params: Params
    field_count: int
    operators: OperatorSet
    energy_weights: tuple[float, ...]

    # Raw (field_count, n) array maps
    explicit: Rate
    implicit: Rate
    initializer: Callable[[FloatArray], FloatArray]
    closed_form_rate: Callable[[FloatArray], float]

    flux: Flux = field(default_factory=Flux)
    mode: StepMode = StepMode.IMEX
    hyperbolic: bool = False
    limit_name: str | None = None
    # Energy metric on q_0; None means the identity
    metric: CirculantOperator | None = None
    jacobian: Callable[[float], FloatArray] | None = None
    eigenvalues: Callable[[float], list[float]] | None = None
    exact: ExactSolution | None = None

    @property
    def grid(self) -> Grid:
        return self.operators.grid

    @property
    def tau(self) -> float:
        return self.params.tau


ModelFactory = Callable[[str, OperatorSet, Params], ModelSpec]


@dataclass(frozen=True)
class _Entry:
    factory: ModelFactory
    defaults: dict[str, Any]
    # sigma0 defaults to (-1)^(m/2) when not given
    even: bool = False


_REGISTRY: dict[str, _Entry] = {}


def register_model(
    name: str, *, even: bool = False, **defaults: Any
) -> Callable[[ModelFactory], ModelFactory]:
    """Register a model factory under ``name`` with default parameters.

    Decorators stack, so one factory can serve several named variants.
    """

    def decorator(factory: ModelFactory) -> ModelFactory:
        _REGISTRY[name] = _Entry(factory, defaults, even)
        return factory

    return decorator


def available_models() -> list[str]:
    return sorted(_REGISTRY)


def build_model(name: str, grid: Grid, order: int = 7, **overrides: Any) -> ModelSpec:
    """Instantiate a registered model.

    Args:
        name: Registered model name, e.g. ``"kdv_hyper"``.
        grid: Periodic grid.
        order: Upwind operator order, 1 to 7.
        **overrides: Parameter overrides (``tau``, ``mu``, ``sigma``,
            ``sigma0``, ``m``, ``flux``, ``init_variant``).

    Returns:
        The bound ModelSpec.

    Raises:
        UnknownModelError: ``name`` is not registered.
        InvalidParameterError: Parameters are out of range or unknown.
        UnsupportedOrderError: Order unavailable for this grid.

    Example:
        >>> model = build_model("kdv_hyper", make_grid(-50, 150, 256), order=3, tau=1e-3)
        >>> model.field_count
        3
    """
    entry = _REGISTRY.get(name)
    if entry is None:
        raise UnknownModelError(
            f"Unknown model {name!r}; available: {', '.join(available_models())}", name
        )
    values = {**entry.defaults, **{k: v for k, v in overrides.items() if v is not None}}
    if "flux" in values:
        try:
            values["flux"] = FluxKind(values["flux"])
        except ValueError as e:
            raise InvalidParameterError(f"Unknown flux {values['flux']!r}") from e
    if entry.even and "sigma0" not in values:
        values["sigma0"] = 1 if int(values.get("m", 4)) % 4 == 0 else -1
    try:
        params = Params(**values)
    except TypeError as e:
        raise InvalidParameterError(f"Invalid parameters for {name}: {e}") from e
    ops = build_upwind_pair(order, grid)
    model = entry.factory(name, ops, params)
    logger.debug("Built model %s on n=%d (order %d, %s)", name, grid.n, order, params)
    return model


# Helpers


def _rows(data: FloatArray) -> FloatArray:
    return np.zeros_like(data, dtype=np.float64)


def _check_variant(name: str, params: Params, allowed: Sequence[str]) -> str:
    variant = params.init_variant or allowed[0]
    if variant not in allowed:
        raise InvalidParameterError(
            f"Unknown init_variant {variant!r} for {name}; choose one of {list(allowed)}"
        )
    return variant


def _norm2(h: float, u: FloatArray) -> float:
    return inner_values(h, u, u)


def _odd_chain(ops: OperatorSet, m: int) -> list[CirculantOperator]:
    mid = (m - 1) // 2
    return [ops.dplus if j < mid else ops.dcentral if j == mid else ops.dminus for j in range(m)]


def _even_chain(ops: OperatorSet, m: int) -> list[CirculantOperator]:
    half = [ops.dplus if j % 2 == 0 else ops.dminus for j in range(m // 2)]
    mirrored = [ops.dminus if half[m - 1 - j] is ops.dplus else ops.dplus for j in range(m // 2, m)]
    return half + mirrored


def odd_signs(sigma0: int, m: int) -> list[int]:
    """Row signs s_j of the odd-order hyperbolization."""
    return [sigma0 * (-1) ** j for j in range(m)]


def even_signs(sigma0: int, m: int) -> list[int]:
    """Row signs s_j of the even-order hyperbolization; they flip at j = m/2."""
    return [sigma0 * (-1) ** j if j < m // 2 else -sigma0 * (-1) ** j for j in range(m)]


def _check_odd(name: str, params: Params) -> None:
    if params.m % 2 == 0 or params.m < 3:
        raise InvalidParameterError(f"{name} needs an odd m >= 3, got {params.m}")


def _check_even(name: str, params: Params) -> None:
    if params.m % 2 or params.m < 2:
        raise InvalidParameterError(f"{name} needs an even m >= 2, got {params.m}")
    expected = 1 if params.m % 4 == 0 else -1
    if params.sigma0 != expected:
        raise InvalidParameterError(
            f"{name} with m={params.m} needs sigma0={expected}, got {params.sigma0}"
        )
    if params.mu != 0.0:
        raise InvalidParameterError(f"{name} has no mu term, got mu={params.mu}")


def _hyper_weights(tau: float, m: int) -> tuple[float, ...]:
    return (1.0,) + (tau,) * (m - 1)


def _transport_pair(fprime: float, tau: float) -> list[float]:
    """Roots of lambda^2 - f' lambda - 1/tau, the (q_0, q_{m-1}) characteristic pair."""
    root = math.sqrt(fprime * fprime + 4.0 / tau)
    return [(fprime - root) / 2.0, (fprime + root) / 2.0]


def _flux_explicit(flux: Flux, ops: OperatorSet) -> Rate:
    def explicit(q: FloatArray) -> FloatArray:
        out = _rows(q)
        out[0] = -flux.divergence(ops.dcentral, q[0])
        return out

    return explicit


def _fprime(flux: Flux, value: float) -> float:
    return float(flux.derivative(np.asarray(value, dtype=np.float64)))


# Generic chain models


def _chain_hyper(
    name: str,
    family: str,
    ops: OperatorSet,
    params: Params,
    chain_ops: list[CirculantOperator],
    signs: list[int],
    limit_name: str,
    closed_form_rate: Callable[[FloatArray], float],
    initializer: Callable[[FloatArray], FloatArray] | None = None,
    exact: ExactSolution | None = None,
) -> ModelSpec:
    m, tau, mu = params.m, params.tau, params.mu
    flux = Flux(params.flux, params.sigma)

    def implicit(q: FloatArray) -> FloatArray:
        out = _rows(q)
        out[0] = -signs[0] * chain_ops[0](q[m - 1])
        for j in range(1, m):
            row = signs[j] * (q[m - j] - chain_ops[j](q[m - j - 1]))
            if j == 1 and mu:
                row = row - mu * q[1]
            out[j] = row / tau
        return out

    def equilibrium(u0: FloatArray) -> FloatArray:
        q = np.zeros((m, u0.size))
        q[0] = u0
        for k in range(1, m):
            q[k] = chain_ops[m - k](q[k - 1])
        if mu:
            q[m - 1] += signs[1] * mu * q[1]
        return q

    def jacobian(q0_value: float) -> FloatArray:
        a = np.zeros((m, m))
        a[0, 0] = _fprime(flux, q0_value)
        a[0, m - 1] = signs[0]
        for j in range(1, m):
            a[j, m - j - 1] = signs[j] / tau
        return a

    return ModelSpec(
        name=name,
        family=family,
        params=params,
        field_count=m,
        operators=ops,
        energy_weights=_hyper_weights(tau, m),
        explicit=_flux_explicit(flux, ops),
        implicit=implicit,
        initializer=initializer or equilibrium,
        closed_form_rate=closed_form_rate,
        flux=flux,
        hyperbolic=True,
        limit_name=limit_name,
        jacobian=jacobian,
        exact=exact,
    )


def _chain_limit(
    name: str,
    family: str,
    ops: OperatorSet,
    params: Params,
    linear: CirculantOperator,
    closed_form_rate: Callable[[FloatArray], float],
    exact: ExactSolution | None = None,
) -> ModelSpec:
    flux = Flux(params.flux, params.sigma)

    def implicit(q: FloatArray) -> FloatArray:
        return np.asarray(linear(q), dtype=np.float64)

    return ModelSpec(
        name=name,
        family=family,
        params=params,
        field_count=1,
        operators=ops,
        energy_weights=(1.0,),
        explicit=_flux_explicit(flux, ops),
        implicit=implicit,
        initializer=lambda u0: np.asarray(u0, dtype=np.float64)[np.newaxis, :].copy(),
        closed_form_rate=closed_form_rate,
        flux=flux,
        exact=exact,
    )


def _odd_limit_operator(ops: OperatorSet, params: Params) -> CirculantOperator:
    linear = -params.sigma0 * chain(*_odd_chain(ops, params.m))
    if params.mu:
        linear = linear + params.mu * (ops.dplus @ ops.dminus)
    return linear


def _odd_limit_rate(ops: OperatorSet, params: Params) -> Callable[[FloatArray], float]:
    h = ops.grid.h
    return lambda q: -params.mu * _norm2(h, ops.dminus(q[0]))


def _even_limit_rate(ops: OperatorSet, params: Params) -> Callable[[FloatArray], float]:
    h = ops.grid.h
    m = params.m
    lap = ops.dplus @ ops.dminus

    def rate(q: FloatArray) -> float:
        u = q[0]
        if (m // 2) % 2 == 0:
            for _ in range(m // 4):
                u = lap(u)
            return -_norm2(h, u)
        for _ in range((m - 2) // 4):
            u = lap(u)
        return -_norm2(h, ops.dminus(u))

    return rate


def _odd_hyper_rate(ops: OperatorSet, params: Params) -> Callable[[FloatArray], float]:
    h = ops.grid.h
    return lambda q: -params.mu * _norm2(h, q[1])


def _even_hyper_rate(ops: OperatorSet, params: Params) -> Callable[[FloatArray], float]:
    h = ops.grid.h
    return lambda q: -_norm2(h, q[params.m // 2])


@register_model("odd_m_hyper", m=3)
def _odd_m_hyper(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    _check_odd(name, params)
    return _chain_hyper(
        name, "odd_m", ops, params,
        _odd_chain(ops, params.m), odd_signs(params.sigma0, params.m),
        "odd_m_limit", _odd_hyper_rate(ops, params),
    )


@register_model("odd_m_limit", m=3)
def _odd_m_limit(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    _check_odd(name, params)
    return _chain_limit(
        name, "odd_m", ops, params, _odd_limit_operator(ops, params), _odd_limit_rate(ops, params)
    )


@register_model("even_m_hyper", even=True, m=4, flux=FluxKind.NONE)
def _even_m_hyper(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    _check_even(name, params)
    return _chain_hyper(
        name, "even_m", ops, params,
        _even_chain(ops, params.m), even_signs(params.sigma0, params.m),
        "even_m_limit", _even_hyper_rate(ops, params),
    )


@register_model("even_m_limit", even=True, m=4, flux=FluxKind.NONE)
def _even_m_limit(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    _check_even(name, params)
    linear = -params.sigma0 * chain(*_even_chain(ops, params.m))
    return _chain_limit(name, "even_m", ops, params, linear, _even_limit_rate(ops, params))


# Exact solutions


def gardner_solution(sigma: float = 1.0, c: float = GARDNER_SPEED) -> ExactSolution:
    """Solitary wave of u_t + (sigma u^2/2 + u^3/3)_x + u_xxx = 0."""
    root = math.sqrt(sigma * sigma + 6.0 * c)
    a1 = 3.0 * c / root
    a2 = 0.5 * (sigma / root - 1.0)
    k = math.sqrt(c) / 2.0
    return ExactSolution("gardner", c, lambda t, xi: a1 / (a2 + jets.cosh(k * xi) ** 2))


def kawahara_solution() -> ExactSolution:
    """Solitary wave 105/169 sech^4 of the Kawahara equation."""
    width = 2.0 * math.sqrt(13.0)
    return ExactSolution(
        "kawahara", 36.0 / 169.0, lambda t, xi: 105.0 / 169.0 * jets.sech(xi / width) ** 4
    )


def gen_kawahara_solution(sigma: float = GEN_KAWAHARA_SIGMA) -> ExactSolution:
    """Solitary wave of the Kawahara equation with the Gardner flux."""
    k2 = 1.0 / 20.0 + sigma / (4.0 * math.sqrt(10.0))
    if k2 <= 0.0:
        raise NoExactSolutionError(f"No solitary wave for sigma={sigma}")
    k = math.sqrt(k2)
    amplitude = -6.0 * math.sqrt(10.0) * k2
    return ExactSolution(
        "gen_kawahara",
        4.0 * k2 * (1.0 - 4.0 * k2),
        lambda t, xi: amplitude * jets.sech(k * xi) ** 2,
    )


def biharmonic_solution() -> ExactSolution:
    return ExactSolution("biharmonic", 0.0, lambda t, xi: jets.exp(-t) * jets.sin(xi))


# KdV, KdV-Burgers and Gardner


def _kdv_initializer(
    name: str, ops: OperatorSet, params: Params
) -> Callable[[FloatArray], FloatArray] | None:
    variant = _check_variant(name, params, ("printed", "derivative", "equilibrium"))
    if variant == "equilibrium":
        return None
    mu = params.mu

    def initializer(u0: FloatArray) -> FloatArray:
        q = np.zeros((3, u0.size))
        q[0] = u0
        if variant == "printed":
            q[1] = ops.dminus(u0) - mu * u0
        else:
            q[1] = (1.0 - mu) * ops.dminus(u0)
        q[2] = ops.dcentral(q[1])
        return q

    return initializer


def _third_order_exact(family: str, params: Params) -> ExactSolution | None:
    if family == "gardner":
        return gardner_solution(params.sigma)
    return None


@register_model("kdv_hyper", m=3)
@register_model("kdvb_hyper", m=3, mu=0.1)
@register_model("gardner_hyper", m=3, flux=FluxKind.GARDNER, sigma=1.0)
def _third_order_hyper(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    if params.m != 3 or params.sigma0 != 1:
        raise InvalidParameterError(f"{name} is fixed at m=3, sigma0=1")
    family = name.removesuffix("_hyper")
    return _chain_hyper(
        name, family, ops, params,
        _odd_chain(ops, 3), odd_signs(1, 3),
        f"{family}_limit", _odd_hyper_rate(ops, params),
        initializer=_kdv_initializer(name, ops, params),
        exact=_third_order_exact(family, params),
    )


@register_model("kdv_limit", m=3)
@register_model("kdvb_limit", m=3, mu=0.1)
@register_model("gardner_limit", m=3, flux=FluxKind.GARDNER, sigma=1.0)
def _third_order_limit(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    if params.m != 3 or params.sigma0 != 1:
        raise InvalidParameterError(f"{name} is fixed at m=3, sigma0=1")
    family = name.removesuffix("_limit")
    return _chain_limit(
        name, family, ops, params,
        _odd_limit_operator(ops, params), _odd_limit_rate(ops, params),
        exact=_third_order_exact(family, params),
    )


# Bi-harmonic heat equation


@register_model("biharmonic_hyper", m=4, flux=FluxKind.NONE, sigma0=1)
def _biharmonic_hyper(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    _check_even(name, params)
    if params.m != 4:
        raise InvalidParameterError(f"{name} is fixed at m=4")
    return _chain_hyper(
        name, "biharmonic", ops, params,
        _even_chain(ops, 4), even_signs(1, 4),
        "biharmonic_limit", _even_hyper_rate(ops, params),
        exact=biharmonic_solution(),
    )


@register_model("biharmonic_limit", m=4, flux=FluxKind.NONE, sigma0=1)
def _biharmonic_limit(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    _check_even(name, params)
    lap = ops.dplus @ ops.dminus
    return _chain_limit(
        name, "biharmonic", ops, params, -(lap @ lap), _even_limit_rate(ops, params),
        exact=biharmonic_solution(),
    )


# Kuramoto-Sivashinsky


@register_model("ks_hyper", m=4)
def _ks_hyper(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    if params.m != 4 or params.sigma0 != 1 or params.mu != 0.0:
        raise InvalidParameterError(f"{name} is fixed at m=4, sigma0=1, mu=0")
    h = ops.grid.h
    base = _chain_hyper(
        name, "ks", ops, params,
        _even_chain(ops, 4), even_signs(1, 4),
        "ks_limit", lambda q: -inner_values(h, q[0], q[2]) - _norm2(h, q[2]),
    )
    chain_implicit = base.implicit

    def implicit(q: FloatArray) -> FloatArray:
        out = chain_implicit(q)
        out[0] -= q[2]
        return out

    def eigenvalues(q0_value: float) -> list[float]:
        tau = params.tau
        return [-1.0 / tau, 1.0 / tau, *_transport_pair(_fprime(base.flux, q0_value), tau)]

    return replace(base, implicit=implicit, eigenvalues=eigenvalues)


@register_model("ks_limit", m=4)
def _ks_limit(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    h = ops.grid.h
    lap = ops.dplus @ ops.dminus
    return _chain_limit(
        name, "ks", ops, params, -lap - lap @ lap,
        lambda q: _norm2(h, ops.dminus(q[0])) - _norm2(h, lap(q[0])),
    )


# Kawahara and generalized Kawahara


def _kawahara_exact(family: str, params: Params) -> ExactSolution:
    if family == "gen_kawahara":
        return gen_kawahara_solution(params.sigma)
    return kawahara_solution()


@register_model("kawahara_hyper", m=5)
@register_model("gen_kawahara_hyper", m=5, flux=FluxKind.GARDNER, sigma=GEN_KAWAHARA_SIGMA)
def _kawahara_hyper(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    if params.m != 5 or params.mu != 0.0:
        raise InvalidParameterError(f"{name} is fixed at m=5, mu=0")
    variant = _check_variant(name, params, ("equilibrium", "listed"))
    family = name.removesuffix("_hyper")
    tau = params.tau
    dp, dm, d0 = ops.dplus, ops.dminus, ops.dcentral
    flux = Flux(params.flux, params.sigma)

    def implicit(q: FloatArray) -> FloatArray:
        out = _rows(q)
        out[0] = dp(q[4])
        out[1] = (-dp(q[3]) + d0(q[1]) + q[4]) / tau
        out[2] = (d0(q[2]) - q[3]) / tau
        out[3] = (-dm(q[1]) + q[2]) / tau
        out[4] = (dm(q[0]) - q[1]) / tau
        return out

    def initializer(u0: FloatArray) -> FloatArray:
        q = np.zeros((5, u0.size))
        q[0] = u0
        q[1] = dm(u0)
        if variant == "equilibrium":
            q[2] = dm(q[1])
            q[3] = d0(q[2])
        else:
            q[2] = d0(q[1])
            q[3] = dp(q[2])
        q[4] = dp(q[3]) - d0(q[1])
        return q

    def jacobian(q0_value: float) -> FloatArray:
        r = 1.0 / tau
        return np.array(
            [
                [_fprime(flux, q0_value), 0.0, 0.0, 0.0, -1.0],
                [0.0, -r, 0.0, r, 0.0],
                [0.0, 0.0, -r, 0.0, 0.0],
                [0.0, r, 0.0, 0.0, 0.0],
                [-r, 0.0, 0.0, 0.0, 0.0],
            ]
        )

    def eigenvalues(q0_value: float) -> list[float]:
        s5 = math.sqrt(5.0)
        return [
            -(1.0 + s5) / (2.0 * tau),
            -1.0 / tau,
            (s5 - 1.0) / (2.0 * tau),
            *_transport_pair(_fprime(flux, q0_value), tau),
        ]

    return ModelSpec(
        name=name,
        family=family,
        params=params,
        field_count=5,
        operators=ops,
        energy_weights=_hyper_weights(tau, 5),
        explicit=_flux_explicit(flux, ops),
        implicit=implicit,
        initializer=initializer,
        closed_form_rate=lambda q: 0.0,
        flux=flux,
        hyperbolic=True,
        limit_name=f"{family}_limit",
        jacobian=jacobian,
        eigenvalues=eigenvalues,
        exact=_kawahara_exact(family, params),
    )


@register_model("kawahara_limit", m=5)
@register_model("gen_kawahara_limit", m=5, flux=FluxKind.GARDNER, sigma=GEN_KAWAHARA_SIGMA)
def _kawahara_limit(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    family = name.removesuffix("_limit")
    dp, dm, d0 = ops.dplus, ops.dminus, ops.dcentral
    third = chain(dp, d0, dm)
    linear = -third + chain(dp, dp, d0, dm, dm)
    return _chain_limit(
        name, family, ops, params, linear, lambda q: 0.0, exact=_kawahara_exact(family, params)
    )


# Benjamin-Bona-Mahony


class _HelmholtzSolver:
    """Exact inverse of the SPD circulant I - D+ D- by FFT diagonalization."""

    def __init__(self, ops: OperatorSet) -> None:
        self.operator = CirculantOperator.identity(ops.grid) - ops.dplus @ ops.dminus
        self.symbol = self.operator.eigenvalues()

    def __call__(self, rhs: FloatArray) -> FloatArray:
        return np.fft.ifft(np.fft.fft(rhs, axis=-1) / self.symbol, axis=-1).real


@register_model("bbm_limit")
def _bbm_limit(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    flux = Flux(params.flux, params.sigma)
    solve = _HelmholtzSolver(ops)

    def explicit(q: FloatArray) -> FloatArray:
        return np.asarray(-solve(flux.divergence(ops.dcentral, q[0]))[np.newaxis, :])

    return ModelSpec(
        name=name,
        family="bbm",
        params=params,
        field_count=1,
        operators=ops,
        energy_weights=(1.0,),
        explicit=explicit,
        implicit=_rows,
        initializer=lambda u0: np.asarray(u0, dtype=np.float64)[np.newaxis, :].copy(),
        closed_form_rate=lambda q: 0.0,
        flux=flux,
        mode=StepMode.EXPLICIT_ONLY,
        metric=solve.operator,
    )


@register_model("bbm_hyper")
def _bbm_hyper(name: str, ops: OperatorSet, params: Params) -> ModelSpec:
    tau = params.tau
    d0 = ops.dcentral
    flux = Flux(params.flux, params.sigma)
    solve = _HelmholtzSolver(ops)

    def implicit(q: FloatArray) -> FloatArray:
        out = _rows(q)
        out[0] = -d0(q[2])
        out[1] = -tau * d0(q[1]) - q[2]
        out[2] = (-d0(q[0]) + q[1]) / tau
        return out

    def initializer(u0: FloatArray) -> FloatArray:
        q = np.zeros((3, u0.size))
        q[0] = u0
        q[1] = d0(u0)
        # -d/dx of the limit rate at t = 0
        q[2] = d0(solve(flux.divergence(d0, u0)))
        return q

    def jacobian(q0_value: float) -> FloatArray:
        return np.array(
            [
                [_fprime(flux, q0_value), 0.0, 1.0],
                [0.0, tau, 0.0],
                [1.0 / tau, 0.0, 0.0],
            ]
        )

    def eigenvalues(q0_value: float) -> list[float]:
        return [tau, *_transport_pair(_fprime(flux, q0_value), tau)]

    return ModelSpec(
        name=name,
        family="bbm",
        params=params,
        field_count=3,
        operators=ops,
        energy_weights=(1.0, 1.0, tau),
        explicit=_flux_explicit(flux, ops),
        implicit=implicit,
        initializer=initializer,
        closed_form_rate=lambda q: 0.0,
        flux=flux,
        hyperbolic=True,
        limit_name="bbm_limit",
        jacobian=jacobian,
        eigenvalues=eigenvalues,
    )


# Public operations


def _check_state(model: ModelSpec, q: State) -> None:
    model.grid.require_same(q.grid)
    if q.m != model.field_count:
        raise FieldCountError(
            f"{model.name} expects {model.field_count} fields, got {q.m}",
            model.field_count,
            q.m,
        )


def rhs_explicit(model: ModelSpec, q: State) -> State:
    """Nonstiff (nonlinear) part of dq/dt."""
    _check_state(model, q)
    return q.with_data(model.explicit(q.data))


def rhs_implicit(model: ModelSpec, q: State) -> State:
    """Stiff linear part of dq/dt."""
    _check_state(model, q)
    return q.with_data(model.implicit(q.data))


def rhs(model: ModelSpec, q: State) -> State:
    """Full right-hand side E(q) + L(q)."""
    _check_state(model, q)
    return q.with_data(model.explicit(q.data) + model.implicit(q.data))


def init_hyperbolic(model: ModelSpec, u0: Field) -> State:
    """Lift a principal-variable field to a full initial state of ``model``.

    Auxiliary fields are filled by nested operator application so that the
    tau^{-1} blocks vanish (or nearly vanish, for the printed variants) at t = 0.
    Limit models return the one-component state ``(u0,)``.
    """
    model.grid.require_same(u0.grid)
    return State(model.grid, model.initializer(np.asarray(u0.values)))


def energy(model: ModelSpec, q: State) -> float:
    """Quadratic energy 1/2 sum_j w_j ||q_j||^2 (metric-weighted on q_0 if set)."""
    _check_state(model, q)
    h = model.grid.h
    total = 0.0
    for j, w in enumerate(model.energy_weights):
        weighted = model.metric(q.data[j]) if (j == 0 and model.metric is not None) else q.data[j]
        total += w * inner_values(h, q.data[j], weighted)
    return 0.5 * total


def energy_rate(model: ModelSpec, q: State) -> float:
    """Semidiscrete energy production sum_j w_j <q_j, (E + L)_j>."""
    _check_state(model, q)
    h = model.grid.h
    rate = model.explicit(q.data) + model.implicit(q.data)
    total = 0.0
    for j, w in enumerate(model.energy_weights):
        weighted = model.metric(q.data[j]) if (j == 0 and model.metric is not None) else q.data[j]
        total += w * inner_values(h, weighted, rate[j])
    return total


def expected_energy_rate(model: ModelSpec, q: State) -> float:
    """Closed-form energy production of the model at ``q``."""
    _check_state(model, q)
    return float(model.closed_form_rate(q.data))


def flux_jacobian(model: ModelSpec, q0_value: float) -> FloatArray:
    """Coefficient matrix A of dq/dt + A dq/dx = S(q) frozen at q_0 = q0_value."""
    if model.jacobian is None:
        raise UnsupportedModelError(f"{model.name} has no quasi-linear first-order form")
    return model.jacobian(q0_value)


def jacobian_eigenvalues(model: ModelSpec, q0_value: float) -> list[float]:
    """Closed-form characteristic speeds, sorted ascending.

    Raises:
        UnsupportedModelError: The model has no closed-form eigenstructure.
    """
    if model.eigenvalues is None:
        raise UnsupportedModelError(f"{model.name} has no closed-form eigenvalues")
    return sorted(model.eigenvalues(q0_value))


def exact_solution_of(model: ModelSpec) -> ExactSolution:
    if model.exact is None:
        raise NoExactSolutionError(f"{model.name} has no exact solution")
    return model.exact


def exact_solution(model: ModelSpec, t: float, x: float | FloatArray) -> float | FloatArray:
    """Pointwise value of the model's closed-form solution."""
    value = exact_solution_of(model)(t, np.asarray(x, dtype=np.float64))
    if np.ndim(value) == 0:
        return float(value)
    return np.asarray(value, dtype=np.float64)


def traversal_time(model: ModelSpec) -> float:
    """Time for the exact traveling wave to cross the domain once."""
    exact = exact_solution_of(model)
    if exact.speed == 0.0:
        raise UnsupportedModelError(f"{model.name} has a standing exact solution")
    return model.grid.length / abs(exact.speed)


INITIAL_CONDITIONS: dict[str, Callable[[FloatArray], FloatArray]] = {
    "bbm_gaussian": lambda x: 2.0 * np.exp(-0.02 * x * x),
    "kdvb_front": lambda x: 0.5 * (1.0 - np.tanh((np.abs(x) - 25.0) / 5.0)),
    "ks_gaussian": lambda x: np.exp(-x * x),
    "sine": np.sin,
}


def initial_field(model: ModelSpec, name: str) -> Field:
    """Principal-variable initial data by registered name (``exact`` uses t = 0)."""
    if name == "exact":
        return Field(model.grid, exact_solution_of(model).sample(model.grid, 0.0))
    fn = INITIAL_CONDITIONS.get(name)
    if fn is None:
        raise InvalidParameterError(
            f"Unknown initial condition {name!r}; "
            f"choose exact or one of {sorted(INITIAL_CONDITIONS)}"
        )
    return Field.from_function(model.grid, fn)
