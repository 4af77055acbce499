"""tau-convergence and error-growth studies.

Every hyperbolization run is an independent job executed in a worker thread
under a shared :class:`anyio.CapacityLimiter`. A single collector keeps the
results in tau order, so identical configurations produce identical output.
"""

from __future__ import annotations

import logging
import math
import os
import time
from dataclasses import replace
from functools import partial
from typing import Any

import anyio
import numpy as np
from anyio import to_thread

from hyperrelax._errors import ConfigError, NonFiniteStateError
from hyperrelax._internal.expressions import compile_expression
from hyperrelax._internal.fitting import loglog_slope
from hyperrelax.grid import Field, Grid, State, inner_values, make_grid
from hyperrelax.imex import TimeSeries, integrate
from hyperrelax.models import (
    INITIAL_CONDITIONS,
    ExactSolution,
    ModelSpec,
    build_model,
    exact_solution_of,
    init_hyperbolic,
    initial_field,
    traversal_time,
)
from hyperrelax.relaxation import relaxation_config
from hyperrelax.types import (
    ConvergenceRow,
    FloatArray,
    GrowthReport,
    GrowthSeries,
    ReferenceKind,
    StepperConfig,
    StudyConfig,
    StudyResult,
)

logger = logging.getLogger(__name__)

THREADS_ENV = "HYPERRELAX_THREADS"


def default_limiter() -> anyio.CapacityLimiter:
    """Job pool capped by ``HYPERRELAX_THREADS`` (default: CPU count).

    Must be called from inside the event loop.
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return anyio.CapacityLimiter(os.cpu_count() or 1)
    try:
        tokens = int(raw)
    except ValueError:
        tokens = 0
    if tokens < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return anyio.CapacityLimiter(tokens)


# Study setup


def study_grid(cfg: StudyConfig) -> Grid:
    return make_grid(cfg.left, cfg.right, cfg.n)


def build_study_model(
    cfg: StudyConfig, name: str, grid: Grid, tau: float | None = None
) -> ModelSpec:
    """Build ``name`` with the study's operator order and parameter overrides."""
    overrides: dict[str, Any] = dict(cfg.model_overrides)
    if tau is not None:
        overrides["tau"] = tau
    return build_model(name, grid, cfg.order, **overrides)


def resolve_final_time(cfg: StudyConfig, model: ModelSpec) -> float:
    if cfg.t_final is not None:
        return cfg.t_final
    assert cfg.traversals is not None
    return cfg.traversals * traversal_time(model)


def resolve_initial_condition(cfg: StudyConfig, model: ModelSpec) -> Field:
    """Registered initial condition, ``exact``, or a whitelisted expression in ``x``."""
    name = cfg.initial_condition
    if name == "exact" or name in INITIAL_CONDITIONS:
        return initial_field(model, name)
    return Field.from_function(model.grid, compile_expression(name))


def stepper_config(cfg: StudyConfig, model: ModelSpec) -> StepperConfig:
    return StepperConfig(dt=cfg.dt, mode=cfg.mode or model.mode)


def _check_pair(cfg: StudyConfig, limit: ModelSpec, hyper: ModelSpec) -> None:
    if limit.hyperbolic:
        raise ConfigError(f"{limit.name} is a hyperbolization, expected a limit model")
    if not hyper.hyperbolic:
        raise ConfigError(f"{hyper.name} is not a hyperbolization")
    if hyper.limit_name != limit.name:
        logger.warning(
            "%s is the hyperbolization of %s, not of %s", hyper.name, hyper.limit_name, limit.name
        )
    if cfg.reference is ReferenceKind.EXACT and limit.exact is None:
        raise ConfigError(f"reference = exact needs an exact solution; {limit.name} has none")


# tau convergence


def reference_solution(
    cfg: StudyConfig, limit: ModelSpec, u0: Field, t_final: float
) -> FloatArray:
    """Principal variable of the reference at ``t_final`` (read-only array)."""
    if cfg.reference is ReferenceKind.EXACT:
        values = exact_solution_of(limit).sample(limit.grid, t_final)
    else:
        series = integrate(limit, init_hyperbolic(limit, u0), t_final, stepper_config(cfg, limit))
        assert series.final_state is not None
        values = np.array(series.final_state.data[0])
    values.setflags(write=False)
    return values


def _l2_distance(h: float, a: FloatArray, b: FloatArray) -> float:
    diff = a - b
    return math.sqrt(inner_values(h, diff, diff))


def run_tau_job(
    cfg: StudyConfig,
    grid: Grid,
    tau: float,
    u0: FloatArray,
    reference: FloatArray,
    t_final: float,
) -> ConvergenceRow:
    """Integrate the hyperbolization at one tau and measure every component.

    Auxiliary components are compared with the model's initializer applied to
    the reference, i.e. the derivative pattern the lifted state converges to.
    """
    model = build_study_model(cfg, cfg.hyper_model, grid, tau)
    q0 = init_hyperbolic(model, Field(grid, u0))
    relax = relaxation_config(model, landing=cfg.landing) if cfg.relaxation else None
    try:
        series = integrate(model, q0, t_final, stepper_config(cfg, model), relaxation=relax)
    except NonFiniteStateError as e:
        logger.warning("%s with tau=%g diverged at t=%s", model.name, tau, e.time)
        return ConvergenceRow(tau, (math.nan,) * model.field_count, diverged=True)
    assert series.final_state is not None
    target = model.initializer(reference)
    final = series.final_state.data
    errors = tuple(_l2_distance(grid.h, final[j], target[j]) for j in range(model.field_count))
    logger.info("%s tau=%g: errors %s", model.name, tau, ", ".join(f"{e:.3e}" for e in errors))
    return ConvergenceRow(tau, errors)


def mark_fit_rows(rows: list[ConvergenceRow], floor_threshold: float) -> None:
    """Flag the rows entering the slope fit.

    Rows are visited in decreasing tau. A row enters only if its q0 error
    improves on the last accepted row by at least ``floor_threshold``;
    the first row that does not marks the floor and every later row is
    excluded too. Diverged rows never enter.
    """
    previous: float | None = None
    floor = False
    for row in rows:
        row.in_fit = False
        if row.diverged:
            continue
        if floor:
            logger.warning("tau=%g is below the error floor; excluded from the fit", row.tau)
            continue
        error = row.errors[0]
        if previous is not None and not error <= (1.0 - floor_threshold) * previous:
            floor = True
            logger.warning(
                "Error floor reached at tau=%g (%.3e vs %.3e); excluded from the fit",
                row.tau,
                error,
                previous,
            )
            continue
        row.in_fit = True
        previous = error


def fit_slopes(rows: list[ConvergenceRow]) -> tuple[float | None, ...]:
    if not rows:
        return ()
    fit = [r for r in rows if r.in_fit]
    taus = [r.tau for r in fit]
    return tuple(
        loglog_slope(taus, [r.errors[j] for r in fit]) for j in range(len(rows[0].errors))
    )


async def converge_tau(
    cfg: StudyConfig, limiter: anyio.CapacityLimiter | None = None
) -> StudyResult:
    """Convergence of the hyperbolization to its limit as tau decreases.

    The reference is computed once and shared read-only by every tau job.

    Args:
        cfg: Study configuration.
        limiter: Job pool; defaults to :func:`default_limiter`.

    Returns:
        StudyResult with one row per tau (in ``cfg.tau_list`` order) and
        least-squares slopes per component over the pre-floor rows.

    Raises:
        ConfigError: The model pair or reference mode is inconsistent.
        UnknownModelError: A model name is not registered.
        StageSolveError: An implicit stage is singular.

    Example:
        ```python
        result = anyio.run(converge_tau, preset("ks"))
        print(result.slopes)
        ```
    """
    started = time.perf_counter()
    limiter = limiter or default_limiter()
    grid = study_grid(cfg)
    limit = build_study_model(cfg, cfg.limit_model, grid)
    _check_pair(cfg, limit, build_study_model(cfg, cfg.hyper_model, grid, cfg.tau_list[0]))
    t_final = resolve_final_time(cfg, limit)
    u0 = resolve_initial_condition(cfg, limit).values
    reference = await to_thread.run_sync(
        reference_solution, cfg, limit, Field(grid, u0), t_final, limiter=limiter
    )

    rows: list[ConvergenceRow | None] = [None] * len(cfg.tau_list)

    async def job(index: int, tau: float) -> None:
        rows[index] = await to_thread.run_sync(
            partial(run_tau_job, cfg, grid, tau, u0, reference, t_final), limiter=limiter
        )

    async with anyio.create_task_group() as tg:
        for index, tau in enumerate(cfg.tau_list):
            tg.start_soon(job, index, tau)

    collected = [row for row in rows if row is not None]
    mark_fit_rows(collected, cfg.floor_threshold)
    return StudyResult(
        rows=collected,
        slopes=fit_slopes(collected),
        final_time=t_final,
        runtime_seconds=time.perf_counter() - started,
        metadata={"limit": limit.name, "hyper": cfg.hyper_model, "n": cfg.n, "dt": cfg.dt},
    )


# Error growth


def growth_exponent(times: list[float], errors: list[float], window_start: float) -> float | None:
    """Slope of log error against log t over ``t >= window_start``."""
    pairs = [(t, e) for t, e in zip(times, errors) if t >= window_start]
    return loglog_slope([p[0] for p in pairs], [p[1] for p in pairs])


def _series_label(tau: float | None, relaxation: bool) -> str:
    base = "limit" if tau is None else f"tau={tau:g}"
    return f"{base} relaxed" if relaxation else base


def run_growth_job(
    cfg: StudyConfig,
    grid: Grid,
    tau: float | None,
    relaxation: bool,
    u0: FloatArray,
    exact: ExactSolution,
    t_final: float,
    window_start: float,
) -> GrowthSeries:
    """One solitary-wave run, sampled ``cfg.samples`` times against the exact solution."""
    name = cfg.limit_model if tau is None else cfg.hyper_model
    model = build_study_model(cfg, name, grid, tau)
    q0 = init_hyperbolic(model, Field(grid, u0))
    relax = relaxation_config(model, landing=cfg.landing) if relaxation else None
    pending = [t_final * (k + 1) / cfg.samples for k in range(cfg.samples)]
    times: list[float] = []
    errors: list[float] = []
    steps: list[int] = []
    counter = 0

    def observe(t: float, state: State) -> None:
        nonlocal counter
        counter += 1
        if not pending or t < pending[0] - 1e-12:
            return
        while pending and t >= pending[0] - 1e-12:
            pending.pop(0)
        times.append(t)
        errors.append(_l2_distance(grid.h, state.data[0], exact.sample(grid, t)))
        steps.append(counter)

    label = _series_label(tau, relaxation)
    series: TimeSeries | None = None
    try:
        series = integrate(
            model, q0, t_final, stepper_config(cfg, model), observers=[observe], relaxation=relax
        )
    except NonFiniteStateError as e:
        logger.warning("%s diverged at t=%s", label, e.time)
    gammas = (
        [series.gammas[k] for k in steps]
        if series is not None and series.gammas
        else [1.0] * len(times)
    )
    exponent = growth_exponent(times, errors, window_start) if series is not None else None
    logger.info("%s: growth exponent %s", label, "n/a" if exponent is None else f"{exponent:.3f}")
    return GrowthSeries(label, tau, relaxation, times, errors, gammas, exponent)


async def error_growth(
    cfg: StudyConfig, limiter: anyio.CapacityLimiter | None = None
) -> GrowthReport:
    """Error growth of solitary-wave runs with relaxation off and on.

    Runs the limit model and the hyperbolization at every tau in
    ``cfg.tau_list``, each twice. Exponents are fitted over
    t >= max(first traversal, T/2), skipping the startup transient.

    Raises:
        ConfigError: The limit model has no travelling exact solution.
    """
    started = time.perf_counter()
    limiter = limiter or default_limiter()
    grid = study_grid(cfg)
    limit = build_study_model(cfg, cfg.limit_model, grid)
    if limit.exact is None or limit.exact.speed == 0.0:
        raise ConfigError(f"error growth needs a travelling exact solution; {limit.name} has none")
    exact = limit.exact
    t_final = resolve_final_time(cfg, limit)
    window_start = max(traversal_time(limit), 0.5 * t_final)
    u0 = resolve_initial_condition(cfg, limit).values

    jobs: list[tuple[float | None, bool]] = [(None, False), (None, True)]
    jobs += [(tau, relaxed) for tau in cfg.tau_list for relaxed in (False, True)]
    results: list[GrowthSeries | None] = [None] * len(jobs)

    async def job(index: int, tau: float | None, relaxed: bool) -> None:
        results[index] = await to_thread.run_sync(
            partial(run_growth_job, cfg, grid, tau, relaxed, u0, exact, t_final, window_start),
            limiter=limiter,
        )

    async with anyio.create_task_group() as tg:
        for index, (tau, relaxed) in enumerate(jobs):
            tg.start_soon(job, index, tau, relaxed)

    return GrowthReport(
        series=[s for s in results if s is not None],
        final_time=t_final,
        runtime_seconds=time.perf_counter() - started,
    )


# Single runs


def run_simulation(
    cfg: StudyConfig,
    model_name: str | None = None,
    tau: float | None = None,
    record_every: int | None = None,
) -> tuple[ModelSpec, TimeSeries]:
    """Integrate one model from the study's initial condition to its final time.

    ``model_name`` defaults to the study's hyperbolization, run at ``tau`` (or
    the first entry of ``tau_list``).
    """
    grid = study_grid(cfg)
    name = model_name or cfg.hyper_model
    probe = build_study_model(cfg, name, grid)
    model = (
        build_study_model(cfg, name, grid, tau if tau is not None else cfg.tau_list[0])
        if probe.hyperbolic
        else probe
    )
    t_final = resolve_final_time(cfg, model)
    q0 = init_hyperbolic(model, resolve_initial_condition(cfg, model))
    relax = relaxation_config(model, landing=cfg.landing) if cfg.relaxation else None
    step = stepper_config(cfg, model)
    if record_every is not None:
        step = replace(step, record_every=record_every)
    return model, integrate(model, q0, t_final, step, relaxation=relax)


# Presets

_PUBLISHED: dict[str, dict[str, Any]] = {
    "bbm": dict(
        limit_model="bbm_limit", hyper_model="bbm_hyper", left=-50.0, right=150.0, n=1024,
        order=7, dt=0.1, t_final=100.0, initial_condition="bbm_gaussian",
    ),
    "kdv": dict(
        limit_model="kdv_limit", hyper_model="kdv_hyper", left=-50.0, right=150.0, n=1024,
        order=7, dt=0.05, t_final=100.0, initial_condition="bbm_gaussian",
    ),
    "kdvb": dict(
        limit_model="kdvb_limit", hyper_model="kdvb_hyper", left=-150.0, right=200.0, n=1024,
        order=7, dt=0.1, t_final=100.0, initial_condition="kdvb_front",
        model_overrides={"mu": 0.1},
    ),
    "gardner": dict(
        limit_model="gardner_limit", hyper_model="gardner_hyper", left=-50.0, right=50.0, n=512,
        order=7, dt=0.01, traversals=1.0, initial_condition="exact",
    ),
    "kawahara": dict(
        limit_model="kawahara_limit", hyper_model="kawahara_hyper", left=-70.0, right=70.0,
        n=128, order=3, dt=0.1, traversals=1.0, initial_condition="exact",
    ),
    "gen_kawahara": dict(
        limit_model="gen_kawahara_limit", hyper_model="gen_kawahara_hyper", left=-70.0,
        right=70.0, n=128, order=7, dt=0.1, traversals=1.0, initial_condition="exact",
    ),
    "biharmonic": dict(
        limit_model="biharmonic_limit", hyper_model="biharmonic_hyper", left=0.0,
        right=2.0 * math.pi, n=32, order=3, dt=0.01, t_final=1.0, initial_condition="exact",
    ),
    "ks": dict(
        limit_model="ks_limit", hyper_model="ks_hyper", left=-50.0, right=50.0, n=256,
        order=7, dt=0.1, t_final=20.0, initial_condition="ks_gaussian",
    ),
    "growth": dict(
        limit_model="gen_kawahara_limit", hyper_model="gen_kawahara_hyper", left=-70.0,
        right=70.0, n=512, order=7, dt=0.1, traversals=10.0, initial_condition="exact",
        tau_list=(1e-2, 1e-3, 1e-4), samples=100,
    ),
}

# Reductions keeping each study within a few minutes on a laptop
_DESK: dict[str, dict[str, Any]] = {
    "bbm": dict(n=512, t_final=20.0),
    "kdv": dict(n=512, t_final=20.0),
    "kdvb": dict(n=512, t_final=20.0),
    "gardner": dict(n=256, dt=0.05, traversals=None, t_final=16.0),
    "kawahara": dict(traversals=None, t_final=20.0),
    "gen_kawahara": dict(traversals=None, t_final=20.0),
    "biharmonic": {},
    "ks": {},
    "growth": dict(traversals=3.0, tau_list=(1e-4,), samples=40),
}

PRESETS = tuple(sorted(_PUBLISHED))


def preset(name: str, published: bool = False) -> StudyConfig:
    """Built-in study configuration reproducing one published experiment.

    Args:
        name: One of :data:`PRESETS`.
        published: Use the published grid and final time instead of the
            reduced desk-scale settings.

    Raises:
        ConfigError: Unknown preset name.
    """
    if name not in _PUBLISHED:
        raise ConfigError(f"Unknown preset {name!r}; available: {', '.join(PRESETS)}")
    values = dict(_PUBLISHED[name])
    if not published:
        values.update(_DESK[name])
    values["name"] = name
    return StudyConfig(**values)
