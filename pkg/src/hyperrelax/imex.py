"""Additive implicit-explicit Runge-Kutta time integration.

Stages of an IMEX scheme for dq/dt = E(q) + L(q) are

    Y_i = q + dt sum_{j<i} (Ae_ij E(Y_j) + Ai_ij L(Y_j)) + dt Ai_ii L(Y_i)

so each stage needs one solve of (I - dt Ai_ii L) Y_i = rhs. All implicit
operators in :mod:`hyperrelax.models` are linear and translation invariant,
which makes that solve a batch of small dense (m, m) systems after an FFT in x.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from hyperrelax._errors import (
    FieldCountError,
    InvalidParameterError,
    NonFiniteStateError,
    StageSolveError,
    TableauError,
    UnsupportedModelError,
)
from hyperrelax.grid import State, format_float, inner_values
from hyperrelax.models import ModelSpec, energy
from hyperrelax.relaxation import relaxation_gamma_values, weighted_invariant
from hyperrelax.types import FloatArray, RelaxationConfig, StepMode, StepperConfig, TimeLanding

logger = logging.getLogger(__name__)

Observer = Callable[[float, State], None]

MAX_LANDING_RETRIES = 8
MAX_LANDING_STEPS = 50
# Stiff decay check: dt*lam far out on the negative axis stands in for R(-inf)
STIFF_LAMBDA = -1e15
STIFF_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class IMEXTableau:
    """Pair of Butcher tableaus sharing the stage times ``c``."""

    name: str
    a_exp: FloatArray
    b_exp: FloatArray
    a_imp: FloatArray
    b_imp: FloatArray
    c: FloatArray

    def __post_init__(self) -> None:
        for attr in ("a_exp", "b_exp", "a_imp", "b_imp", "c"):
            object.__setattr__(self, attr, np.asarray(getattr(self, attr), dtype=np.float64))
        self.check()

    @property
    def stages(self) -> int:
        return int(self.c.size)

    def check(self, order: int = 3, tol: float = 1e-12) -> None:
        """Verify consistency, order and coupling conditions up to ``order``.

        Raises:
            TableauError: Shapes are inconsistent or a condition fails.
        """
        s = self.stages
        for attr in ("a_exp", "a_imp"):
            if getattr(self, attr).shape != (s, s):
                raise TableauError(f"{self.name}: {attr} must be {s}x{s}")
        for attr in ("b_exp", "b_imp"):
            if getattr(self, attr).shape != (s,):
                raise TableauError(f"{self.name}: {attr} must have {s} entries")
        if np.any(np.triu(self.a_exp) != 0.0):
            raise TableauError(f"{self.name}: explicit tableau is not strictly lower triangular")
        if np.any(np.triu(self.a_imp, 1) != 0.0):
            raise TableauError(f"{self.name}: implicit tableau is not lower triangular")

        c = self.c
        tableaus = {"explicit": (self.a_exp, self.b_exp), "implicit": (self.a_imp, self.b_imp)}
        conditions: list[tuple[str, float, float]] = []
        for label, (a, b) in tableaus.items():
            conditions.append((f"{label} row sums", float(np.max(np.abs(a.sum(axis=1) - c))), 0.0))
            conditions.append((f"{label} sum b", float(b.sum()), 1.0))
            if order >= 2:
                conditions.append((f"{label} sum b c", float(b @ c), 0.5))
            if order >= 3:
                conditions.append((f"{label} sum b c^2", float(b @ (c * c)), 1.0 / 3.0))
        if order >= 3:
            for lb, (_, b) in tableaus.items():
                for la, (a, _) in tableaus.items():
                    conditions.append((f"b_{lb} A_{la} c", float(b @ a @ c), 1.0 / 6.0))
        for label, value, expected in conditions:
            if abs(value - expected) > tol:
                raise TableauError(
                    f"{self.name}: {label} = {value!r}, expected {expected!r}"
                )


ARS443 = IMEXTableau(
    name="ARS(4,4,3)",
    a_exp=np.array(
        [
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [1 / 2, 0.0, 0.0, 0.0, 0.0],
            [11 / 18, 1 / 18, 0.0, 0.0, 0.0],
            [5 / 6, -5 / 6, 1 / 2, 0.0, 0.0],
            [1 / 4, 7 / 4, 3 / 4, -7 / 4, 0.0],
        ]
    ),
    b_exp=np.array([1 / 4, 7 / 4, 3 / 4, -7 / 4, 0.0]),
    a_imp=np.array(
        [
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1 / 2, 0.0, 0.0, 0.0],
            [0.0, 1 / 6, 1 / 2, 0.0, 0.0],
            [0.0, -1 / 2, 1 / 2, 1 / 2, 0.0],
            [0.0, 3 / 2, -3 / 2, 1 / 2, 1 / 2],
        ]
    ),
    b_imp=np.array([0.0, 3 / 2, -3 / 2, 1 / 2, 1 / 2]),
    c=np.array([0.0, 1 / 2, 2 / 3, 1 / 2, 1.0]),
)


class SplitSystem(Protocol):
    """Anything the IMEX stepper can advance."""

    def explicit(self, y: np.ndarray) -> np.ndarray: ...

    def implicit(self, y: np.ndarray) -> np.ndarray: ...

    def solve_stage(self, gamma: float, rhs: np.ndarray) -> np.ndarray: ...


class ScalarSplitSystem:
    """Linear test problem y' = lam_e y + lam_i y with complex rates."""

    def __init__(self, lam_e: complex, lam_i: complex) -> None:
        self.lam_e = lam_e
        self.lam_i = lam_i

    def explicit(self, y: np.ndarray) -> np.ndarray:
        return self.lam_e * y

    def implicit(self, y: np.ndarray) -> np.ndarray:
        return self.lam_i * y

    def solve_stage(self, gamma: float, rhs: np.ndarray) -> np.ndarray:
        denom = 1.0 - gamma * self.lam_i
        if denom == 0.0:
            raise StageSolveError(f"Singular scalar stage at gamma={gamma}", gamma, "scalar")
        return rhs / denom


class ModelSystem:
    """Split system of a model with exact block-circulant stage solves.

    The inverse symbols of (I - gamma L) are cached per ``gamma`` for the
    lifetime of the instance, so one instance should serve one run.
    """

    def __init__(self, model: ModelSpec, stage_tol: float = 1e-8) -> None:
        self.model = model
        self.stage_tol = stage_tol
        self._symbol: np.ndarray | None = None
        self._inverses: dict[float, np.ndarray] = {}

    def explicit(self, y: np.ndarray) -> np.ndarray:
        return self.model.explicit(y)

    def implicit(self, y: np.ndarray) -> np.ndarray:
        return self.model.implicit(y)

    @property
    def symbol(self) -> np.ndarray:
        """Fourier symbol of L, shape (n, m, m)."""
        if self._symbol is None:
            m, n = self.model.field_count, self.model.grid.n
            columns = []
            for j in range(m):
                impulse = np.zeros((m, n))
                impulse[j, 0] = 1.0
                columns.append(np.fft.fft(self.model.implicit(impulse), axis=-1))
            # columns[j][i, k] = L_hat[k, i, j]
            self._symbol = np.stack(columns, axis=-1).transpose(1, 0, 2)
        return self._symbol

    def _inverse(self, gamma: float) -> np.ndarray:
        inv = self._inverses.get(gamma)
        if inv is None:
            m = self.model.field_count
            matrices = np.eye(m)[np.newaxis, :, :] - gamma * self.symbol
            try:
                inv = np.linalg.inv(matrices)
            except np.linalg.LinAlgError as e:
                raise StageSolveError(
                    f"Singular stage matrix for {self.model.name} at dt*a_ii={gamma}",
                    gamma,
                    self.model.name,
                ) from e
            if not np.all(np.isfinite(inv)):
                raise StageSolveError(
                    f"Singular stage matrix for {self.model.name} at dt*a_ii={gamma}",
                    gamma,
                    self.model.name,
                )
            self._inverses[gamma] = inv
            logger.debug("Cached stage inverse for %s at gamma=%g", self.model.name, gamma)
        return inv

    def solve_stage(self, gamma: float, rhs: np.ndarray) -> np.ndarray:
        if gamma == 0.0:
            return np.array(rhs, dtype=np.float64)
        inv = self._inverse(gamma)
        rhs_hat = np.fft.fft(rhs, axis=-1)
        z = np.fft.ifft(np.einsum("kij,jk->ik", inv, rhs_hat), axis=-1).real
        residual = z - gamma * self.model.implicit(z) - rhs
        scale = max(float(np.linalg.norm(rhs)), np.finfo(np.float64).tiny)
        if float(np.linalg.norm(residual)) > self.stage_tol * scale:
            logger.warning(
                "Stage residual %.3e exceeds tolerance for %s (gamma=%g)",
                float(np.linalg.norm(residual)) / scale,
                self.model.name,
                gamma,
            )
        return z


def solve_stage(
    model: ModelSpec, a_ii: float, dt: float, rhs: State, stage_tol: float = 1e-8
) -> State:
    """Solve z - dt a_ii L(z) = rhs exactly.

    Raises:
        StageSolveError: The stage matrix is singular.
    """
    model.grid.require_same(rhs.grid)
    return rhs.with_data(ModelSystem(model, stage_tol).solve_stage(dt * a_ii, rhs.data))


def step_arrays(
    system: SplitSystem,
    y: np.ndarray,
    dt: float,
    mode: StepMode = StepMode.IMEX,
    tableau: IMEXTableau = ARS443,
) -> np.ndarray:
    """One additive Runge-Kutta step on raw arrays."""
    s = tableau.stages
    if mode is StepMode.EXPLICIT_ONLY:
        rates: list[np.ndarray] = []
        for i in range(s):
            stage = y + dt * sum((tableau.a_exp[i, j] * rates[j] for j in range(i)), 0.0 * y)
            rates.append(system.explicit(stage) + system.implicit(stage))
        return y + dt * sum((b * k for b, k in zip(tableau.b_exp, rates)), 0.0 * y)

    explicit_rates: list[np.ndarray] = []
    implicit_rates: list[np.ndarray] = []
    for i in range(s):
        rhs = y.copy()
        for j in range(i):
            rhs = rhs + dt * (
                tableau.a_exp[i, j] * explicit_rates[j] + tableau.a_imp[i, j] * implicit_rates[j]
            )
        a_ii = tableau.a_imp[i, i]
        stage = system.solve_stage(dt * a_ii, rhs) if a_ii != 0.0 else rhs
        explicit_rates.append(system.explicit(stage))
        implicit_rates.append(system.implicit(stage))
    out = y.copy()
    for j in range(s):
        out = out + dt * (
            tableau.b_exp[j] * explicit_rates[j] + tableau.b_imp[j] * implicit_rates[j]
        )
    return out


def imex_step(
    model: ModelSpec,
    q: State,
    cfg: StepperConfig,
    system: ModelSystem | None = None,
    tableau: IMEXTableau = ARS443,
) -> State:
    """Advance ``q`` by one step of size ``cfg.dt``."""
    model.grid.require_same(q.grid)
    system = system or ModelSystem(model, cfg.stage_tol)
    return q.with_data(step_arrays(system, q.data, cfg.dt, cfg.mode, tableau))


@dataclass
class TimeSeries:
    """Diagnostics recorded along an integration."""

    model_name: str
    field_count: int
    times: list[float] = field(default_factory=list)
    masses: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    norms: list[tuple[float, ...]] = field(default_factory=list)
    # Filled only when relaxation is on
    gammas: list[float] = field(default_factory=list)
    invariants: list[float] = field(default_factory=list)
    snapshots: dict[float, State] = field(default_factory=dict)
    final_state: State | None = None
    steps: int = 0

    @property
    def final_time(self) -> float:
        return self.times[-1] if self.times else 0.0

    def record(
        self, model: ModelSpec, t: float, q: State, gamma: float | None, invariant: float | None
    ) -> None:
        h = q.grid.h
        self.times.append(t)
        self.masses.append(float(h * np.sum(q.data[0])))
        self.energies.append(energy(model, q))
        self.norms.append(tuple(math.sqrt(inner_values(h, row, row)) for row in q.data))
        if gamma is not None and invariant is not None:
            self.gammas.append(gamma)
            self.invariants.append(invariant)

    def to_csv(self) -> str:
        """CSV with columns t, mass, energy, norm_q0.. (and gamma, invariant)."""
        relaxed = bool(self.gammas)
        header = ["t", "mass", "energy", *(f"norm_q{j}" for j in range(self.field_count))]
        if relaxed:
            header += ["gamma", "invariant"]
        lines = [",".join(header)]
        for i, t in enumerate(self.times):
            row = [t, self.masses[i], self.energies[i], *self.norms[i]]
            if relaxed:
                row += [self.gammas[i], self.invariants[i]]
            lines.append(",".join(format_float(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def _check_finite(y: np.ndarray, t: float, model: ModelSpec) -> None:
    if not np.all(np.isfinite(y)):
        raise NonFiniteStateError(f"{model.name} produced a non-finite state at t={t!r}", time=t)


def integrate(
    model: ModelSpec,
    q0: State,
    t_final: float,
    cfg: StepperConfig,
    observers: Sequence[Observer] = (),
    relaxation: RelaxationConfig | None = None,
    snapshot_times: Sequence[float] = (),
    tableau: IMEXTableau = ARS443,
) -> TimeSeries:
    """Integrate ``q0`` from t = 0 to ``t_final``.

    Without relaxation the final step is shortened to land exactly on
    ``t_final``. With relaxation each accepted step advances time by
    gamma * dt and the landing policy in ``relaxation.landing`` applies.

    Args:
        model: Model to integrate.
        q0: Initial state on the model grid.
        t_final: Final time, positive.
        cfg: Step size, mode, stage tolerance and recording stride.
        observers: Called as ``observer(t, state)`` after every accepted step.
        relaxation: Relaxation options; ``None`` or ``enabled=False`` disables it.
        snapshot_times: Times at which to keep a copy of the state (the first
            accepted step at or after each time is stored).

    Returns:
        TimeSeries with diagnostics, snapshots and the final state.

    Raises:
        InvalidParameterError: ``t_final`` is not positive.
        FieldCountError: Relaxation weights do not match the model.
        NonFiniteStateError: The state blew up or a relaxation factor was not
            positive and finite; ``time`` holds the step time.
        StageSolveError: An implicit stage is singular.
    """
    if not t_final > 0.0:
        raise InvalidParameterError(f"t_final must be positive, got {t_final}")
    model.grid.require_same(q0.grid)
    relax = relaxation if (relaxation is not None and relaxation.enabled) else None
    if relax is not None and model.metric is not None:
        raise UnsupportedModelError(
            f"{model.name} has a non-diagonal energy; relaxation is unavailable"
        )
    if relax is not None and len(relax.weights) != model.field_count:
        raise FieldCountError(
            f"Relaxation weights {relax.weights} do not match {model.field_count} fields",
            expected=model.field_count,
            actual=len(relax.weights),
        )

    system = ModelSystem(model, cfg.stage_tol)
    series = TimeSeries(model.name, model.field_count)
    pending = sorted(snapshot_times)
    h = model.grid.h
    y = np.array(q0.data, dtype=np.float64)
    t = 0.0
    weights = np.asarray(relax.weights) if relax is not None else None
    invariant0 = weighted_invariant(h, y, weights) if weights is not None else None
    series.record(model, t, q0, 1.0 if relax else None, invariant0)
    logger.info(
        "Integrating %s to T=%g with dt=%g (%s%s)",
        model.name,
        t_final,
        cfg.dt,
        cfg.mode.value,
        ", relaxation" if relax else "",
    )

    def accept(y_new: np.ndarray, t_new: float, gamma: float | None, last: bool) -> None:
        series.steps += 1
        state = State(model.grid, y_new)
        for observer in observers:
            observer(t_new, state)
        while pending and t_new >= pending[0] - 1e-12:
            series.snapshots[pending.pop(0)] = state
        if last or series.steps % cfg.record_every == 0:
            invariant = weighted_invariant(h, y_new, weights) if weights is not None else None
            series.record(model, t_new, state, gamma, invariant)
        if last:
            series.final_state = state

    if relax is None:
        steps = max(1, math.ceil(t_final / cfg.dt - 1e-9))
        for k in range(1, steps + 1):
            dt = cfg.dt if k < steps else t_final - (steps - 1) * cfg.dt
            y = step_arrays(system, y, dt, cfg.mode, tableau)
            t = t_final if k == steps else k * cfg.dt
            _check_finite(y, t, model)
            accept(y, t, None, k == steps)
    else:
        assert weights is not None
        y, t = _integrate_relaxed(system, model, y, t_final, cfg, relax, weights, tableau, accept)

    if series.final_state is None:
        series.final_state = State(model.grid, y)
    logger.info("Finished %s: %d steps, t=%.17g", model.name, series.steps, series.final_time)
    return series


def _integrate_relaxed(
    system: ModelSystem,
    model: ModelSpec,
    y: np.ndarray,
    t_final: float,
    cfg: StepperConfig,
    relax: RelaxationConfig,
    weights: np.ndarray,
    tableau: IMEXTableau,
    accept: Callable[[np.ndarray, float, float | None, bool], None],
) -> tuple[np.ndarray, float]:
    h = model.grid.h
    tol = relax.landing_tol * max(1.0, abs(t_final))
    t = 0.0
    extra = 0
    while t_final - t > tol:
        remaining = t_final - t
        final_attempt = cfg.dt >= remaining
        dt = min(cfg.dt, remaining)
        for _ in range(MAX_LANDING_RETRIES):
            y_new = step_arrays(system, y, dt, cfg.mode, tableau)
            _check_finite(y_new, t + dt, model)
            gamma = relaxation_gamma_values(h, y, y_new, weights, relax.gamma_floor)
            if not (gamma > 0.0 and math.isfinite(gamma)):
                raise NonFiniteStateError(
                    f"{model.name} relaxation gave gamma={gamma!r} at t={t!r}", time=t
                )
            advance = gamma * dt
            if advance <= remaining + tol or relax.landing is TimeLanding.ACCEPT_NEAR_T:
                break
            dt *= remaining / advance
        else:
            logger.warning(
                "Relaxed step of %s overshoots T by %.3e after %d retries",
                model.name,
                advance - remaining,
                MAX_LANDING_RETRIES,
            )
        y = y + gamma * (y_new - y)
        t_new = t + advance
        if abs(t_final - t_new) <= tol:
            t_new = t_final
        done = t_new >= t_final - tol
        if relax.landing is TimeLanding.ACCEPT_NEAR_T and final_attempt:
            done = True
        if final_attempt and not done:
            extra += 1
            if extra > MAX_LANDING_STEPS:
                logger.warning("Relaxed run of %s stopped at t=%.17g short of T", model.name, t_new)
                done = True
        logger.debug("t=%.17g gamma=%.17g", t_new, gamma)
        accept(y, t_new, gamma, done)
        t = t_new
        if done:
            break
    return y, t


@dataclass(frozen=True)
class ImexAudit:
    """Temporal order and stiff damping of a tableau on scalar test problems."""

    tableau: str
    step_sizes: tuple[float, ...]
    errors: tuple[float, ...]
    observed_order: float
    stiff_amplification: float
    passed: bool

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        lines = [f"{self.tableau}: {status}"]
        for dt, err in zip(self.step_sizes, self.errors):
            lines.append(f"  dt {dt:<8g} error {err:.3e}")
        lines.append(f"  observed order             {self.observed_order:.3f}")
        lines.append(f"  |R| at dt*lam = {STIFF_LAMBDA:g}      {self.stiff_amplification:.3e}")
        return "\n".join(lines)


def audit_tableau(
    tableau: IMEXTableau = ARS443,
    lam_e: complex = 1j,
    lam_i: complex = -10.0,
    step_sizes: Sequence[float] = (0.02, 0.01, 0.005, 0.0025),
    t_final: float = 1.0,
) -> ImexAudit:
    """Refinement study on y' = lam_e y + lam_i y and a stiff decay check."""
    system = ScalarSplitSystem(lam_e, lam_i)
    exact = np.exp((lam_e + lam_i) * t_final)
    errors = []
    for dt in step_sizes:
        y = np.array([1.0 + 0.0j])
        for _ in range(round(t_final / dt)):
            y = step_arrays(system, y, dt, StepMode.IMEX, tableau)
        errors.append(float(abs(y[0] - exact)))
    slope, _ = np.polyfit(np.log(step_sizes), np.log(errors), 1)

    stiff = ScalarSplitSystem(0.0, STIFF_LAMBDA)
    y1 = step_arrays(stiff, np.array([1.0 + 0.0j]), 1.0, StepMode.IMEX, tableau)
    amplification = float(abs(y1[0]))
    passed = 2.7 <= slope <= 3.3 and amplification <= STIFF_TOL
    return ImexAudit(
        tableau.name, tuple(step_sizes), tuple(errors), float(slope), amplification, passed
    )
