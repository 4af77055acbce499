"""Relaxation in time for a weighted quadratic invariant.

A step q_old -> q_new is replaced by q_old + gamma (q_new - q_old) with gamma
chosen so that I(q) = 1/2 sum_j w_j ||q_j||^2 is unchanged. Time then advances
by gamma * dt instead of dt.
"""

from __future__ import annotations

import logging

import numpy as np

from hyperrelax._errors import FieldCountError, UnsupportedModelError
from hyperrelax.grid import State
from hyperrelax.models import ModelSpec
from hyperrelax.types import FloatArray, RelaxationConfig, TimeLanding

logger = logging.getLogger(__name__)


def weighted_inner(h: float, a: FloatArray, b: FloatArray, weights: FloatArray) -> float:
    """sum_j w_j h sum_i a_ji b_ji on (m, n) arrays."""
    return float(h * np.sum(np.asarray(weights)[:, np.newaxis] * a * b))


def weighted_invariant(h: float, q: FloatArray, weights: FloatArray) -> float:
    return 0.5 * weighted_inner(h, q, q, weights)


def relaxation_gamma_values(
    h: float,
    q_old: FloatArray,
    q_new: FloatArray,
    weights: FloatArray,
    gamma_floor: float = 1e-14,
) -> float:
    """Nonzero root of I(q_old + gamma d) = I(q_old) on raw arrays."""
    d = q_new - q_old
    dd = weighted_inner(h, d, d, weights)
    if dd <= gamma_floor * weighted_inner(h, q_old, q_old, weights):
        return 1.0
    return -2.0 * weighted_inner(h, q_old, d, weights) / dd


def relaxation_gamma(
    q_old: State, q_new: State, weights: tuple[float, ...], gamma_floor: float = 1e-14
) -> float:
    """Relaxation parameter for the step ``q_old -> q_new``.

    Returns 1 when the step direction is negligible relative to the state
    (``<d, d>_W <= gamma_floor <q_old, q_old>_W``).
    """
    q_old.grid.require_same(q_new.grid)
    if len(weights) != q_old.m or q_new.m != q_old.m:
        raise FieldCountError(
            f"{len(weights)} weights for states with {q_old.m} and {q_new.m} fields",
            expected=q_old.m,
            actual=len(weights),
        )
    return relaxation_gamma_values(
        q_old.grid.h, q_old.data, q_new.data, np.asarray(weights), gamma_floor
    )


def relaxed_update(
    q_old: State, q_new: State, t: float, dt: float, cfg: RelaxationConfig
) -> tuple[State, float]:
    """Relaxed state and time ``(q_old + gamma d, t + gamma dt)``.

    With ``cfg.enabled`` false the plain step ``(q_new, t + dt)`` is returned.
    """
    if not cfg.enabled:
        return q_new, t + dt
    gamma = relaxation_gamma(q_old, q_new, cfg.weights, cfg.gamma_floor)
    if gamma == 1.0:
        return q_new, t + dt
    return q_old.with_data(q_old.data + gamma * (q_new.data - q_old.data)), t + gamma * dt


def relaxation_config(
    model: ModelSpec,
    enabled: bool = True,
    landing: TimeLanding = TimeLanding.LAND_ON_T,
    gamma_floor: float = 1e-14,
) -> RelaxationConfig:
    """Relaxation options conserving the energy of ``model``.

    Raises:
        UnsupportedModelError: The model energy is not a diagonal quadratic form.
    """
    if model.metric is not None:
        raise UnsupportedModelError(
            f"{model.name} has a non-diagonal energy; relaxation is unavailable"
        )
    return RelaxationConfig(
        weights=model.energy_weights, gamma_floor=gamma_floor, enabled=enabled, landing=landing
    )
