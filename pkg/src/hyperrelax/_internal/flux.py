"""Nonlinear fluxes and their energy-conservative split forms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hyperrelax.sbp import CirculantOperator
from hyperrelax.types import FloatArray, FluxKind


def split_quadratic(d1: CirculantOperator, u: FloatArray) -> FloatArray:
    """(1/3)(u D1 u + D1 u^2), the skew-symmetric form of d/dx (u^2/2)."""
    return (u * d1(u) + d1(u * u)) / 3.0


def split_cubic(d1: CirculantOperator, u: FloatArray) -> FloatArray:
    """(1/6)(u^2 D1 u + u D1 u^2 + D1 u^3), the conservative form of d/dx (u^3/3)."""
    u2 = u * u
    return (u2 * d1(u) + u * d1(u2) + d1(u2 * u)) / 6.0


@dataclass(frozen=True)
class Flux:
    """Flux f of the principal variable with its split-form divergence."""

    kind: FluxKind = FluxKind.QUADRATIC
    sigma: float = 1.0

    def value(self, u: FloatArray) -> FloatArray:
        if self.kind is FluxKind.NONE:
            return np.zeros_like(u)
        if self.kind is FluxKind.QUADRATIC:
            return 0.5 * u * u
        return 0.5 * self.sigma * u * u + u * u * u / 3.0

    def derivative(self, u: FloatArray) -> FloatArray:
        """f'(u)."""
        if self.kind is FluxKind.NONE:
            return np.zeros_like(u)
        if self.kind is FluxKind.QUADRATIC:
            return np.asarray(u, dtype=np.float64).copy()
        return self.sigma * u + u * u

    def derivative_increment(self, u: FloatArray, d: FloatArray) -> FloatArray:
        """f'(u + d) - f'(u) without cancellation."""
        if self.kind is FluxKind.NONE:
            return np.zeros_like(u)
        if self.kind is FluxKind.QUADRATIC:
            return np.asarray(d, dtype=np.float64).copy()
        return self.sigma * d + d * (2.0 * u + d)

    def divergence(self, d1: CirculantOperator, u: FloatArray) -> FloatArray:
        """Split-form approximation of d/dx f(u)."""
        if self.kind is FluxKind.NONE:
            return np.zeros_like(u)
        if self.kind is FluxKind.QUADRATIC:
            return split_quadratic(d1, u)
        return self.sigma * split_quadratic(d1, u) + split_cubic(d1, u)
