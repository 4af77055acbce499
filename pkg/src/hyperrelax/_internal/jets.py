"""Truncated bivariate Taylor jets for exact space-time derivatives.

A :class:`Jet` stores the Taylor coefficients of a function of (t, x) around a
batch of expansion points, up to total degree ``order``. Arithmetic and the
elementary functions below propagate the coefficients exactly (up to
roundoff), so mixed partials come out without finite-difference error:

    d^a/dt^a d^b/dx^b f = a! b! coeffs[a, b]

The module-level functions accept plain numpy arrays too, so closed-form
solutions can be written once and evaluated either way.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import Any, Union

import numpy as np

from hyperrelax._errors import UnsupportedProfileError

Scalar = Union[float, np.ndarray]


class Jet:
    """Taylor polynomial in (dt, dx), truncated at total degree ``order``."""

    __slots__ = ("coeffs", "order")
    __array_ufunc__ = None

    def __init__(self, coeffs: np.ndarray, order: int) -> None:
        self.coeffs = coeffs
        self.order = order

    @classmethod
    def constant(cls, value: Scalar, order: int) -> Jet:
        value = np.asarray(value, dtype=np.float64)
        coeffs = np.zeros((order + 1, order + 1, *value.shape))
        coeffs[0, 0] = value
        return cls(coeffs, order)

    @classmethod
    def variable(cls, value: Scalar, axis: int, order: int) -> Jet:
        """Seed for t (axis 0) or x (axis 1)."""
        jet = cls.constant(value, order)
        if order >= 1:
            if axis == 0:
                jet.coeffs[1, 0] = 1.0
            else:
                jet.coeffs[0, 1] = 1.0
        return jet

    @property
    def value(self) -> np.ndarray:
        return np.asarray(self.coeffs[0, 0])

    def derivative(self, a: int, b: int) -> np.ndarray:
        if a < 0 or b < 0 or a + b > self.order:
            raise UnsupportedProfileError(
                f"Derivative ({a}, {b}) is outside the jet order {self.order}"
            )
        return math.factorial(a) * math.factorial(b) * np.asarray(self.coeffs[a, b])

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return tuple(self.coeffs.shape[2:])

    def _coerce(self, other: Jet | Scalar) -> Jet:
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError(f"Jet order mismatch: {self.order} vs {other.order}")
            return other
        return Jet.constant(other, self.order)

    def __add__(self, other: Jet | Scalar) -> Jet:
        a, b = _aligned(self.coeffs, self._coerce(other).coeffs)
        return Jet(a + b, self.order)

    __radd__ = __add__

    def __neg__(self) -> Jet:
        return Jet(-self.coeffs, self.order)

    def __sub__(self, other: Jet | Scalar) -> Jet:
        return self + (-self._coerce(other))

    def __rsub__(self, other: Jet | Scalar) -> Jet:
        return self._coerce(other) - self

    def __mul__(self, other: Jet | Scalar) -> Jet:
        if not isinstance(other, Jet):
            a, b = _aligned(self.coeffs, _lifted(other))
            return Jet(a * b, self.order)
        lhs, rhs = _aligned(self.coeffs, self._coerce(other).coeffs)
        k = self.order
        out = np.zeros((k + 1, k + 1, *np.broadcast_shapes(lhs.shape[2:], rhs.shape[2:])))
        for p in range(k + 1):
            for q in range(k + 1 - p):
                a = lhs[p, q]
                if not np.any(a):
                    continue
                out[p:, q:] += a[np.newaxis, np.newaxis] * rhs[: k + 1 - p, : k + 1 - q]
        return Jet(out * _triangle(k, out.ndim - 2), k)

    __rmul__ = __mul__

    def __truediv__(self, other: Jet | Scalar) -> Jet:
        if isinstance(other, Jet):
            return self * other.reciprocal()
        a, b = _aligned(self.coeffs, _lifted(other))
        return Jet(a / b, self.order)

    def __rtruediv__(self, other: Jet | Scalar) -> Jet:
        return self.reciprocal() * other

    def __pow__(self, exponent: int) -> Jet:
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError(f"Jets support nonnegative integer powers, got {exponent!r}")
        result = Jet.constant(np.ones(self.coeffs.shape[2:]), self.order)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def compose(self, derivatives: Sequence[np.ndarray]) -> Jet:
        """Apply a univariate f given f^(k) at the expansion point, k = 0..order."""
        delta = Jet(self.coeffs.copy(), self.order)
        delta.coeffs[0, 0] = 0.0
        result = Jet.constant(derivatives[0], self.order)
        power = Jet.constant(np.ones(self.coeffs.shape[2:]), self.order)
        for k in range(1, self.order + 1):
            power = power * delta
            result = result + power * (derivatives[k] / math.factorial(k))
        return result

    def reciprocal(self) -> Jet:
        v = self.value
        if np.any(v == 0.0):
            raise ZeroDivisionError("Jet reciprocal at a zero value")
        derivs = [(-1.0) ** k * math.factorial(k) / v ** (k + 1) for k in range(self.order + 1)]
        return self.compose(derivs)


def _lifted(value: Scalar) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    return arr.reshape((1, 1) + arr.shape)


def _aligned(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Insert singleton batch axes so coefficient arrays broadcast batch-wise."""
    nd = max(a.ndim, b.ndim)
    a = a.reshape(a.shape[:2] + (1,) * (nd - a.ndim) + a.shape[2:])
    b = b.reshape(b.shape[:2] + (1,) * (nd - b.ndim) + b.shape[2:])
    return a, b


def _triangle(order: int, batch_ndim: int) -> np.ndarray:
    i, j = np.indices((order + 1, order + 1))
    mask = (i + j <= order).astype(np.float64)
    return mask.reshape(mask.shape + (1,) * batch_ndim)


def _cyclic(values: Sequence[np.ndarray], order: int) -> list[np.ndarray]:
    return [values[k % len(values)] for k in range(order + 1)]


def sin(z: Any) -> Any:
    if isinstance(z, Jet):
        s, c = np.sin(z.value), np.cos(z.value)
        return z.compose(_cyclic([s, c, -s, -c], z.order))
    return np.sin(z)


def cos(z: Any) -> Any:
    if isinstance(z, Jet):
        s, c = np.sin(z.value), np.cos(z.value)
        return z.compose(_cyclic([c, -s, -c, s], z.order))
    return np.cos(z)


def exp(z: Any) -> Any:
    if isinstance(z, Jet):
        e = np.exp(z.value)
        return z.compose([e] * (z.order + 1))
    return np.exp(z)


def cosh(z: Any) -> Any:
    if isinstance(z, Jet):
        ch, sh = np.cosh(z.value), np.sinh(z.value)
        return z.compose(_cyclic([ch, sh], z.order))
    return np.cosh(z)


def sinh(z: Any) -> Any:
    if isinstance(z, Jet):
        ch, sh = np.cosh(z.value), np.sinh(z.value)
        return z.compose(_cyclic([sh, ch], z.order))
    return np.sinh(z)


def sech(z: Any) -> Any:
    if isinstance(z, Jet):
        return cosh(z).reciprocal()
    return 1.0 / np.cosh(z)


def tanh(z: Any) -> Any:
    if isinstance(z, Jet):
        return sinh(z) * sech(z)
    return np.tanh(z)
