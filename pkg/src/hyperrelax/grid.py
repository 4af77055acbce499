"""Uniform periodic grids, fields, and discrete norms.

All sums use ``numpy.sum``, which reduces contiguous float64 arrays pairwise.
The summation order is therefore fixed for a given array length, and
``l2_norm(f) ** 2`` and ``l2_inner(f, f)`` evaluate the same reduction.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from hyperrelax._errors import GridMismatchError, InvalidDomainError, NonFiniteStateError
from hyperrelax.types import FloatArray


def _readonly(values: FloatArray) -> FloatArray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform periodic grid on [left, right); the right endpoint is excluded."""

    left: float
    right: float
    n: int
    h: float = field(init=False)
    nodes: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.left) and math.isfinite(self.right)):
            raise InvalidDomainError(
                f"Domain bounds must be finite, got [{self.left}, {self.right})"
            )
        if self.right <= self.left:
            raise InvalidDomainError(
                f"Right endpoint must exceed left endpoint, got [{self.left}, {self.right})"
            )
        if self.n < 3:
            raise InvalidDomainError(f"A periodic grid needs at least 3 points, got {self.n}")
        length = self.right - self.left
        object.__setattr__(self, "h", length / self.n)
        nodes = self.left + length * (np.arange(self.n, dtype=np.float64) / self.n)
        object.__setattr__(self, "nodes", _readonly(nodes))

    @property
    def length(self) -> float:
        return self.right - self.left

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.left, self.right, self.n) == (other.left, other.right, other.n)

    def __hash__(self) -> int:
        return hash((self.left, self.right, self.n))

    def require_same(self, other: Grid) -> None:
        """Raise GridMismatchError unless ``other`` is the same grid."""
        if self != other:
            raise GridMismatchError(f"Grid mismatch: {self!r} vs {other!r}")

    def wrap(self, x: FloatArray | float) -> FloatArray:
        """Map coordinates periodically into [left, right)."""
        return np.asarray(self.left + np.mod(np.asarray(x) - self.left, self.length))


@dataclass(frozen=True, eq=False)
class Field:
    """Finite grid function bound to a Grid."""

    grid: Grid
    values: FloatArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.grid.n,):
            raise GridMismatchError(
                f"Field has shape {values.shape}, grid expects ({self.grid.n},)"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteStateError("Field contains non-finite values")
        object.__setattr__(self, "values", _readonly(values))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[FloatArray], FloatArray]) -> Field:
        """Sample ``fn`` at the grid nodes."""
        return cls(grid, np.asarray(fn(grid.nodes), dtype=np.float64))


@dataclass(frozen=True, eq=False)
class State:
    """Ordered fields (q_0, ..., q_{m-1}) on one grid, stored as an (m, n) array."""

    grid: Grid
    data: FloatArray

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[np.newaxis, :]
        if data.ndim != 2 or data.shape[1] != self.grid.n or data.shape[0] < 1:
            raise GridMismatchError(
                f"State has shape {data.shape}, grid expects (m, {self.grid.n})"
            )
        if not np.all(np.isfinite(data)):
            raise NonFiniteStateError("State contains non-finite values")
        object.__setattr__(self, "data", _readonly(data))

    @classmethod
    def from_fields(cls, fields: Sequence[Field]) -> State:
        if not fields:
            raise GridMismatchError("A state needs at least one field")
        grid = fields[0].grid
        for f in fields[1:]:
            grid.require_same(f.grid)
        return cls(grid, np.stack([f.values for f in fields]))

    @property
    def m(self) -> int:
        return int(self.data.shape[0])

    def field(self, j: int) -> Field:
        return Field(self.grid, self.data[j])

    @property
    def fields(self) -> tuple[Field, ...]:
        return tuple(self.field(j) for j in range(self.m))

    def with_data(self, data: FloatArray) -> State:
        return State(self.grid, data)


def make_grid(left: float, right: float, n: int) -> Grid:
    """Create a uniform periodic grid.

    Args:
        left: Left domain endpoint (included).
        right: Right domain endpoint (excluded, identified with ``left``).
        n: Number of points, at least 3.

    Returns:
        Grid with spacing ``(right - left) / n``.

    Example:
        >>> make_grid(-50.0, 150.0, 1024).h
        0.1953125
    """
    return Grid(float(left), float(right), int(n))


def inner_values(h: float, a: FloatArray, b: FloatArray) -> float:
    """Discrete inner product h * sum(a * b) on raw arrays."""
    return float(h * np.sum(a * b))


def l2_inner(f: Field, g: Field) -> float:
    f.grid.require_same(g.grid)
    return inner_values(f.grid.h, f.values, g.values)


def l2_norm(f: Field) -> float:
    return math.sqrt(inner_values(f.grid.h, f.values, f.values))


def mass(f: Field) -> float:
    return float(f.grid.h * np.sum(f.values))


def format_float(value: float) -> str:
    """Render a float with 17 significant digits (round-trip exact)."""
    return f"{value:.17g}"


def fields_to_csv(grid: Grid, columns: dict[str, FloatArray]) -> str:
    """Serialize grid columns as CSV text with an ``x`` column first."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["x", *columns])
    arrays = [np.asarray(c) for c in columns.values()]
    for arr in arrays:
        if arr.shape != (grid.n,):
            raise GridMismatchError(f"Column shape {arr.shape} does not match grid ({grid.n},)")
    for i, x in enumerate(grid.nodes):
        writer.writerow([format_float(float(x)), *(format_float(float(a[i])) for a in arrays)])
    return buffer.getvalue()
