"""Periodic upwind summation-by-parts operators.

An upwind pair consists of a forward-biased operator D+ and its negated
transpose D- = -D+^T. On a periodic grid both are circulants. The central
operator D0 = (D+ + D-)/2 is skew-symmetric and the difference D+ - D- is
negative semidefinite, which is what makes the semidiscretizations in
:mod:`hyperrelax.models` energy stable.

Interior stencils are the unique maximal-order one-sided-biased stencils on
the offsets ``-(r-1), ..., r`` (odd order ``2r-1``) or ``-(r-1), ..., r+1``
(even order ``2r``). Their weights are computed exactly with
:class:`fractions.Fraction` from the Lagrange interpolation conditions, and the
sign of the real part of the Fourier symbol is checked on a dense angle grid.
"""

from __future__ import annotations

import functools
import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from hyperrelax._errors import UnsupportedOrderError
from hyperrelax.grid import Field, Grid, format_float, inner_values
from hyperrelax.types import FloatArray

logger = logging.getLogger(__name__)

SUPPORTED_ORDERS = (1, 2, 3, 4, 5, 6, 7)
SYMBOL_SAMPLES = 10_000
# Refinement sequence for the observed-order check; coarsest fits every stencil
ACCURACY_SIZES = (16, 32, 64, 128)


@dataclass(frozen=True, eq=False)
class CirculantOperator:
    """Translation-invariant periodic operator (Au)_i = sum_j c_j u_{i + k_j}.

    Coefficients already include the grid spacing.
    """

    offsets: tuple[int, ...]
    coeffs: tuple[float, ...]
    grid: Grid

    def __post_init__(self) -> None:
        if len(self.offsets) != len(self.coeffs):
            raise ValueError(
                f"offsets and coeffs differ in length: {len(self.offsets)} vs {len(self.coeffs)}"
            )
        if len(set(self.offsets)) != len(self.offsets):
            raise ValueError(f"Duplicate offsets in {self.offsets}")

    @classmethod
    def from_terms(cls, grid: Grid, terms: dict[int, float]) -> CirculantOperator:
        """Build an operator from an offset -> coefficient map, dropping zeros."""
        kept = sorted((k, c) for k, c in terms.items() if c != 0.0)
        return cls(tuple(k for k, _ in kept), tuple(c for _, c in kept), grid)

    @classmethod
    def identity(cls, grid: Grid) -> CirculantOperator:
        return cls((0,), (1.0,), grid)

    @property
    def terms(self) -> dict[int, float]:
        return dict(zip(self.offsets, self.coeffs))

    @property
    def width(self) -> int:
        """Number of grid points spanned by the stencil."""
        if not self.offsets:
            return 0
        return max(self.offsets) - min(self.offsets) + 1

    def __call__(self, u: FloatArray) -> FloatArray:
        """Apply along the last axis of a raw array."""
        out = np.zeros(np.shape(u), dtype=np.result_type(u, np.float64))
        for k, c in zip(self.offsets, self.coeffs):
            out += c * np.roll(u, -k, axis=-1)
        return out

    def __add__(self, other: CirculantOperator) -> CirculantOperator:
        self.grid.require_same(other.grid)
        terms = self.terms
        for k, c in zip(other.offsets, other.coeffs):
            terms[k] = terms.get(k, 0.0) + c
        return CirculantOperator.from_terms(self.grid, terms)

    def __neg__(self) -> CirculantOperator:
        return CirculantOperator(self.offsets, tuple(-c for c in self.coeffs), self.grid)

    def __sub__(self, other: CirculantOperator) -> CirculantOperator:
        return self + (-other)

    def __mul__(self, scalar: float) -> CirculantOperator:
        return CirculantOperator.from_terms(
            self.grid, {k: scalar * c for k, c in zip(self.offsets, self.coeffs)}
        )

    __rmul__ = __mul__

    def __matmul__(self, other: CirculantOperator) -> CirculantOperator:
        """Materialize the product ``self @ other`` as a single circulant."""
        self.grid.require_same(other.grid)
        terms: dict[int, float] = {}
        for k1, c1 in zip(self.offsets, self.coeffs):
            for k2, c2 in zip(other.offsets, other.coeffs):
                terms[k1 + k2] = terms.get(k1 + k2, 0.0) + c1 * c2
        return CirculantOperator.from_terms(self.grid, terms)

    def transpose(self) -> CirculantOperator:
        return CirculantOperator.from_terms(
            self.grid, {-k: c for k, c in zip(self.offsets, self.coeffs)}
        )

    def first_column(self) -> FloatArray:
        """Column 0 of the dense circulant matrix."""
        col = np.zeros(self.grid.n)
        for k, c in zip(self.offsets, self.coeffs):
            col[(-k) % self.grid.n] += c
        return col

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in numpy FFT order: A = ifft(diag(eig) fft(.))."""
        return np.fft.fft(self.first_column())

    def dense(self) -> FloatArray:
        n = self.grid.n
        return np.stack([self(np.eye(n)[j]) for j in range(n)], axis=1)


@dataclass(frozen=True, eq=False)
class OperatorSet:
    """Upwind pair D+/D- with the central operator D0 = (D+ + D-)/2."""

    order: int
    dplus: CirculantOperator
    dminus: CirculantOperator
    dcentral: CirculantOperator
    # h-free weights of D+ on its offsets
    stencil: tuple[Fraction, ...]

    @property
    def grid(self) -> Grid:
        return self.dplus.grid


@dataclass(frozen=True)
class OperatorAudit:
    """Numerical check of the operator invariants for one order."""

    order: int
    n: int
    adjoint_error: float
    skew_error: float
    max_symbol_real: float
    max_dissipation: float
    observed_order: float
    passed: bool

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return "\n".join(
            [
                f"order {self.order}, n {self.n}: {status}",
                f"  adjoint identity error     {self.adjoint_error:.3e}",
                f"  central skew error         {self.skew_error:.3e}",
                f"  max h*Re(symbol D+)        {self.max_symbol_real:.3e}",
                f"  max <f,(D+ - D-)f>/|f|^2   {self.max_dissipation:.3e}",
                f"  observed order on sin(x)   {self.observed_order:.3f}",
            ]
        )


def upwind_offsets(order: int) -> tuple[int, ...]:
    """Offsets of the forward-biased stencil of the given order."""
    if order not in SUPPORTED_ORDERS:
        raise UnsupportedOrderError(
            f"Unsupported operator order {order}; choose one of {SUPPORTED_ORDERS}"
        )
    r = (order + 1) // 2
    if order % 2:
        return tuple(range(-(r - 1), r + 1))
    return tuple(range(-(r - 1), r + 2))


def upwind_stencil(order: int) -> tuple[Fraction, ...]:
    """Exact h-free D+ weights on :func:`upwind_offsets`.

    The weights are the derivatives at 0 of the Lagrange basis polynomials on
    the stencil nodes.
    """
    nodes = upwind_offsets(order)
    weights: dict[int, Fraction] = {}
    for k in nodes:
        if k == 0:
            continue
        num = Fraction(1)
        den = Fraction(k)
        for j in nodes:
            if j in (k, 0):
                continue
            num *= -j
            den *= k - j
        weights[k] = num / den
    weights[0] = -sum(weights.values(), Fraction(0))
    return tuple(weights[k] for k in nodes)


def fourier_symbol(op: CirculantOperator, theta: float | FloatArray) -> complex | np.ndarray:
    """Symbol sum_j c_j exp(i k_j theta); scalar in, scalar out."""
    th = np.asarray(theta, dtype=np.float64)
    value = np.zeros(th.shape, dtype=np.complex128)
    for k, c in zip(op.offsets, op.coeffs):
        value += c * np.exp(1j * k * th)
    if value.ndim == 0:
        return complex(value)
    return value


def apply(op: CirculantOperator, f: Field) -> Field:
    """Apply an operator to a field on the same grid."""
    op.grid.require_same(f.grid)
    return Field(f.grid, op(f.values))


def chain(*ops: CirculantOperator) -> CirculantOperator:
    """Materialize ``ops[0] @ ops[1] @ ...`` as one circulant."""
    return functools.reduce(lambda a, b: a @ b, ops)


@functools.lru_cache(maxsize=64)
def build_upwind_pair(order: int, grid: Grid) -> OperatorSet:
    """Build the periodic upwind operator set of the given order.

    Args:
        order: Interior accuracy order, 1 to 7.
        grid: Periodic grid; must have more points than the stencil width.

    Returns:
        OperatorSet with D+, D- = -D+^T and D0 = (D+ + D-)/2.

    Raises:
        UnsupportedOrderError: Order unavailable, grid too small, or the
            symbol of D+ has a positive real part somewhere.
    """
    offsets = upwind_offsets(order)
    weights = upwind_stencil(order)
    width = max(offsets) - min(offsets) + 1
    # D- reaches the mirrored offsets, so D+ D- spans twice the bias
    total_width = 2 * max(abs(k) for k in offsets) + 1
    if grid.n <= total_width:
        raise UnsupportedOrderError(
            f"Grid with n={grid.n} is too small for order {order} (stencil width {total_width})"
        )

    plus = dict(zip(offsets, weights))
    minus = {-k: -w for k, w in plus.items()}
    central = {k: (plus.get(k, Fraction(0)) + minus.get(k, Fraction(0))) / 2
               for k in set(plus) | set(minus)}

    def scaled(terms: dict[int, Fraction]) -> CirculantOperator:
        return CirculantOperator.from_terms(grid, {k: float(w) / grid.h for k, w in terms.items()})

    ops = OperatorSet(order, scaled(plus), scaled(minus), scaled(central), weights)

    theta = np.linspace(0.0, 2.0 * np.pi, SYMBOL_SAMPLES, endpoint=False)
    unit = CirculantOperator.from_terms(grid, {k: float(w) for k, w in plus.items()})
    worst = float(np.max(np.real(np.asarray(fourier_symbol(unit, theta)))))
    if worst > 1e-13:
        raise UnsupportedOrderError(
            f"Order {order} stencil is not dissipative: max Re(symbol) = {worst:.3e}"
        )
    logger.debug("Built order-%d upwind pair on n=%d (width %d)", order, grid.n, width)
    return ops


def dump_operators(ops: OperatorSet) -> str:
    """Plain-text listing of the operator stencils with h-free coefficients."""
    lines = [f"order {ops.order}"]
    unit = {
        "dplus": {k: w for k, w in zip(upwind_offsets(ops.order), ops.stencil)},
    }
    unit["dminus"] = {-k: -w for k, w in unit["dplus"].items()}
    unit["dcentral"] = {
        k: (unit["dplus"].get(k, Fraction(0)) + unit["dminus"].get(k, Fraction(0))) / 2
        for k in set(unit["dplus"]) | set(unit["dminus"])
    }
    for name, terms in unit.items():
        kept = sorted((k, w) for k, w in terms.items() if w != 0)
        lines.append(f"{name}.offsets " + " ".join(str(k) for k, _ in kept))
        lines.append(f"{name}.coeffs " + " ".join(format_float(float(w)) for _, w in kept))
        lines.append(f"{name}.exact " + " ".join(str(w) for _, w in kept))
    return "\n".join(lines) + "\n"


def _sin_error(order: int, n: int) -> tuple[float, float]:
    grid = Grid(0.0, 2.0 * math.pi, n)
    ops = build_upwind_pair(order, grid)
    err = float(np.max(np.abs(ops.dplus(np.sin(grid.nodes)) - np.cos(grid.nodes))))
    return grid.h, err


def observed_order(order: int, sizes: Iterable[int]) -> float:
    """Least-squares slope of log error versus log h for D+ applied to sin(x)."""
    hs, errs = zip(*(_sin_error(order, n) for n in sizes))
    slope, _ = np.polyfit(np.log(hs), np.log(errs), 1)
    return float(slope)


def audit_operators(order: int, n: int, seed: int = 0, samples: int = 20) -> OperatorAudit:
    """Check adjointness, skew-symmetry, dissipativity and accuracy.

    The accuracy check always runs on ACCURACY_SIZES, independent of ``n``; its
    finest grid stays above the roundoff floor of high-order stencils.
    """
    grid = Grid(0.0, 2.0 * math.pi, n)
    ops = build_upwind_pair(order, grid)
    rng = np.random.default_rng(seed)
    h = grid.h

    adjoint = skew = dissipation = 0.0
    for _ in range(samples):
        f = rng.standard_normal(n)
        g = rng.standard_normal(n)
        lhs = inner_values(h, ops.dplus(f), g)
        rhs = -inner_values(h, f, ops.dminus(g))
        scale = abs(lhs) + abs(rhs) + 1e-300
        adjoint = max(adjoint, abs(lhs - rhs) / scale)
        norm2 = inner_values(h, f, f)
        dcf = ops.dcentral(f)
        denominator = math.sqrt(norm2 * inner_values(h, dcf, dcf))
        skew = max(skew, abs(inner_values(h, f, dcf)) / denominator)
        dissipation = max(dissipation, inner_values(h, f, ops.dplus(f) - ops.dminus(f)) / norm2 * h)

    theta = np.linspace(0.0, 2.0 * np.pi, SYMBOL_SAMPLES, endpoint=False)
    max_real = float(np.max(np.real(np.asarray(fourier_symbol(ops.dplus, theta))))) * h

    slope = observed_order(order, ACCURACY_SIZES)

    passed = (
        adjoint <= 1e-12
        and skew <= 1e-12
        and max_real <= 1e-12
        and dissipation <= 1e-12
        and abs(slope - order) <= 0.25
    )
    return OperatorAudit(order, n, adjoint, skew, max_real, dissipation, slope, passed)
