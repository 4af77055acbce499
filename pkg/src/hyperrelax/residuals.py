"""Manufactured approximate solutions of the hyperbolic systems.

Given a smooth profile w(t, x), :func:`construct_bar_q` builds the lifted
state q_bar = (q_0, ..., q_{m-1}) of a continuous hyperbolic approximation so
that every equation except the principal one holds identically. The principal
equation then carries the limit-PDE residual of ``w`` plus a term of order tau.

Each q_bar_j is a :class:`~hyperrelax._internal.forms.LinearForm` in the
derivatives of ``w``, and profiles supply exact mixed partials (closed form for
trigonometric sums, Taylor jets otherwise), so the identities can be checked
to roundoff instead of to a discretization error.

Supported construction kinds:

- ``mixed``: the BBM-type system with a mixed space-time derivative.
- ``odd_m``: generic odd-order hyperbolization with optional mu damping.
- ``even_m``: generic even-order hyperbolization.
- ``kawahara``: the five-component Kawahara system (trigonometric profiles).
- ``ks``: the Kuramoto-Sivashinsky system.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np

from hyperrelax._errors import InvalidParameterError, UnsupportedProfileError
from hyperrelax._internal import jets
from hyperrelax._internal.fitting import loglog_slope
from hyperrelax._internal.flux import Flux
from hyperrelax._internal.forms import Key, LinearForm
from hyperrelax._internal.jets import Jet
from hyperrelax.grid import format_float
from hyperrelax.models import ExactSolution, even_signs, odd_signs
from hyperrelax.types import FloatArray, FluxKind

logger = logging.getLogger(__name__)

KINDS = ("mixed", "odd_m", "even_m", "kawahara", "ks")
MAX_GENERIC_ORDER = 5


# Profiles


class SmoothProfile(ABC):
    """Smooth function w(t, x) with exact mixed partial derivatives."""

    kind: ClassVar[str] = "profile"
    supports_primitives: ClassVar[bool] = False

    @abstractmethod
    def derivatives(
        self, keys: Iterable[Key], t: FloatArray, x: FloatArray
    ) -> dict[Key, FloatArray]:
        """d^a/dt^a d^b/dx^b w at the points for every (a, b) in ``keys``."""

    def derivative(self, a: int, b: int, t: FloatArray, x: FloatArray) -> FloatArray:
        return self.derivatives([(a, b)], t, x)[(a, b)]

    def __call__(self, t: FloatArray, x: FloatArray) -> FloatArray:
        return self.derivative(0, 0, t, x)


@dataclass(frozen=True)
class TrigMode:
    """One term amplitude * sin(wavenumber x - frequency t + phase)."""

    amplitude: float
    wavenumber: int
    frequency: float = 0.0
    phase: float = 0.0


@dataclass(frozen=True)
class TrigSumProfile(SmoothProfile):
    """Zero-mean, 2 pi-periodic sum of travelling sine modes.

    Every mode has an integer wavenumber >= 1, so x-primitives of any order
    are again periodic and zero-mean.
    """

    modes: tuple[TrigMode, ...] = ()

    kind: ClassVar[str] = "trig_sum"
    supports_primitives: ClassVar[bool] = True

    def __post_init__(self) -> None:
        for mode in self.modes:
            if int(mode.wavenumber) != mode.wavenumber or mode.wavenumber < 1:
                raise UnsupportedProfileError(
                    f"Wavenumbers must be integers >= 1, got {mode.wavenumber}"
                )

    @classmethod
    def random(
        cls, rng: np.random.Generator, n_modes: int = 3, max_wavenumber: int = 3
    ) -> TrigSumProfile:
        modes = tuple(
            TrigMode(
                amplitude=float(rng.uniform(-1.0, 1.0)),
                wavenumber=int(rng.integers(1, max_wavenumber + 1)),
                frequency=float(rng.uniform(-1.0, 1.0)),
                phase=float(rng.uniform(0.0, 2.0 * math.pi)),
            )
            for _ in range(n_modes)
        )
        return cls(modes)

    def derivatives(
        self, keys: Iterable[Key], t: FloatArray, x: FloatArray
    ) -> dict[Key, FloatArray]:
        t, x = np.broadcast_arrays(np.asarray(t, dtype=np.float64), np.asarray(x, dtype=np.float64))
        out: dict[Key, FloatArray] = {}
        for a, b in keys:
            total = np.zeros(t.shape)
            for mode in self.modes:
                theta = mode.wavenumber * x - mode.frequency * t + mode.phase
                s, c = np.sin(theta), np.cos(theta)
                cycle = (s, c, -s, -c)[(a + b) % 4]
                scale = mode.amplitude * float(mode.wavenumber) ** b * (-mode.frequency) ** a
                total = total + scale * cycle
            out[(a, b)] = total
        return out


class JetProfile(SmoothProfile):
    """Profile given by a closed-form expression, differentiated with Taylor jets."""

    @abstractmethod
    def expression(self, t: Any, x: Any) -> Any:
        """w(t, x) written with :mod:`hyperrelax._internal.jets` functions."""

    def derivatives(
        self, keys: Iterable[Key], t: FloatArray, x: FloatArray
    ) -> dict[Key, FloatArray]:
        keys = list(keys)
        if any(b < 0 for _, b in keys):
            raise UnsupportedProfileError(
                f"{self.kind} profiles have no closed-form x-primitives"
            )
        t, x = np.broadcast_arrays(np.asarray(t, dtype=np.float64), np.asarray(x, dtype=np.float64))
        order = max((a + b for a, b in keys), default=0)
        value = self.expression(Jet.variable(t, 0, order), Jet.variable(x, 1, order))
        if not isinstance(value, Jet):
            value = Jet.constant(np.broadcast_to(value, t.shape), order)
        return {(a, b): np.broadcast_to(value.derivative(a, b), t.shape).copy() for a, b in keys}


@dataclass(frozen=True)
class SechProfile(JetProfile):
    """amplitude * sech((x - speed t - center) / width) ** power."""

    amplitude: float = 1.0
    width: float = 1.0
    speed: float = 0.0
    center: float = 0.0
    power: int = 2

    kind: ClassVar[str] = "sech_family"

    def expression(self, t: Any, x: Any) -> Any:
        xi = (x - self.speed * t - self.center) / self.width
        return self.amplitude * jets.sech(xi) ** self.power


@dataclass(frozen=True)
class TravelingWaveProfile(JetProfile):
    """Exact solution of a model used as a profile."""

    solution: ExactSolution

    kind: ClassVar[str] = "traveling_wave"

    def expression(self, t: Any, x: Any) -> Any:
        return self.solution(t, x)


def sample_points(
    rng: np.random.Generator,
    count: int,
    t_range: tuple[float, float] = (0.0, 1.0),
    x_range: tuple[float, float] = (0.0, 2.0 * math.pi),
) -> tuple[FloatArray, FloatArray]:
    """Uniform random (t, x) sample points."""
    return rng.uniform(*t_range, size=count), rng.uniform(*x_range, size=count)


# Continuous systems


@dataclass(frozen=True)
class Term:
    """coeff * q_component, or coeff * d/dx q_component when ``dx``."""

    coeff: float
    component: int
    dx: bool = False


Row = tuple[Term, ...]


@dataclass(frozen=True)
class BarState:
    """Lifted approximate solution q_bar of one hyperbolic system.

    ``rows`` hold the continuous equations dq_j/dt = sum of terms (plus
    -f(q_0)_x in row 0). ``leads`` are the components at tau = 0 and
    ``limit`` is the linear part of the limit-PDE residual of ``w``.
    """

    kind: str
    tau: float
    profile: SmoothProfile
    components: tuple[LinearForm, ...]
    leads: tuple[LinearForm, ...]
    rows: tuple[Row, ...]
    limit: LinearForm
    flux: Flux = field(default_factory=Flux)
    # Closed-form tau R of the mixed system's second equation
    printed_residual: LinearForm | None = None

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def residual_index(self) -> int:
        return 1 if self.kind == "mixed" else 0

    def deviation(self, j: int) -> LinearForm:
        """q_bar_j minus its tau = 0 value."""
        return self.components[j] - self.leads[j]

    def evaluate(self, j: int, t: FloatArray, x: FloatArray) -> FloatArray:
        form = self.components[j]
        values = self.profile.derivatives(form.terms, t, x)
        return _evaluate(form, values, np.shape(np.broadcast_arrays(t, x)[0]))


def _evaluate(
    form: LinearForm, values: dict[Key, FloatArray], shape: tuple[int, ...]
) -> FloatArray:
    if form.is_zero:
        return np.zeros(shape)
    return form.evaluate(values)


def _w(a: int = 0, b: int = 0, coeff: float = 1.0) -> LinearForm:
    return LinearForm.derivative(a, b, coeff)


def _chain_components(
    m: int, signs: Sequence[int], mu: float, tau: float, even: bool
) -> list[LinearForm]:
    """Alternate between the two solved forms of row j, starting at the middle.

    Row j reads tau dq_j/dt = s_j (q_{m-j} - d/dx q_{m-j-1}) - [j = 1] mu q_1,
    so it either gives q_{m-j} from q_{m-j-1} (up) or q_{m-j-1} as an
    x-primitive (down).
    """
    q: list[LinearForm | None] = [None] * m

    def up(j: int) -> None:
        qj = q[j]
        below = q[m - j - 1]
        assert qj is not None and below is not None
        source = tau * qj.dt() + (mu * qj if j == 1 else LinearForm.zero())
        q[m - j] = below.dx() + signs[j] * source

    def down(j: int) -> None:
        qj = q[j]
        above = q[m - j]
        assert qj is not None and above is not None
        q[m - j - 1] = (above - signs[j] * tau * qj.dt()).antidx()

    if even:
        c = m // 2
        q[c] = _w(0, c)
        down(c)
        for k in range(1, c):
            up(c - k)
            down(c + k)
    else:
        c = (m - 1) // 2
        q[c] = _w(0, c)
        for k in range(c):
            up(c - k)
            down(c + k + 1)
    assert all(form is not None for form in q)
    return [form for form in q if form is not None]


def _chain_rows(m: int, signs: Sequence[int], mu: float, tau: float) -> list[Row]:
    rows: list[Row] = [(Term(-signs[0], m - 1, True),)]
    for j in range(1, m):
        row = [Term(signs[j] / tau, m - j), Term(-signs[j] / tau, m - j - 1, True)]
        if j == 1 and mu:
            row.append(Term(-mu / tau, 1))
        rows.append(tuple(row))
    return rows


def _mixed(tau: float) -> tuple[list[LinearForm], list[Row], LinearForm, LinearForm]:
    components = [_w(), _w(0, 1) - tau * _w(2, 1), _w(1, 1, -1.0)]
    rows: list[Row] = []
    if tau > 0.0:
        rows = [
            (Term(-1.0, 2, True),),
            (Term(-tau, 1, True), Term(-1.0, 2)),
            (Term(-1.0 / tau, 0, True), Term(1.0 / tau, 1)),
        ]
    limit = _w(1, 0) - _w(1, 2)
    printed = tau * (_w(0, 2) - _w(3, 1) - tau * _w(2, 2))
    return components, rows, limit, printed


def _kawahara(tau: float) -> tuple[list[LinearForm], list[Row], LinearForm]:
    q2 = _w(0, 2)
    q3 = q2.dx() - tau * q2.dt()
    q1 = (q2 - tau * q3.dt()).antidx()
    q4 = tau * q1.dt() + q3.dx() - q1.dx()
    q0 = (q1 + tau * q4.dt()).antidx()
    rows: list[Row] = []
    if tau > 0.0:
        r = 1.0 / tau
        rows = [
            (Term(1.0, 4, True),),
            (Term(-r, 3, True), Term(r, 1, True), Term(r, 4)),
            (Term(r, 2, True), Term(-r, 3)),
            (Term(-r, 1, True), Term(r, 2)),
            (Term(r, 0, True), Term(-r, 1)),
        ]
    limit = _w(1, 0) + _w(0, 3) - _w(0, 5)
    return [q0, q1, q2, q3, q4], rows, limit


def _default_flux(kind: str) -> Flux:
    return Flux(FluxKind.NONE) if kind == "even_m" else Flux(FluxKind.QUADRATIC)


def construct_bar_q(
    kind: str,
    profile: SmoothProfile,
    tau: float,
    *,
    m: int | None = None,
    sigma0: int | None = None,
    mu: float = 0.0,
    flux: Flux | None = None,
) -> BarState:
    """Build q_bar for one hyperbolic system from the profile ``w``.

    Args:
        kind: One of ``mixed``, ``odd_m``, ``even_m``, ``kawahara``, ``ks``.
        profile: Smooth profile w(t, x).
        tau: Relaxation parameter, >= 0 (tau = 0 gives the leading terms).
        m: Order for the generic kinds (default 3 for odd, 4 for even).
        sigma0: Leading sign; even kinds default to (-1)^(m/2).
        mu: Damping coefficient (odd kinds only).
        flux: Flux of q_0; defaults to u^2/2 (none for ``even_m``).

    Returns:
        BarState with one linear form per component.

    Raises:
        UnsupportedProfileError: Unknown kind, m above the supported order,
            or a profile that cannot supply the needed primitives.
        InvalidParameterError: Inconsistent m, sigma0 or mu.
    """
    if tau < 0.0 or not math.isfinite(tau):
        raise InvalidParameterError(f"tau must be finite and >= 0, got {tau}")
    if flux is None:
        flux = _default_flux(kind)
    printed: LinearForm | None = None
    components: list[LinearForm]
    rows: list[Row]

    if kind == "mixed":
        components, rows, limit, printed = _mixed(tau)
    elif kind == "kawahara":
        if not profile.supports_primitives:
            raise UnsupportedProfileError(
                f"kawahara construction needs a trig_sum profile, got {profile.kind}"
            )
        components, rows, limit = _kawahara(tau)
    elif kind in ("odd_m", "even_m", "ks"):
        even = kind != "odd_m"
        order = m if m is not None else (3 if kind == "odd_m" else 4)
        if kind == "ks" and order != 4:
            raise InvalidParameterError(f"ks is fixed at m=4, got {order}")
        if order > MAX_GENERIC_ORDER:
            raise UnsupportedProfileError(
                f"{kind} construction supports m <= {MAX_GENERIC_ORDER}, got {order}"
            )
        if even:
            if order % 2 or order < 2:
                raise InvalidParameterError(f"{kind} needs an even m >= 2, got {order}")
            expected = 1 if order % 4 == 0 else -1
            s0 = expected if sigma0 is None else sigma0
            if s0 != expected or mu:
                raise InvalidParameterError(
                    f"{kind} with m={order} needs sigma0={expected} and mu=0"
                )
            signs = even_signs(s0, order)
        else:
            if order % 2 == 0 or order < 3:
                raise InvalidParameterError(f"odd_m needs an odd m >= 3, got {order}")
            s0 = 1 if sigma0 is None else sigma0
            if s0 not in (1, -1):
                raise InvalidParameterError(f"sigma0 must be +1 or -1, got {s0}")
            signs = odd_signs(s0, order)
        components = _chain_components(order, signs, mu, tau, even)
        rows = _chain_rows(order, signs, mu, tau) if tau > 0.0 else []
        limit = _w(1, 0) + s0 * _w(0, order)
        if mu:
            limit = limit - mu * _w(0, 2)
        if kind == "ks":
            if rows:
                rows[0] = rows[0] + (Term(-1.0, 2),)
            limit = _w(1, 0) + _w(0, 2) + _w(0, 4)
    else:
        raise UnsupportedProfileError(f"Unknown construction kind {kind!r}; choose one of {KINDS}")

    if tau > 0.0:
        leads = construct_bar_q(
            kind, profile, 0.0, m=m, sigma0=sigma0, mu=mu, flux=flux
        ).components
    else:
        leads = tuple(components)
    return BarState(
        kind=kind,
        tau=tau,
        profile=profile,
        components=tuple(components),
        leads=tuple(leads),
        rows=tuple(rows),
        limit=limit,
        flux=flux,
        printed_residual=printed,
    )


# Verification


@dataclass(frozen=True)
class EquationCheck:
    """Worst mismatch of one equation over the sample points."""

    index: int
    role: str  # "auxiliary" or "residual"
    max_error: float
    scale: float
    passed: bool

    @property
    def relative(self) -> float:
        return self.max_error / self.scale if self.scale > 0.0 else self.max_error


@dataclass(frozen=True)
class IdentityReport:
    kind: str
    tau: float
    checks: tuple[EquationCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        worst = max((c.relative for c in self.checks), default=0.0)
        status = "pass" if self.passed else "FAIL"
        return f"{self.kind} tau={self.tau:g}: {status} (worst relative mismatch {worst:.3e})"


def _needed_forms(bar: BarState) -> list[LinearForm]:
    forms = [bar.limit, bar.leads[0], bar.leads[0].dx()]
    for j in range(bar.m):
        d = bar.deviation(j)
        forms += [bar.components[j], bar.components[j].dx(), bar.components[j].dt(), d, d.dx()]
    forms.append(bar.deviation(0).dt())
    if bar.printed_residual is not None:
        forms.append(bar.printed_residual)
    return forms


def _derivative_table(
    bar: BarState, t: FloatArray, x: FloatArray
) -> tuple[dict[Key, FloatArray], tuple[int, ...]]:
    keys: set[Key] = set()
    for form in _needed_forms(bar):
        keys.update(form.terms)
    shape = np.shape(np.broadcast_arrays(np.asarray(t), np.asarray(x))[0])
    return bar.profile.derivatives(sorted(keys), t, x), shape


def _limit_residual(
    bar: BarState, values: dict[Key, FloatArray], shape: tuple[int, ...]
) -> FloatArray:
    w = _evaluate(bar.leads[0], values, shape)
    wx = _evaluate(bar.leads[0].dx(), values, shape)
    return _evaluate(bar.limit, values, shape) + bar.flux.derivative(w) * wx


def _closed_tau_residual(
    bar: BarState, values: dict[Key, FloatArray], shape: tuple[int, ...]
) -> FloatArray:
    """tau R of the principal equation, assembled from the deviations q_bar - lead."""
    if bar.printed_residual is not None:
        return _evaluate(bar.printed_residual, values, shape)
    total = _evaluate(bar.deviation(0).dt(), values, shape)
    for term in bar.rows[0]:
        d = bar.deviation(term.component)
        total = total - term.coeff * _evaluate(d.dx() if term.dx else d, values, shape)
    w = _evaluate(bar.leads[0], values, shape)
    wx = _evaluate(bar.leads[0].dx(), values, shape)
    d0 = _evaluate(bar.deviation(0), values, shape)
    d0x = _evaluate(bar.deviation(0).dx(), values, shape)
    flux = bar.flux
    return total + flux.derivative_increment(w, d0) * (wx + d0x) + flux.derivative(w) * d0x


def verify_identities(
    bar: BarState, t: FloatArray, x: FloatArray, tol: float = 1e-11
) -> IdentityReport:
    """Evaluate every equation of the system at the points (t, x).

    Auxiliary equations are expected to vanish. The principal equation is
    compared with the limit-PDE residual of ``w`` plus the closed-form tau R
    (for ``mixed`` the principal equation is exactly the limit residual and
    the second equation carries tau R).
    """
    if bar.tau <= 0.0:
        raise InvalidParameterError("Identities are only defined for tau > 0")
    values, shape = _derivative_table(bar, t, x)
    comps = [_evaluate(c, values, shape) for c in bar.components]
    comps_x = [_evaluate(c.dx(), values, shape) for c in bar.components]

    checks = []
    for j, row in enumerate(bar.rows):
        pieces = [_evaluate(bar.components[j].dt(), values, shape)]
        for term in row:
            operand = comps_x[term.component] if term.dx else comps[term.component]
            pieces.append(-term.coeff * operand)
        if j == 0 and bar.flux.kind is not FluxKind.NONE:
            pieces.append(bar.flux.derivative(comps[0]) * comps_x[0])
        actual = np.sum(pieces, axis=0)

        if j == 0:
            expected = _limit_residual(bar, values, shape)
            if bar.kind != "mixed":
                expected = expected + _closed_tau_residual(bar, values, shape)
            role = "residual"
        elif j == bar.residual_index:
            expected = _closed_tau_residual(bar, values, shape)
            role = "residual"
        else:
            expected = np.zeros(shape)
            role = "auxiliary"
        magnitude = np.sum(np.abs(pieces), axis=0) + np.abs(expected)
        scale = float(np.max(magnitude)) if magnitude.size else 0.0
        error = float(np.max(np.abs(actual - expected))) if actual.size else 0.0
        passed = error <= tol * max(scale, 1.0)
        checks.append(EquationCheck(j, role, error, scale, passed))
    report = IdentityReport(bar.kind, bar.tau, tuple(checks))
    if not report.passed:
        logger.warning("Identity check failed: %s", report.summary())
    return report


@dataclass(frozen=True)
class ScalingStudy:
    """Deviation and residual magnitudes across tau with fitted log-log slopes.

    A slope of ``None`` means the quantity vanished identically ("exact").
    """

    kind: str
    taus: tuple[float, ...]
    deviations: tuple[tuple[float, ...], ...]  # [tau index][component]
    residuals: tuple[float, ...]
    slopes: tuple[float | None, ...]
    residual_slope: float | None


def scaling_study(
    kind: str,
    profile: SmoothProfile,
    tau_list: Sequence[float],
    t: FloatArray,
    x: FloatArray,
    **options: Any,
) -> ScalingStudy:
    """Fit slopes of max|q_bar_j - lead_j| and of max|tau R| against tau."""
    deviations = []
    residuals = []
    for tau in tau_list:
        bar = construct_bar_q(kind, profile, tau, **options)
        values, shape = _derivative_table(bar, t, x)
        deviations.append(
            tuple(
                float(np.max(np.abs(_evaluate(bar.deviation(j), values, shape))))
                for j in range(bar.m)
            )
        )
        residuals.append(float(np.max(np.abs(_closed_tau_residual(bar, values, shape)))))
    m = len(deviations[0]) if deviations else 0
    slopes = tuple(loglog_slope(tau_list, [row[j] for row in deviations]) for j in range(m))
    return ScalingStudy(
        kind,
        tuple(tau_list),
        tuple(deviations),
        tuple(residuals),
        slopes,
        loglog_slope(tau_list, residuals),
    )


@dataclass(frozen=True)
class OracleCheck:
    max_relative_error: float
    worst: Key | None
    passed: bool


def check_derivative_oracle(
    profile: SmoothProfile,
    rng: np.random.Generator,
    points: int = 20,
    max_order: int = 4,
    tol: float = 1e-6,
) -> OracleCheck:
    """Compare each derivative with a central difference of the one below it."""
    t, x = sample_points(rng, points)
    eps = float(np.finfo(np.float64).eps)
    delta = eps ** (1.0 / 3.0)
    worst_error, worst_key = 0.0, None
    for total in range(1, max_order + 1):
        for a in range(total + 1):
            b = total - a
            exact = profile.derivative(a, b, t, x)
            if b > 0:
                step = delta * np.maximum(1.0, np.abs(x))
                hi = profile.derivative(a, b - 1, t, x + step)
                lo = profile.derivative(a, b - 1, t, x - step)
            else:
                step = delta * np.maximum(1.0, np.abs(t))
                hi = profile.derivative(a - 1, b, t + step, x)
                lo = profile.derivative(a - 1, b, t - step, x)
            approx = (hi - lo) / (2.0 * step)
            scale = max(1.0, float(np.max(np.abs(exact))))
            error = float(np.max(np.abs(approx - exact))) / scale
            if error > worst_error:
                worst_error, worst_key = error, (a, b)
    return OracleCheck(worst_error, worst_key, worst_error <= tol)


def reports_to_csv(reports: Iterable[IdentityReport]) -> str:
    """CSV with columns kind, tau, equation, role, max_residual, scale."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["kind", "tau", "equation", "role", "max_residual", "scale"])
    for report in reports:
        for check in report.checks:
            writer.writerow(
                [
                    report.kind,
                    format_float(report.tau),
                    check.index,
                    check.role,
                    format_float(check.max_error),
                    format_float(check.scale),
                ]
            )
    return buffer.getvalue()


def verify_kind(
    kind: str,
    rng: np.random.Generator,
    tau_list: Sequence[float] = (1.0, 1e-2, 1e-4),
    profiles: int = 5,
    points: int = 20,
    **options: Any,
) -> tuple[list[IdentityReport], ScalingStudy]:
    """Identity checks on random trigonometric profiles plus a scaling study."""
    if profiles < 1:
        raise InvalidParameterError(f"Need at least one profile, got {profiles}")
    reports = []
    for _ in range(profiles):
        profile = TrigSumProfile.random(rng)
        t, x = sample_points(rng, points)
        for tau in tau_list:
            reports.append(verify_identities(construct_bar_q(kind, profile, tau, **options), t, x))
    t, x = sample_points(rng, points)
    study = scaling_study(kind, profile, [10.0**-k for k in range(1, 6)], t, x, **options)
    return reports, study
