"""Tests for tau-convergence and error-growth studies."""

import math
from unittest.mock import patch

import anyio
import numpy as np
import pytest

from hyperrelax._errors import ConfigError
from hyperrelax.experiments import (
    PRESETS,
    THREADS_ENV,
    converge_tau,
    default_limiter,
    error_growth,
    fit_slopes,
    growth_exponent,
    mark_fit_rows,
    preset,
    resolve_initial_condition,
    run_simulation,
    study_grid,
)
from hyperrelax.models import build_model
from hyperrelax.types import ConvergenceRow, ReferenceKind, StudyConfig


def _biharmonic_study(**changes):
    values = dict(
        limit_model="biharmonic_limit",
        hyper_model="biharmonic_hyper",
        left=0.0,
        right=2.0 * math.pi,
        n=32,
        order=3,
        dt=0.01,
        t_final=0.5,
        initial_condition="exact",
        tau_list=(1e-1, 1e-2, 1e-3),
    )
    values.update(changes)
    return StudyConfig(**values)


def _rows(errors):
    taus = [10.0**-k for k in range(1, len(errors) + 1)]
    return [ConvergenceRow(tau, (err,)) for tau, err in zip(taus, errors)]


def test_mark_fit_rows_stops_at_floor():
    """Test rows after the first non-improving row are excluded."""
    rows = _rows([1e-1, 1e-2, 1e-3, 9.9e-4, 1e-5])
    mark_fit_rows(rows, 0.05)
    assert [r.in_fit for r in rows] == [True, True, True, False, False]
    assert fit_slopes(rows) == (pytest.approx(1.0),)


def test_mark_fit_rows_skips_diverged():
    """Test diverged rows never enter the fit."""
    rows = _rows([1e-1, math.nan, 1e-3])
    rows[1].diverged = True
    mark_fit_rows(rows, 0.05)
    assert [r.in_fit for r in rows] == [True, False, True]


def test_single_row_has_no_slope():
    """Test one usable row gives slope None."""
    rows = _rows([1e-1])
    mark_fit_rows(rows, 0.05)
    assert fit_slopes(rows) == (None,)
    assert fit_slopes([]) == ()


def test_growth_exponent_window():
    """Test the fit only uses t >= window_start."""
    times = [float(t) for t in range(1, 11)]
    errors = [t * t if t >= 5 else 1.0 for t in times]
    assert growth_exponent(times, errors, 5.0) == pytest.approx(2.0)
    assert growth_exponent(times, errors, 20.0) is None


def test_presets():
    """Test built-in presets at desk and published scale."""
    assert PRESETS == (
        "bbm",
        "biharmonic",
        "gardner",
        "gen_kawahara",
        "growth",
        "kawahara",
        "kdv",
        "kdvb",
        "ks",
    )
    desk = preset("bbm")
    full = preset("bbm", published=True)
    assert (desk.n, desk.t_final) == (512, 20.0)
    assert (full.n, full.t_final, full.dt) == (1024, 100.0, 0.1)
    assert full.left == -50.0 and full.right == 150.0
    assert preset("kdvb").model_overrides == {"mu": 0.1}
    assert preset("growth").traversals == 3.0
    assert preset("growth", published=True).traversals == 10.0
    assert preset("ks").name == "ks"


def test_unknown_preset():
    """Test an unknown preset name."""
    with pytest.raises(ConfigError, match="Unknown preset"):
        preset("heat")


def test_expression_initial_condition():
    """Test a whitelisted expression as initial data."""
    cfg = _biharmonic_study(initial_condition="2*sin(x)")
    grid = study_grid(cfg)
    field = resolve_initial_condition(cfg, build_model("biharmonic_limit", grid, order=3))
    np.testing.assert_allclose(field.values, 2.0 * np.sin(grid.nodes))


def test_run_simulation_defaults_to_hyperbolization():
    """Test a single run at the first tau."""
    model, series = run_simulation(_biharmonic_study(), record_every=10)
    assert model.name == "biharmonic_hyper"
    assert model.params.tau == 0.1
    assert series.final_time == 0.5
    assert len(series.times) == 6


def test_run_simulation_of_limit_model():
    """Test limit models ignore tau."""
    model, series = run_simulation(_biharmonic_study(), "biharmonic_limit", tau=0.5)
    assert model.name == "biharmonic_limit"
    assert series.final_state.data.shape == (1, 32)


@pytest.mark.asyncio
async def test_converge_tau_first_order():
    """Test the biharmonic hyperbolization converges at first order in tau."""
    result = await converge_tau(_biharmonic_study(), anyio.CapacityLimiter(2))
    assert [row.tau for row in result.rows] == [1e-1, 1e-2, 1e-3]
    assert all(row.in_fit for row in result.rows)
    assert result.final_time == 0.5
    assert 0.85 <= result.slopes[0] <= 1.15
    assert result.metadata["limit"] == "biharmonic_limit"


@pytest.mark.asyncio
async def test_converge_tau_against_exact_reference():
    """Test reference = exact for a model with a closed-form solution."""
    cfg = _biharmonic_study(reference=ReferenceKind.EXACT, tau_list=(1e-2,))
    result = await converge_tau(cfg, anyio.CapacityLimiter(1))
    assert len(result.rows) == 1
    assert result.slopes[0] is None
    assert result.rows[0].errors[0] < 1e-2


@pytest.mark.asyncio
async def test_converge_tau_keeps_diverged_rows():
    """Test a failed job is reported as a diverged row in tau order."""
    cfg = _biharmonic_study()

    def fake_job(cfg, grid, tau, u0, reference, t_final):
        if tau == 1e-2:
            return ConvergenceRow(tau, (math.nan,) * 4, diverged=True)
        return ConvergenceRow(tau, (tau,) * 4)

    with patch("hyperrelax.experiments.run_tau_job", side_effect=fake_job) as job:
        result = await converge_tau(cfg, anyio.CapacityLimiter(2))

    assert job.call_count == 3
    assert [row.tau for row in result.rows] == [1e-1, 1e-2, 1e-3]
    assert result.rows[1].diverged
    assert not result.rows[1].in_fit
    assert result.slopes[0] == pytest.approx(1.0)


@pytest.mark.asyncio
@pytest.mark.parametrize(
    "changes,message",
    [
        ({"limit_model": "biharmonic_hyper"}, "expected a limit model"),
        ({"hyper_model": "kdv_limit"}, "not a hyperbolization"),
        (
            {
                "limit_model": "ks_limit",
                "hyper_model": "ks_hyper",
                "reference": ReferenceKind.EXACT,
            },
            "exact solution",
        ),
    ],
)
async def test_converge_tau_rejects_bad_pairs(changes, message):
    """Test inconsistent model pairs."""
    with pytest.raises(ConfigError, match=message):
        await converge_tau(_biharmonic_study(**changes), anyio.CapacityLimiter(1))


@pytest.mark.asyncio
async def test_error_growth_runs_every_job():
    """Test limit and hyperbolic runs with and without relaxation."""
    cfg = StudyConfig(
        limit_model="gen_kawahara_limit",
        hyper_model="gen_kawahara_hyper",
        left=-70.0,
        right=70.0,
        n=256,
        order=3,
        dt=0.1,
        t_final=2.0,
        tau_list=(1e-2,),
        samples=4,
    )
    report = await error_growth(cfg, anyio.CapacityLimiter(2))
    labels = [s.label for s in report.series]
    assert labels == ["limit", "limit relaxed", "tau=0.01", "tau=0.01 relaxed"]
    for series in report.series:
        assert len(series.times) == 4
        assert series.times[-1] == pytest.approx(2.0, abs=1e-12)
        assert len(series.gammas) == 4
        assert all(err < 0.1 for err in series.errors)
        # The fit window starts after the first traversal
        assert series.exponent is None
    relaxed = report.series[1]
    assert all(abs(g - 1.0) < 0.1 for g in relaxed.gammas)
    assert report.series[0].gammas == [1.0] * 4


@pytest.mark.asyncio
async def test_error_growth_needs_travelling_wave():
    """Test a standing exact solution is rejected."""
    with pytest.raises(ConfigError, match="travelling"):
        await error_growth(_biharmonic_study(), anyio.CapacityLimiter(1))


@pytest.mark.asyncio
@pytest.mark.parametrize("raw", ["0", "-2", "many"])
async def test_default_limiter_rejects_bad_env(raw, monkeypatch):
    """Test HYPERRELAX_THREADS must be a positive integer."""
    monkeypatch.setenv(THREADS_ENV, raw)
    with pytest.raises(ConfigError, match=THREADS_ENV):
        default_limiter()


@pytest.mark.asyncio
async def test_default_limiter_reads_env(monkeypatch):
    """Test the job pool size comes from the environment."""
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_limiter().total_tokens == 3
    monkeypatch.delenv(THREADS_ENV)
    assert default_limiter().total_tokens >= 1
