"""Tests for CSV and SVG writers."""

import math

from hyperrelax._internal.output import (
    Line,
    convergence_csv,
    convergence_svg,
    growth_csv,
    growth_svg,
    svg_plot,
    write_outputs,
)
from hyperrelax.types import ConvergenceRow, GrowthSeries, StudyResult


def _result():
    rows = [
        ConvergenceRow(0.5, (0.25, 0.5), in_fit=True),
        ConvergenceRow(0.25, (0.125, 0.25), in_fit=True),
    ]
    return StudyResult(rows=rows, slopes=(1.0, None), final_time=2.0)


def test_convergence_csv():
    """Test header, rows and the slope footer."""
    text = convergence_csv(_result())
    assert text.splitlines() == [
        "tau,err_q0,err_q1",
        "0.5,0.25,0.5",
        "0.25,0.125,0.25",
        "# slope_q0=1,slope_q1=n/a",
    ]


def test_growth_csv_fills_unit_gammas():
    """Test runs without relaxation report gamma = 1."""
    series = GrowthSeries("limit", None, False, [1.0, 2.0], [0.5, 0.25], [], exponent=None)
    assert growth_csv(series).splitlines() == [
        "t,error,gamma",
        "1,0.5,1",
        "2,0.25,1",
        "# exponent=n/a",
    ]


def test_svg_plot_skips_unusable_points():
    """Test nonpositive and non-finite values are dropped on log axes."""
    svg = svg_plot(
        [
            Line("a", [1.0, 10.0, 100.0], [0.0, -1.0, math.nan]),
            Line("b & c", [1.0, 10.0], [2.0, 3.0]),
        ],
        "title <x>",
        "tau",
        "error",
    )
    assert svg.startswith("<svg")
    assert svg.count("<polyline") == 1
    assert "b &amp; c" in svg
    assert "title &lt;x&gt;" in svg


def test_svg_plot_linear_axes():
    """Test a single series on linear axes."""
    svg = svg_plot([Line("e", [0.0, 1.0, 2.0], [-1.0, 0.0, 1.0])], "t", "x", "y", False, False)
    assert svg.count("<polyline") == 1


def test_study_plots():
    """Test convergence and growth plots have one line per series."""
    assert convergence_svg(_result(), "kdv").count("<polyline") == 2
    series = [
        GrowthSeries("limit", None, False, [1.0, 2.0], [0.1, 0.4], [1.0, 1.0]),
        GrowthSeries("limit relaxed", None, True, [1.0, 2.0], [0.1, 0.2], [1.0, 0.99]),
    ]
    assert growth_svg(series, "growth").count("<polyline") == 2


def test_write_outputs(tmp_path):
    """Test files are written in sorted order under a new directory."""
    target = tmp_path / "out" / "nested"
    paths = write_outputs(target, {"b.csv": "2\n", "a.csv": "1\n"})
    assert [p.name for p in paths] == ["a.csv", "b.csv"]
    assert (target / "b.csv").read_text() == "2\n"
