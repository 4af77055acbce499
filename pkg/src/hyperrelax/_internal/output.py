"""CSV and SVG writers for study results."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

from hyperrelax.grid import format_float
from hyperrelax.types import GrowthSeries, StudyResult

logger = logging.getLogger(__name__)

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
_WIDTH, _HEIGHT, _MARGIN = 640, 420, 60


def _slope_text(slope: float | None) -> str:
    return "n/a" if slope is None else format_float(slope)


def convergence_csv(result: StudyResult) -> str:
    """``tau,err_q0,...`` rows followed by a ``# slope_q0=...`` footer."""
    m = len(result.slopes)
    lines = [",".join(["tau", *(f"err_q{j}" for j in range(m))])]
    for row in result.rows:
        lines.append(",".join(format_float(v) for v in (row.tau, *row.errors)))
    footer = ",".join(f"slope_q{j}={_slope_text(s)}" for j, s in enumerate(result.slopes))
    lines.append("# " + footer)
    return "\n".join(lines) + "\n"


def growth_csv(series: GrowthSeries) -> str:
    """``t,error,gamma`` rows of one error-growth run."""
    lines = ["t,error,gamma"]
    gammas = series.gammas or [1.0] * len(series.times)
    for t, err, gamma in zip(series.times, series.errors, gammas):
        lines.append(f"{format_float(t)},{format_float(err)},{format_float(gamma)}")
    lines.append(f"# exponent={_slope_text(series.exponent)}")
    return "\n".join(lines) + "\n"


@dataclass
class Line:
    """One polyline of a plot."""

    label: str
    xs: Sequence[float]
    ys: Sequence[float]


def _transform(values: Sequence[float], log: bool) -> list[float]:
    return [math.log10(v) if log else v for v in values]


def _usable(x: float, y: float, log_x: bool, log_y: bool) -> bool:
    if not (math.isfinite(x) and math.isfinite(y)):
        return False
    return (x > 0.0 or not log_x) and (y > 0.0 or not log_y)


def svg_plot(
    lines: Sequence[Line],
    title: str,
    xlabel: str,
    ylabel: str,
    log_x: bool = True,
    log_y: bool = True,
) -> str:
    """Minimal SVG line chart; non-finite or nonpositive (on log axes) points are skipped."""
    cleaned = []
    for line in lines:
        pts = [(x, y) for x, y in zip(line.xs, line.ys) if _usable(x, y, log_x, log_y)]
        xs = _transform([p[0] for p in pts], log_x)
        ys = _transform([p[1] for p in pts], log_y)
        cleaned.append((line.label, xs, ys))
    all_x = [v for _, xs, _ in cleaned for v in xs] or [0.0, 1.0]
    all_y = [v for _, _, ys in cleaned for v in ys] or [0.0, 1.0]
    x0, x1 = min(all_x), max(all_x)
    y0, y1 = min(all_y), max(all_y)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    plot_w = _WIDTH - 2 * _MARGIN
    plot_h = _HEIGHT - 2 * _MARGIN

    def px(v: float) -> float:
        return _MARGIN + (v - x0) / (x1 - x0) * plot_w

    def py(v: float) -> float:
        return _HEIGHT - _MARGIN - (v - y0) / (y1 - y0) * plot_h

    def tick(v: float, log: bool) -> str:
        return f"1e{v:.1f}" if log else f"{v:.3g}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2}" y="{_MARGIN / 2}" text-anchor="middle" '
        f'font-size="16">{escape(title)}</text>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black"/>',
        f'<text x="{_WIDTH / 2}" y="{_HEIGHT - 15}" text-anchor="middle" '
        f'font-size="13">{escape(xlabel)}</text>',
        f'<text x="15" y="{_HEIGHT / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 15 {_HEIGHT / 2})">{escape(ylabel)}</text>',
    ]
    for v, anchor in ((x0, "start"), (x1, "end")):
        parts.append(
            f'<text x="{px(v):.1f}" y="{_HEIGHT - _MARGIN + 16}" text-anchor="{anchor}" '
            f'font-size="11">{tick(v, log_x)}</text>'
        )
    for v in (y0, y1):
        parts.append(
            f'<text x="{_MARGIN - 4}" y="{py(v):.1f}" text-anchor="end" '
            f'font-size="11">{tick(v, log_y)}</text>'
        )
    for k, (label, xs, ys) in enumerate(cleaned):
        color = _PALETTE[k % len(_PALETTE)]
        if xs:
            points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
            parts.append(
                f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        parts.append(
            f'<text x="{_MARGIN + 8}" y="{_MARGIN + 16 + 14 * k}" fill="{color}" '
            f'font-size="12">{escape(label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def convergence_svg(result: StudyResult, title: str) -> str:
    m = len(result.slopes)
    lines = [
        Line(f"q{j}", [r.tau for r in result.rows], [r.errors[j] for r in result.rows])
        for j in range(m)
    ]
    return svg_plot(lines, title, "tau", "L2 error at T")


def growth_svg(series: Sequence[GrowthSeries], title: str) -> str:
    lines = [Line(s.label, s.times, s.errors) for s in series]
    return svg_plot(lines, title, "t", "L2 error of q0")


def write_outputs(directory: Path, files: dict[str, str]) -> list[Path]:
    """Write ``{filename: text}`` under ``directory`` in sorted filename order."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(files):
        path = directory / name
        path.write_text(files[name], encoding="utf-8")
        logger.info("Wrote %s", path)
        written.append(path)
    return written
