"""Least-squares slopes on log-log data."""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Slope of log y against log x over the points with finite positive values.

    Returns ``None`` when fewer than two such points remain.
    """
    pairs = [
        (x, y)
        for x, y in zip(xs, ys)
        if x > 0.0 and y > 0.0 and math.isfinite(x) and math.isfinite(y)
    ]
    if len(pairs) < 2:
        return None
    slope, _ = np.polyfit(np.log([p[0] for p in pairs]), np.log([p[1] for p in pairs]), 1)
    return float(slope)
