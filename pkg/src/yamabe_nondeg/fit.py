"""Least-squares order fits on log-log data."""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def loglog_slope(xs, ys) -> float:
    """Slope of the least-squares line through (log x, log |y|)."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.abs(np.asarray(ys, dtype=np.float64))
    if x.shape != y.shape or x.size < 2:
        raise DomainError("need at least two matching samples")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("log-log fit needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
