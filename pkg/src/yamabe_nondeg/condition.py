"""The nondegeneracy inequality

    g''(x) < (n-2)/(n-1) * g'(x)^2 / g(x)     for all x in (0, pi).

The margin RHS - LHS is sampled on a uniform interior grid with dyadic
refinement towards both endpoints. At the endpoints themselves it is a 0/0
limit, which ``endpoint_limits`` supplies in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .series import DEFAULT_TOL, GKernel, p_sum

ENDPOINT_REACH = 1e-6


@dataclass(frozen=True)
class ConditionReport:
    n: int
    holds: bool
    min_margin: float
    argmin_x: float
    grid_size: int
    endpoint_zero_ratio: float
    endpoint_pi_lhs: float


def _check_n(n):
    if not isinstance(n, (int, np.integer)) or n < 4:
        raise DomainError(f"invalid n: need an integer n >= 4, got {n!r}")
    return int(n)


def condition_grid(grid_size: int) -> np.ndarray:
    """Sorted sample points in (0, pi).

    ``grid_size`` uniform interior points, plus dyadic points
    h/2, h/4, ... down to 1e-6 next to each endpoint, h being the spacing.
    """
    h = math.pi / (grid_size + 1)
    interior = h * np.arange(1, grid_size + 1)
    near = []
    d = 0.5 * h
    while d > ENDPOINT_REACH:
        near.append(d)
        d *= 0.5
    near.append(ENDPOINT_REACH)
    near = np.array(near)
    return np.unique(np.concatenate([near, interior, math.pi - near]))


def margin(n: int, x, tol: float = DEFAULT_TOL):
    """(n-2)/(n-1) g'^2/g - g'' at points of (0, pi]."""
    n = _check_n(n)
    kern = GKernel(n, tol)
    g = kern.g(x)
    dg = kern.dg(x)
    d2g = kern.d2g(x)
    return (n - 2) / (n - 1) * dg * dg / g - d2g


def endpoint_limits(n: int, tol: float = DEFAULT_TOL):
    """(zero_ratio, pi_lhs): lim_{x->0+} RHS/LHS and g''(pi)."""
    n = _check_n(n)
    zero_ratio = 2.0 * (n - 2) / (n - 1)
    pi_lhs = p_sum(n - 2, math.pi, tol)
    return zero_ratio, pi_lhs


def check_condition(n: int, grid_size: int = 4096, tol: float = DEFAULT_TOL) -> ConditionReport:
    n = _check_n(n)
    if not isinstance(grid_size, (int, np.integer)) or grid_size < 16:
        raise DomainError(f"grid too coarse: grid_size must be >= 16, got {grid_size!r}")
    x = condition_grid(int(grid_size))
    m = margin(n, x, tol)
    j = int(np.argmin(m))
    zero_ratio, pi_lhs = endpoint_limits(n, tol)
    min_margin = float(m[j])
    holds = bool(min_margin > 0.0 and zero_ratio > 1.0 and pi_lhs < 0.0)
    return ConditionReport(
        n=n,
        holds=holds,
        min_margin=min_margin,
        argmin_x=float(x[j]),
        grid_size=int(grid_size),
        endpoint_zero_ratio=zero_ratio,
        endpoint_pi_lhs=float(pi_lhs),
    )


# Normalisation between the series g in dimension 4 and t^2 (1-t)^2, x = 2 pi t.
N4_SCALE = math.pi**4 / 3.0


@dataclass(frozen=True)
class ReducedN4Report:
    holds: bool
    holds_printed_variant: bool
    implied_by_series: bool
    max_normalised_gap: float
    min_margin: float


def reduced_n4_margin(t):
    """(8/3)(1-2t)^2 - (12t^2 - 12t + 2), the n=4 margin for g = t^2 (1-t)^2."""
    t = np.asarray(t, dtype=np.float64)
    return (8.0 / 3.0) * (1.0 - 2.0 * t) ** 2 - (12.0 * t * t - 12.0 * t + 2.0)


def reduced_n4_report(grid_size: int = 4096, tol: float = DEFAULT_TOL) -> ReducedN4Report:
    """Check the polynomial n=4 inequality and compare it with the series margin.

    With g_x(x) = (pi^4/3) g_t(x / 2pi) the margins satisfy
    margin_x = (pi^4/3) / (4 pi^2) * margin_t, so after rescaling the two
    must agree pointwise. The variant with (1+t)^2 on the right, as it is
    sometimes printed, is evaluated too.
    """
    if grid_size < 16:
        raise DomainError("grid too coarse")
    t = np.arange(1, grid_size + 1) / (2.0 * (grid_size + 1))
    poly = reduced_n4_margin(t)
    printed = (8.0 / 3.0) * (1.0 + t) ** 2 - (12.0 * t * t - 12.0 * t + 2.0)
    series_margin = margin(4, 2.0 * math.pi * t, tol) * (4.0 * math.pi**2) / N4_SCALE
    gap = np.abs(series_margin - poly)
    implied = bool(np.all(np.sign(series_margin) == np.sign(poly)))
    return ReducedN4Report(
        holds=bool(np.all(poly > 0.0)),
        holds_printed_variant=bool(np.all(printed > 0.0)),
        implied_by_series=implied,
        max_normalised_gap=float(np.max(gap)),
        min_margin=float(np.min(poly)),
    )


def reduced_n4_check(grid_size: int = 4096) -> bool:
    """True when the reduced inequality holds on (0, 1/2) and agrees with the series."""
    rep = reduced_n4_report(grid_size)
    return rep.holds and rep.implied_by_series and rep.max_normalised_gap <= 1e-9
