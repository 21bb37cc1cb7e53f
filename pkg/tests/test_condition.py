import math

import numpy as np
import pytest

from yamabe_nondeg.condition import (
    N4_SCALE,
    check_condition,
    condition_grid,
    endpoint_limits,
    margin,
    reduced_n4_check,
    reduced_n4_margin,
    reduced_n4_report,
)
from yamabe_nondeg.errors import DomainError
from yamabe_nondeg.series import GKernel


def test_n4_g_is_a_quartic():
    t = np.linspace(0.0, 0.5, 101)
    g = GKernel(4).g(2 * math.pi * t)
    assert np.max(np.abs(g / N4_SCALE - t * t * (1 - t) ** 2)) <= 1e-13


@pytest.mark.parametrize("n", [4, 5, 6, 9, 16])
def test_condition_holds(n):
    rep = check_condition(n, grid_size=512)
    assert rep.holds
    assert rep.min_margin > 0
    assert rep.endpoint_zero_ratio == pytest.approx(2 * (n - 2) / (n - 1))
    assert rep.endpoint_pi_lhs < 0


def test_grid_stability_of_verdict():
    assert check_condition(4, 64).holds == check_condition(4, 4096).holds


def test_grid_reaches_endpoints():
    x = condition_grid(64)
    assert x[0] <= 1e-6 + 1e-18 and math.pi - x[-1] <= 1e-6 + 1e-15
    assert np.all(np.diff(x) > 0)


def test_margin_near_zero_matches_limit_ratio():
    # RHS/LHS -> 2(n-2)/(n-1) as x -> 0
    n = 6
    gk = GKernel(n)
    x = 1e-4
    rhs = (n - 2) / (n - 1) * gk.dg(x) ** 2 / gk.g(x)
    assert rhs / gk.d2g(x) == pytest.approx(endpoint_limits(n)[0], rel=1e-6)


def test_reduced_n4():
    rep = reduced_n4_report(1024)
    assert rep.holds and rep.implied_by_series
    assert rep.max_normalised_gap <= 1e-9
    assert reduced_n4_check(1024)
    assert reduced_n4_margin(0.25) == pytest.approx(8 / 3 * 0.25 - (12 / 16 - 3 + 2))


def test_domain_errors():
    with pytest.raises(DomainError):
        check_condition(3)
    with pytest.raises(DomainError):
        check_condition(4, grid_size=8)
    with pytest.raises(DomainError):
        margin(2.5, 1.0)
