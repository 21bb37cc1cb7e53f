import math

import numpy as np
import pytest

from oracles import XI_N4, mu_n4
from yamabe_nondeg.circulant import Circulant, eigenvalues
from yamabe_nondeg.errors import DomainError, ScaleOverflowError
from yamabe_nondeg.interaction import (
    Affine,
    Configuration,
    analytic_eigenvalues,
    asymptotic_check,
    coefficient_table,
    entry_row,
    mode_coefficients,
    mu_solve,
    phase_tables,
    trig_kernel_sum,
    xi_value,
)
from yamabe_nondeg.modes import ell_scan


def brute(cfg, m, num, expo, phase):
    """The defining sum, written out term by term."""
    total = 0.0
    for l in range(2, cfg.k + 1):
        th = 2 * math.pi * (l - 1) / cfg.k
        ph = {"cos": math.cos(m * th), "sin": math.sin(m * th), "versin": 1 - math.cos(m * th)}[phase]
        total += num(th) * ph / (1 - math.cos(th)) ** expo
    return total


@pytest.mark.parametrize("k", [4, 8, 16, 33])
def test_mu_n4_closed_form(k):
    assert mu_solve(4, k) == pytest.approx(mu_n4(k), rel=1e-13)


def test_mu_balances():
    n, k = 7, 12
    mu = mu_solve(n, k)
    a = (n - 2) / 2
    th = 2 * np.pi * np.arange(1, k) / k
    assert mu**a * np.sum((1 - np.cos(th)) ** -a) == pytest.approx(1.0, rel=1e-13)


def test_trig_kernel_sum_against_brute_force():
    cfg = Configuration.build(5, 9)
    for m in range(9):
        got = trig_kernel_sum(cfg, m, Affine(0.5, -2.0), 2.5, "versin")
        want = brute(cfg, m, lambda t: 0.5 - 2 * math.cos(t), 2.5, "versin")
        assert got == pytest.approx(want, rel=1e-12, abs=1e-12)
        got = trig_kernel_sum(cfg, m, "sin", 2.5, "sin")
        assert got == pytest.approx(brute(cfg, m, math.sin, 2.5, "sin"), rel=1e-12, abs=1e-11)


def test_coefficients_against_brute_force():
    n, k = 6, 10
    cfg = Configuration.build(n, k)
    a, h = (n - 2) / 2, n / 2
    for m in range(k):
        c = mode_coefficients(cfg, m)
        assert c.abar == pytest.approx(-a * brute(cfg, m, lambda t: 1.0, a, "cos"), rel=1e-12)
        assert c.cbar == pytest.approx(a * brute(cfg, m, math.sin, h, "sin"), rel=1e-11, abs=1e-10)
        g = -brute(cfg, m, lambda t: a * math.cos(t) + h, h, "versin")
        assert c.gbar == pytest.approx(g, rel=1e-12, abs=1e-10)
        # hbar = sum (cos(m th) - cos th) / (1 - cos th)^{n/2}; the second part is brute(.., m=0)
        hb = brute(cfg, m, lambda t: 1.0, h, "cos") - brute(cfg, 0, math.cos, h, "cos")
        assert c.hbar == pytest.approx(hb, rel=1e-12, abs=1e-10)
        assert c.bbar == -c.abar and c.dbar == -c.cbar
        assert c.fb == pytest.approx(c.fbar + c.bbar, rel=1e-10, abs=1e-8)


@pytest.mark.parametrize("n,k", [(4, 8), (5, 16), (8, 7)])
def test_structural_zeros(n, k):
    t = coefficient_table(Configuration.build(n, k))
    assert t.gbar[0] == 0.0 and t.cbar[0] == 0.0
    assert t.hbar[1] == 0.0 and t.fb[1] == 0.0
    assert t.fb[k - 1] == 0.0
    assert np.all(t.fb == -t.hbar)
    # parity between m and k - m is exact
    assert np.all(t.abar[1:] == t.abar[1:][::-1])
    assert np.all(t.cbar[1:] == -t.cbar[1:][::-1])


def test_phase_tables_mirrored():
    t = phase_tables(12)
    assert np.all(t["cos"][1:] == t["cos"][1:][::-1])
    assert np.all(t["sin"][1:] == -t["sin"][1:][::-1])
    assert t["sin"][6] == 0.0


@pytest.mark.parametrize("which", ["A", "B", "C", "D", "F", "G", "H"])
def test_entry_rows_reproduce_eigenvalues(which):
    cfg = Configuration.build(5, 16)
    dft = eigenvalues(Circulant(entry_row(cfg, which))).values
    ref = analytic_eigenvalues(cfg, which)
    assert np.max(np.abs(dft - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_xi_value():
    xi = xi_value(4)
    assert xi.value == pytest.approx(XI_N4, rel=1e-14)
    assert xi.relative_gap <= 1e-8


def test_asymptotics_two_sided_small():
    cfg = Configuration.build(5, 128)
    dev = asymptotic_check(cfg, 64)
    assert dev.dev_a_two_sided < 1e-2
    assert dev.dev_c is None  # g'(pi) = 0
    with pytest.raises(DomainError):
        asymptotic_check(cfg, 3)


def test_errors():
    with pytest.raises(DomainError):
        Configuration.build(3, 8)
    with pytest.raises(DomainError):
        Configuration.build(4, 1)
    with pytest.raises(ScaleOverflowError):
        ell_scan(Configuration.build(48, 2048))
    with pytest.raises(DomainError):
        entry_row(Configuration.build(4, 4), "Q")


def test_case2_cancellation():
    from yamabe_nondeg.interaction import case2_cancellation

    fit = case2_cancellation(5, (2, 16, 64))
    assert max(fit.ratios) <= 1e-12
    assert fit.slope is None
