import io
import math

import numpy as np
import pytest

from yamabe_nondeg.bubble import (
    BubbleEnsemble,
    Field,
    QuadratureBudget,
    WeightedNormSpec,
    bubble_eval,
    error_eval,
    error_fd_agreement,
    error_field,
    fd_laplacian_sweep,
    field_grid,
    kernel_fields,
    linearized_residual,
    sample_points,
    symmetry_deviations,
    taylor_order_check,
    ustar_eval,
    ustar_field,
    weighted_norm,
    write_grid_csv,
    zero_field,
)
from yamabe_nondeg.errors import DomainError


def test_profile_values():
    s = BubbleEnsemble.single(4)
    assert bubble_eval(s, "base", np.zeros(4))[0] == pytest.approx(2.0)
    assert bubble_eval(s, "base", np.array([1.0, 0, 0, 0]))[0] == pytest.approx(1.0)


def test_gradient_matches_finite_difference(rng):
    ens = BubbleEnsemble.standard(5, 6)
    x = rng.normal(size=5) * 0.7
    for which in ("base", 1, 4):
        v, g = bubble_eval(ens, which, x)
        h = 1e-6 * ens.mu
        num = [(bubble_eval(ens, which, x + h * e)[0] - bubble_eval(ens, which, x - h * e)[0]) / (2 * h) for e in np.eye(5)]
        assert np.allclose(g, num, rtol=1e-6, atol=1e-8 * abs(v))


def test_ensemble_geometry():
    ens = BubbleEnsemble.standard(6, 9)
    r2 = np.sum(ens.centers**2, axis=1)
    assert np.allclose(r2 + ens.mu**2, 1.0, atol=1e-15)
    ang = 2 * math.pi / 9
    rot = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    moved = ens.centers[:, :2] @ rot.T
    assert np.allclose(np.sort(moved, axis=0), np.sort(ens.centers[:, :2], axis=0), atol=1e-14)


def test_bubble_solves_critical_equation():
    ens = BubbleEnsemble.single(4)
    x = sample_points(4, 100, seed=1)
    f = lambda y: bubble_eval(ens, "base", y)[0]
    lap = fd_laplacian_sweep(f, x, 0.05 * np.ones(len(x)))
    rhs = ens.gamma * f(x) ** ens.p
    assert np.max(np.abs(lap + rhs) / rhs) <= 1e-6


@pytest.mark.parametrize("n,k", [(4, 5), (5, 8)])
def test_symmetries(n, k):
    rep = symmetry_deviations(BubbleEnsemble.standard(n, k), samples=300)
    assert rep.rotation <= 1e-12 and rep.evenness <= 1e-12
    assert rep.kelvin <= 1e-10 and rep.error_kelvin <= 1e-9


def test_single_bubble_has_no_error():
    s = BubbleEnsemble.single(5)
    assert np.all(error_eval(s, sample_points(5, 20)) == 0.0)


def test_error_against_fd():
    assert error_fd_agreement(BubbleEnsemble.standard(4, 8), samples=30).max_relative <= 1e-6


def test_error_direct_formula_agrees_with_stable_form(rng):
    ens = BubbleEnsemble.standard(4, 6)
    x = ens.centers[0] + 0.3 * ens.mu * rng.normal(size=(50, 4))
    u = bubble_eval(ens, "base", x)[0]
    ul = sum(bubble_eval(ens, l, x)[0] for l in range(1, 7))
    us = u - ul
    direct = ens.gamma * (np.sign(us) * np.abs(us) ** 3 - u**3 + sum(bubble_eval(ens, l, x)[0] ** 3 for l in range(1, 7)))
    assert np.allclose(error_eval(ens, x), direct, rtol=1e-9, atol=1e-9 * np.max(np.abs(direct)))


def test_single_bubble_kernel():
    s = BubbleEnsemble.single(4)
    kf = kernel_fields(s)
    x = sample_points(4, 30, seed=2)
    for alpha in range(5):
        res, scale = linearized_residual(s, kf.Z(alpha), x)
        assert np.max(np.abs(res) / scale) <= 1e-6
    assert np.max(np.abs(kf.z(5)(x))) <= 1e-15


def test_kernel_field_count_and_decomposition():
    ens = BubbleEnsemble.standard(4, 6)
    kf = kernel_fields(ens)
    assert len(kf.fields()) == 12
    x = sample_points(4, 40, seed=4)
    z0 = kf.z(0)(x)
    dec = kf.Z(0)(x) - sum(kf.Z_l(0, l)(x) + kf.Z_l(1, l)(x) for l in range(1, 7))
    assert np.max(np.abs(z0 - dec)) <= 1e-12 * np.max(np.abs(z0))
    # z_1 = Z_1 - sum_l [cos th Z_{1l} - sin th Z_{2l}] / sqrt(1 - mu^2)
    th = 2 * np.pi * np.arange(6) / 6
    z1 = kf.Z(1)(x) - sum(
        (math.cos(th[l - 1]) * kf.Z_l(1, l)(x) - math.sin(th[l - 1]) * kf.Z_l(2, l)(x)) / math.sqrt(1 - ens.mu**2)
        for l in range(1, 7)
    )
    assert np.max(np.abs(kf.z(1)(x) - z1)) <= 1e-12 * np.max(np.abs(z1))


def test_rotation_field_is_derivative_of_rotation(rng):
    ens = BubbleEnsemble.standard(5, 7)
    kf = kernel_fields(ens)
    x = rng.normal(size=5) * 0.8
    h = 1e-5

    def rot(t):
        y = x.copy()
        y[0], y[1] = math.cos(t) * x[0] - math.sin(t) * x[1], math.sin(t) * x[0] + math.cos(t) * x[1]
        return ustar_eval(ens, y)

    num = (rot(h) - rot(-h)) / (2 * h)
    assert kf.z(6)(x) == pytest.approx(num, rel=1e-7, abs=1e-9)


def test_weighted_norm_basics():
    ens = BubbleEnsemble.standard(4, 8)
    spec = WeightedNormSpec(3.0)
    assert weighted_norm(ens, zero_field(4), spec, 4) == 0.0
    with pytest.raises(DomainError):
        WeightedNormSpec(2.0, n=4)
    with pytest.raises(DomainError):
        weighted_norm(ens, error_field(ens), WeightedNormSpec(4.5))
    asym = Field("x1", 4, lambda x: x[..., 0])
    with pytest.raises(DomainError):
        weighted_norm(ens, asym, spec)
    assert weighted_norm(ens, asym, WeightedNormSpec(3.0, "nminus2"), points=np.array([[1.0, 0, 0, 0]])) == 2.0


def test_weighted_norm_budget_stability():
    ens = BubbleEnsemble.standard(4, 16)
    spec = WeightedNormSpec(3.0)
    a = weighted_norm(ens, error_field(ens), spec, QuadratureBudget(6))
    b = weighted_norm(ens, error_field(ens), spec, QuadratureBudget(6).doubled())
    assert abs(a - b) <= 1e-2 * abs(b)


def test_weighted_norm_tail_path():
    # U^p declared only through its decay goes through the ball-plus-tail
    # path; compare with the radial integral
    from yamabe_nondeg.quad import half_line_integral, sphere_area

    s = BubbleEnsemble.single(4)
    up = Field("U^p", 4, lambda x: (2 / (1 + np.sum(x * x, axis=-1))) ** 3, decay=6, symmetric=True)
    spec = WeightedNormSpec(3.0)
    got = weighted_norm(s, up, spec, 8)
    w = spec.weight_exponent(4) * 3.0
    ref = sphere_area(4) * half_line_integral(lambda r: (1 + r) ** w * (2 / (1 + r * r)) ** 9 * r**3)
    assert got == pytest.approx(ref ** (1 / 3), rel=2e-2)
    # U_* decays like |x|^{2-n}: too slow for this weight
    with pytest.raises(DomainError):
        weighted_norm(s, ustar_field(s), spec, 4)


def test_taylor_orders():
    rep = taylor_order_check(BubbleEnsemble.standard(4, 16))
    assert rep.ok
    assert rep.leading_ratio == pytest.approx(1.0, abs=1e-3)
    assert abs(rep.literal_prefactor_order - 2.0) <= 0.4
    with pytest.raises(DomainError):
        taylor_order_check(BubbleEnsemble.standard(4, 16), y=np.ones(4))


def test_grid_csv():
    ens = BubbleEnsemble.standard(4, 4)
    pts = field_grid(ens, size=3)
    buf = io.StringIO()
    text = write_grid_csv(pts, ustar_eval(ens, pts), buf)
    lines = text.splitlines()
    assert lines[0] == "x1,x2,x3,x4,value"
    assert len(lines) == 10
    assert buf.getvalue() == text


def test_errors():
    with pytest.raises(DomainError):
        BubbleEnsemble(4, 1, 0.1)
    with pytest.raises(DomainError):
        BubbleEnsemble(4, 5, 1.5)
    with pytest.raises(DomainError):
        bubble_eval(BubbleEnsemble.standard(4, 5), 9, np.zeros(4))
    with pytest.raises(DomainError):
        ustar_eval(BubbleEnsemble.standard(4, 5), np.zeros(3))
