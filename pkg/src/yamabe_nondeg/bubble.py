"""Bubble towers: the approximate solution U_*, its error and kernel fields.

The ensemble consists of the standard bubble U(x) = (2/(1+|x|^2))^{(n-2)/2}
and k satellites U_l(x) = mu^{-(n-2)/2} U((x - xi_l)/mu) centred on

    xi_l = sqrt(1 - mu^2) (cos theta_l, sin theta_l, 0, ..., 0),

with U_* = U - sum_l U_l. Because mu^2 + |xi_l|^2 = 1 each satellite is
mapped to itself by the Kelvin transform, so U_* is Kelvin invariant.

All evaluators take points as arrays of shape (..., n) and broadcast.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import DomainError, QuadratureError
from .fit import loglog_slope
from .interaction import mu_solve, phase_tables
from .quad import sphere_area

BASE = "base"


def _check_n(n):
    if not isinstance(n, (int, np.integer)) or n < 4:
        raise DomainError(f"invalid n: need an integer n >= 4, got {n!r}")
    return int(n)


@dataclass(frozen=True, eq=False)
class BubbleEnsemble:
    """The data (n, k, mu) of U_*.

    ``single(n)`` is the ensemble without satellites (k = 0), for which U_*
    is the exact solution U; its ``mu`` is NaN.
    """

    n: int
    k: int
    mu: float

    def __post_init__(self):
        _check_n(self.n)
        if self.k == 0:
            return
        if not isinstance(self.k, (int, np.integer)) or self.k < 2:
            raise DomainError(f"invalid k: need k = 0 or an integer k >= 2, got {self.k!r}")
        if not 0.0 < self.mu < 1.0:
            raise DomainError(f"mu must lie in (0, 1), got {self.mu!r}")

    @classmethod
    def standard(cls, n: int, k: int) -> "BubbleEnsemble":
        return cls(int(n), int(k), mu_solve(n, k))

    @classmethod
    def single(cls, n: int) -> "BubbleEnsemble":
        return cls(int(n), 0, math.nan)

    @property
    def a(self) -> float:
        return 0.5 * (self.n - 2)

    @property
    def p(self) -> float:
        return (self.n + 2) / (self.n - 2)

    @property
    def gamma(self) -> float:
        return 0.25 * self.n * (self.n - 2)

    @cached_property
    def thetas(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.k) / self.k if self.k else np.zeros(0)

    @cached_property
    def centers(self) -> np.ndarray:
        """xi_1 .. xi_k as a (k, n) array."""
        out = np.zeros((self.k, self.n))
        if self.k:
            t = phase_tables(self.k)
            r = math.sqrt(1.0 - self.mu * self.mu)
            out[:, 0] = r * t["cos"]
            out[:, 1] = r * t["sin"]
        return out

    def center(self, l: int) -> np.ndarray:
        """xi_l for l = 1 .. k."""
        if not 1 <= l <= self.k:
            raise DomainError(f"bubble index {l} out of range 1..{self.k}")
        return self.centers[l - 1]


def _points(ens: BubbleEnsemble, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (ens.n,):
        raise DomainError(f"points must have trailing dimension n = {ens.n}, got shape {x.shape}")
    return x


def _profile(a: float, y: np.ndarray):
    """U(y) and grad U(y) = -2a y U / (1 + |y|^2)."""
    q = 1.0 + np.sum(y * y, axis=-1)
    u = (2.0 / q) ** a
    grad = (-2.0 * a * u / q)[..., None] * y
    return u, grad


def _satellites(ens: BubbleEnsemble, x: np.ndarray, gradient: bool = False):
    """U_l at every point, shape (..., k), plus gradients (..., k, n) on request."""
    a, mu = ens.a, ens.mu
    if ens.k == 0:
        shape = x.shape[:-1] + (0,)
        return np.zeros(shape), (np.zeros(shape + (ens.n,)) if gradient else None)
    y = (x[..., None, :] - ens.centers) / mu
    u, g = _profile(a, y)
    amp = mu ** (-a)
    return amp * u, (amp / mu * g if gradient else None)


def bubble_eval(ens: BubbleEnsemble, which, x):
    """(value, gradient) of U (``which="base"``) or of U_l (``which=l``, 1-based)."""
    x = _points(ens, x)
    if which == BASE:
        return _profile(ens.a, x)
    if isinstance(which, (int, np.integer)) and 1 <= which <= ens.k:
        y = (x - ens.centers[which - 1]) / ens.mu
        u, g = _profile(ens.a, y)
        amp = ens.mu ** (-ens.a)
        return amp * u, amp / ens.mu * g
    raise DomainError(f"which must be 'base' or a bubble index in 1..{ens.k}, got {which!r}")


def ustar_eval(ens: BubbleEnsemble, x):
    x = _points(ens, x)
    u, _ = _profile(ens.a, x)
    ul, _ = _satellites(ens, x)
    return u - np.sum(ul, axis=-1)


def ustar_gradient(ens: BubbleEnsemble, x):
    x = _points(ens, x)
    _, g = _profile(ens.a, x)
    _, gl = _satellites(ens, x, gradient=True)
    return g - np.sum(gl, axis=-2)


def signed_power(u, p):
    """sign(u) |u|^p, smooth through u = 0."""
    return np.sign(u) * np.abs(u) ** p


def error_eval(ens: BubbleEnsemble, x):
    """E = gamma (|U_*|^{p-1} U_* - U^p + sum_l U_l^p) in closed form.

    Inside a bubble core U_* = R - U_j with U_j dominant, and the two large
    terms -|U_j - R|^p + U_j^p are combined as -U_j^p expm1(p log1p(-R/U_j))
    to avoid cancellation.
    """
    x = _points(ens, x)
    p, gam = ens.p, ens.gamma
    u, _ = _profile(ens.a, x)
    if ens.k == 0:
        return np.zeros(x.shape[:-1])
    ul, _ = _satellites(ens, x)
    j = np.argmax(ul, axis=-1)
    uj = np.take_along_axis(ul, j[..., None], axis=-1)[..., 0]
    rest = np.sum(ul, axis=-1) - uj
    r = u - rest  # U_* = r - uj
    ustar = r - uj
    neg = ustar < 0.0
    ratio = np.where(neg, r / uj, 0.0)
    paired = np.where(
        neg,
        -(uj**p) * np.expm1(p * np.log1p(-ratio)),
        signed_power(ustar, p) + uj**p,
    )
    others = np.sum(ul**p, axis=-1) - uj**p
    return gam * (paired - u**p + others)


def error_scale(ens: BubbleEnsemble, x):
    """gamma (|U_*|^p + U^p + sum U_l^p): magnitude of the terms that make up E."""
    x = _points(ens, x)
    u, _ = _profile(ens.a, x)
    ul, _ = _satellites(ens, x)
    us = u - np.sum(ul, axis=-1)
    return ens.gamma * (np.abs(us) ** ens.p + u**ens.p + np.sum(ul**ens.p, axis=-1))


def ustar_scale(ens: BubbleEnsemble, x):
    """U + sum U_l, the size of the terms in U_*."""
    x = _points(ens, x)
    u, _ = _profile(ens.a, x)
    ul, _ = _satellites(ens, x)
    return u + np.sum(ul, axis=-1)


# ---------------------------------------------------------------- fields


@dataclass(frozen=True, eq=False)
class Field:
    """A real function on n-space.

    ``kelvin_weight`` is w when h(x) = |x|^{-w} h(x/|x|^2); ``decay`` is d
    when |h(x)| <= C |x|^{-d} at infinity. ``symmetric`` declares invariance
    under the ensemble's symmetry group (rotation by 2 pi/k in the (x1, x2)
    plane, x2 -> -x2 and rotations of (x3, ..., xn)).
    """

    name: str
    n: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray] | None = None
    kelvin_weight: float | None = None
    decay: float | None = None
    symmetric: bool = False

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1:] != (self.n,):
            raise DomainError(f"points must have trailing dimension n = {self.n}")
        return self.value(x)


def zero_field(n: int) -> Field:
    # the zero function has every Kelvin weight; declaring n + 2 selects the tail-free path
    return Field(
        "zero", n, lambda x: np.zeros(x.shape[:-1]), lambda x: np.zeros_like(x), kelvin_weight=n + 2, symmetric=True
    )


def ustar_field(ens: BubbleEnsemble) -> Field:
    return Field(
        "U_*",
        ens.n,
        lambda x: ustar_eval(ens, x),
        lambda x: ustar_gradient(ens, x),
        kelvin_weight=ens.n - 2,
        decay=ens.n - 2,
        symmetric=True,
    )


def error_field(ens: BubbleEnsemble) -> Field:
    return Field("E", ens.n, lambda x: error_eval(ens, x), kelvin_weight=ens.n + 2, decay=ens.n + 2, symmetric=True)


@dataclass(frozen=True, eq=False)
class KernelFields:
    """The 3n fields z_0 .. z_{3n-1} built from U_*, and the per-bubble Z fields."""

    ensemble: BubbleEnsemble

    @property
    def count(self) -> int:
        return 3 * self.ensemble.n

    def z(self, alpha: int) -> Field:
        n = self.ensemble.n
        if not 0 <= alpha < 3 * n:
            raise DomainError(f"alpha must lie in 0..{3 * n - 1}")
        return Field(f"z_{alpha}", n, lambda x: _z_value(self.ensemble, alpha, x))

    def fields(self) -> list:
        return [self.z(alpha) for alpha in range(self.count)]

    def Z(self, alpha: int) -> Field:
        """Z_0 = a U + grad U . x and Z_alpha = d_alpha U of the standard bubble."""
        ens = self.ensemble
        if not 0 <= alpha <= ens.n:
            raise DomainError(f"alpha must lie in 0..{ens.n}")

        def value(x):
            u, g = _profile(ens.a, x)
            if alpha == 0:
                return ens.a * u + np.sum(g * x, axis=-1)
            return g[..., alpha - 1]

        return Field(f"Z_{alpha}", ens.n, value)

    def Z_l(self, alpha: int, l: int) -> Field:
        """Per-bubble fields Z_{alpha,l}; alpha = 0, 1, 2 are the dilation and
        the radial / tangential translations, alpha >= 3 is d_alpha U_l."""
        ens = self.ensemble
        ens.center(l)
        if not 0 <= alpha <= ens.n:
            raise DomainError(f"alpha must lie in 0..{ens.n}")
        theta = float(ens.thetas[l - 1])
        tab = phase_tables(ens.k)
        c, s = tab["cos"][l - 1], tab["sin"][l - 1]
        rad = math.sqrt(1.0 - ens.mu**2)
        xi = ens.centers[l - 1]

        def value(x):
            u, g = bubble_eval(ens, l, x)
            if alpha == 0:
                return ens.a * u + np.sum(g * (x - xi), axis=-1)
            if alpha == 1:
                return rad * (c * g[..., 0] + s * g[..., 1])
            if alpha == 2:
                return rad * (-s * g[..., 0] + c * g[..., 1])
            return g[..., alpha - 1]

        return Field(f"Z_{alpha},{l} (theta = {theta:.6g})", ens.n, value)


def kernel_fields(ens: BubbleEnsemble) -> KernelFields:
    return KernelFields(ens)


def _z_value(ens: BubbleEnsemble, alpha: int, x: np.ndarray):
    n = ens.n
    u = ustar_eval(ens, x)
    g = ustar_gradient(ens, x)
    z0 = ens.a * u + np.sum(g * x, axis=-1)

    def zi(i):  # z_i = d_i U_*, i = 1..n
        return g[..., i - 1]

    x1, x2 = x[..., 0], x[..., 1]
    r2 = np.sum(x * x, axis=-1)
    if alpha == 0:
        return z0
    if alpha <= n:
        return zi(alpha)
    if alpha == n + 1:
        return -x2 * zi(1) + x1 * zi(2)
    if alpha == n + 2:
        return -2.0 * x1 * z0 + r2 * zi(1)
    if alpha == n + 3:
        return -2.0 * x2 * z0 + r2 * zi(2)
    if alpha <= 2 * n + 1:
        l = alpha - n - 1
        return -x[..., l - 1] * zi(1) + x1 * zi(l)
    l = alpha - 2 * n + 1
    return -x[..., l - 1] * zi(2) + x2 * zi(l)


# ---------------------------------------------------------------- finite differences


def fd_laplacian(f: Callable[[np.ndarray], np.ndarray], x, h):
    """Fourth-order central difference Laplacian of f at points x, step h (scalar or per point)."""
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    hh = h[..., None] if h.ndim else h
    f0 = f(x)
    acc = -30.0 * x.shape[-1] * f0
    for i in range(x.shape[-1]):
        e = np.zeros(x.shape[-1])
        e[i] = 1.0
        acc = acc + 16.0 * (f(x + hh * e) + f(x - hh * e)) - (f(x + 2.0 * hh * e) + f(x - 2.0 * hh * e))
    return acc / (12.0 * h * h)


def fd_laplacian_sweep(f, x, base_step, factors=(1.0, 0.5, 0.25, 0.125)):
    """Laplacian by a step sweep: keep, per point, the estimate that agrees
    best with the next smaller step (truncation and round-off balanced)."""
    ests = [fd_laplacian(f, x, base_step * c) for c in factors]
    diffs = np.stack([np.abs(ests[i] - ests[i + 1]) for i in range(len(ests) - 1)])
    best = np.argmin(diffs, axis=0)
    stacked = np.stack(ests[1:])
    return np.take_along_axis(stacked, best[None, ...], axis=0)[0]


def _local_step(ens: BubbleEnsemble, x, frac=0.05):
    """A step proportional to the distance to the nearest singular scale."""
    x = np.asarray(x, dtype=np.float64)
    scale = np.ones(x.shape[:-1])
    if ens.k:
        d = np.linalg.norm(x[..., None, :] - ens.centers, axis=-1)
        near = np.min(np.sqrt(d * d + ens.mu**2), axis=-1)
        scale = np.minimum(scale, near)
    return frac * scale


def error_fd(ens: BubbleEnsemble, x):
    """E by finite differences: fd Laplacian of U_* plus gamma |U_*|^{p-1} U_*."""
    x = _points(ens, x)
    lap = fd_laplacian_sweep(lambda y: ustar_eval(ens, y), x, _local_step(ens, x))
    return lap + ens.gamma * signed_power(ustar_eval(ens, x), ens.p)


def linearized_residual(ens: BubbleEnsemble, fld: Field, x):
    """(L_U Z, scale) with L_U Z = Delta Z + p gamma U^{p-1} Z by finite differences.

    Uses the standard bubble U; ``scale`` = |Delta Z| + |p gamma U^{p-1} Z|.
    """
    x = _points(ens, x)
    u, _ = _profile(ens.a, x)
    lap = fd_laplacian_sweep(fld, x, 0.05 * np.ones(x.shape[:-1]))
    pot = ens.p * ens.gamma * u ** (ens.p - 1.0) * fld(x)
    return lap + pot, np.abs(lap) + np.abs(pot)


# ---------------------------------------------------------------- symmetries


def kelvin_image(x):
    x = np.asarray(x, dtype=np.float64)
    return x / np.sum(x * x, axis=-1, keepdims=True)


def rotate12(x, angle: float):
    x = np.array(x, dtype=np.float64, copy=True)
    c, s = math.cos(angle), math.sin(angle)
    x1, x2 = x[..., 0].copy(), x[..., 1].copy()
    x[..., 0] = c * x1 - s * x2
    x[..., 1] = s * x1 + c * x2
    return x


def sample_points(n: int, count: int, seed: int = 0, radius: float = 2.0) -> np.ndarray:
    """Deterministic random points with |x| spread over (0, radius)."""
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.uniform(0.02, 1.0, size=count)
    return d * r[:, None]


@dataclass(frozen=True)
class SymmetryReport:
    rotation: float
    evenness: float
    kelvin: float
    error_kelvin: float
    samples: int


def symmetry_deviations(ens: BubbleEnsemble, samples: int = 1000, seed: int = 0) -> SymmetryReport:
    """Maximum relative deviations of U_* from its symmetries, and of E from
    its Kelvin covariance E(x) = |x|^{-n-2} E(x/|x|^2).

    Relative to U + sum U_l (for U_*) and to the term size of E.
    """
    n = ens.n
    x = sample_points(n, samples, seed)
    base = ustar_eval(ens, x)
    ref = ustar_scale(ens, x)
    rot = 0.0
    if ens.k:
        rot = float(np.max(np.abs(ustar_eval(ens, rotate12(x, 2.0 * math.pi / ens.k)) - base) / ref))
    even = 0.0
    for j in range(1, n):
        flip = x.copy()
        flip[:, j] = -flip[:, j]
        even = max(even, float(np.max(np.abs(ustar_eval(ens, flip) - base) / ref)))
    r2 = np.sum(x * x, axis=1)
    xk = kelvin_image(x)
    kel = r2 ** (0.5 * (2 - n)) * ustar_eval(ens, xk)
    kelvin = float(np.max(np.abs(kel - base) / ref))
    e = error_eval(ens, x)
    ek = r2 ** (-0.5 * (n + 2)) * error_eval(ens, xk)
    escale = error_scale(ens, x)
    ekel = float(np.max(np.abs(ek - e) / escale))
    return SymmetryReport(rotation=rot, evenness=even, kelvin=kelvin, error_kelvin=ekel, samples=samples)


def away_from_cores(ens: BubbleEnsemble, count: int, seed: int = 0, clearance: float = 5.0) -> np.ndarray:
    """Sample points at distance >= clearance * mu from every satellite centre."""
    out = []
    s = seed
    while sum(len(c) for c in out) < count:
        x = sample_points(ens.n, 4 * count, s, radius=2.0)
        if ens.k:
            d = np.min(np.linalg.norm(x[:, None, :] - ens.centers, axis=-1), axis=1)
            x = x[d >= clearance * ens.mu]
        out.append(x)
        s += 1
    return np.concatenate(out)[:count]


@dataclass(frozen=True)
class ErrorAgreement:
    max_relative: float
    samples: int


def error_fd_agreement(ens: BubbleEnsemble, samples: int = 50, seed: int = 0) -> ErrorAgreement:
    """Analytic E against the finite-difference oracle, relative to the term size of E."""
    x = away_from_cores(ens, samples, seed)
    an = error_eval(ens, x)
    fd = error_fd(ens, x)
    rel = np.abs(an - fd) / error_scale(ens, x)
    return ErrorAgreement(max_relative=float(np.max(rel)), samples=samples)


# ---------------------------------------------------------------- weighted norms

STARSTAR = "starstar"
NMINUS2 = "nminus2"


@dataclass(frozen=True)
class WeightedNormSpec:
    q: float
    flavor: str = STARSTAR
    n: int | None = None

    def __post_init__(self):
        if self.flavor not in (STARSTAR, NMINUS2):
            raise DomainError(f"flavor must be {STARSTAR!r} or {NMINUS2!r}")
        if self.n is not None:
            self.validate(self.n)

    def validate(self, n: int):
        if not 0.5 * n < self.q < n:
            raise DomainError(f"q must satisfy n/2 < q < n, got q={self.q} for n={n}")

    def weight_exponent(self, n: int) -> float:
        """n + 2 - 2n/q, the power of (1 + |y|) in the starstar norm."""
        return n + 2.0 - 2.0 * n / self.q


@dataclass(frozen=True)
class QuadratureBudget:
    """Gauss-Legendre nodes per panel and direction; panels are graded
    geometrically (ratio 2) from ``core_fraction * mu`` around the satellite."""

    nodes: int = 8
    core_fraction: float = 0.125
    max_doublings: int = 6

    def doubled(self) -> "QuadratureBudget":
        return QuadratureBudget(2 * self.nodes, self.core_fraction, self.max_doublings)


def _graded_breaks(lo, hi, center, hmin):
    pts = {lo, hi}
    if lo < center < hi:
        pts.add(center)
    h = hmin
    while center - h > lo or center + h < hi:
        for c in (center - h, center + h):
            if lo < c < hi:
                pts.add(c)
        h *= 2.0
    return np.array(sorted(pts))


def _panel_rule(breaks, nodes):
    t, w = np.polynomial.legendre.leggauss(nodes)
    a, b = breaks[:-1, None], breaks[1:, None]
    x = 0.5 * (a + b) + 0.5 * (b - a) * t
    wt = 0.5 * (b - a) * w
    return x.ravel(), wt.ravel()


class _ReducedGrid:
    """Nodes of the fundamental domain of the ensemble's symmetry group.

    Coordinates (s, beta, phi): x1 + i x2 = s cos(beta) e^{i phi} and
    |(x3, .., xn)| = s sin(beta), with phi in [0, pi/k] (or [0, pi] without
    satellites) and beta in [0, pi/2]. The volume element is
    |S^{n-3}| s^{n-1} cos(beta) sin(beta)^{n-3}, and the fundamental domain
    covers 1/(2k) of space.
    """

    def __init__(self, ens: BubbleEnsemble, s_max: float, budget: QuadratureBudget):
        n, k = ens.n, ens.k
        mu = ens.mu if k else 1.0
        s0 = math.sqrt(1.0 - mu * mu) if k else 0.0
        hmin = budget.core_fraction * mu
        phi_max = math.pi / k if k else math.pi
        self.mult = 2.0 * k if k else 2.0
        self.s = _panel_rule(_graded_breaks(0.0, s_max, min(s0, s_max), hmin), budget.nodes)
        ang = hmin / max(s0, 0.5)
        self.beta = _panel_rule(_graded_breaks(0.0, 0.5 * math.pi, 0.0, ang), budget.nodes)
        self.phi = _panel_rule(_graded_breaks(0.0, phi_max, 0.0, ang), budget.nodes)
        self.n = n
        self.area = sphere_area(n - 2)

    @property
    def size(self) -> int:
        return self.s[0].size * self.beta[0].size * self.phi[0].size

    def chunks(self, max_points: int = 200_000):
        """Yield (points (m, n), |x| (m,), volume weights (m,))."""
        n = self.n
        b, wb = self.beta
        f, wf = self.phi
        cb, sb = np.cos(b), np.sin(b)
        ang_w = (wb * cb * sb ** (n - 3))[:, None] * wf[None, :]
        cf, sf = np.cos(f), np.sin(f)
        per_s = b.size * f.size
        step = max(1, max_points // per_s)
        s_all, ws_all = self.s
        for i in range(0, s_all.size, step):
            s, ws = s_all[i : i + step], ws_all[i : i + step]
            pts = np.zeros((s.size, b.size, f.size, n))
            r = s[:, None, None] * cb[None, :, None]
            pts[..., 0] = r * cf[None, None, :]
            pts[..., 1] = r * sf[None, None, :]
            pts[..., 2] = s[:, None, None] * sb[None, :, None]
            w = (ws * s ** (n - 1))[:, None, None] * ang_w[None, :, :] * self.area * self.mult
            radius = np.broadcast_to(s[:, None, None], w.shape)
            yield pts.reshape(-1, n), radius.reshape(-1), w.reshape(-1)


def _starstar_power(ens, fld, spec, budget, s_max):
    wq = spec.weight_exponent(ens.n) * spec.q
    total = []
    for pts, rad, w in _ReducedGrid(ens, s_max, budget).chunks():
        total.append(np.sum(w * (1.0 + rad) ** wq * np.abs(fld(pts)) ** spec.q))
    return math.fsum(total)


def _tail(ens, fld, spec, radius, budget):
    """Analytic tail beyond |x| = radius from the declared decay |h| <= C |x|^{-d}."""
    n, q, d = ens.n, spec.q, fld.decay
    wq = spec.weight_exponent(n) * q
    expo = n - 1 + wq - d * q
    if not expo < -1:
        raise DomainError("declared decay too slow for the weighted norm to converge")
    grid = _ReducedGrid(ens, radius, QuadratureBudget(4, budget.core_fraction))
    b, f = grid.beta[0], grid.phi[0]
    bb, ff = np.meshgrid(b, f, indexing="ij")
    pts = np.zeros(bb.shape + (n,))
    pts[..., 0] = radius * np.cos(bb) * np.cos(ff)
    pts[..., 1] = radius * np.cos(bb) * np.sin(ff)
    pts[..., 2] = radius * np.sin(bb)
    c = float(np.max(np.abs(fld(pts)))) * radius**d
    # int_R^inf (1+r)^{wq} r^{n-1-dq} dr <= 2^{wq} ... bounded by (1+1/R)^{wq} R^{expo+1}/(-expo-1)
    bound = (1.0 + 1.0 / radius) ** max(wq, 0.0) * radius ** (expo + 1.0) / (-expo - 1.0)
    return sphere_area(n) * c**q * bound


def weighted_norm(ens: BubbleEnsemble, fld: Field, spec: WeightedNormSpec, budget: QuadratureBudget | int | None = None,
                  points=None) -> float:
    """||h||_** = ||(1+|y|)^{n+2-2n/q} h||_{L^q} or ||h||_{n-2} = sup (1+|y|^{n-2}) |h|.

    The starstar norm is integrated on the fundamental domain of the
    ensemble symmetry, so the field must declare ``symmetric``. A field with
    Kelvin weight n + 2 needs no tail: the weight (1+|y|)^{(n+2)q-2n} is
    itself Kelvin invariant, so the integral over space is twice the one over
    the unit ball. Other fields are integrated over growing balls plus an
    analytic tail until the total moves by less than 1%.

    The n-2 flavour takes the maximum over ``points`` (default: the reduced
    quadrature nodes and their Kelvin images).
    """
    n = ens.n
    spec.validate(n)
    if fld.n != n:
        raise DomainError("field and ensemble dimensions differ")
    if budget is None:
        budget = QuadratureBudget()
    elif isinstance(budget, (int, np.integer)):
        budget = QuadratureBudget(int(budget))
    if spec.flavor == NMINUS2:
        if points is None:
            pts = np.concatenate([c[0] for c in _ReducedGrid(ens, 1.0, QuadratureBudget(4)).chunks()])
            pts = pts[np.linalg.norm(pts, axis=1) > 0]
            points = np.concatenate([pts, kelvin_image(pts)])
        points = np.asarray(points, dtype=np.float64)
        r = np.linalg.norm(points, axis=-1)
        return float(np.max((1.0 + r ** (n - 2)) * np.abs(fld(points))))
    if not fld.symmetric:
        raise DomainError("the starstar quadrature needs a field invariant under the ensemble symmetry")
    if fld.kelvin_weight is not None and fld.kelvin_weight == n + 2:
        return (2.0 * _starstar_power(ens, fld, spec, budget, 1.0)) ** (1.0 / spec.q)
    if fld.decay is None:
        raise DomainError("field declares neither a Kelvin weight nor a decay rate")
    radius, prev = 2.0, None
    for _ in range(budget.max_doublings):
        inner = _starstar_power(ens, fld, spec, budget, radius)
        total = inner + _tail(ens, fld, spec, radius, budget)
        if prev is not None and abs(total - prev) <= 1e-2 * max(abs(total), 1e-300):
            return total ** (1.0 / spec.q)
        prev, radius = total, 2.0 * radius
    raise QuadratureError("quadrature budget exhausted before the tail estimate stabilised")


@dataclass(frozen=True)
class DecayFit:
    ks: tuple
    norms: tuple
    slope: float
    expected: float


def error_norm_decay(n: int, ks, q: float, budget: QuadratureBudget | int | None = None) -> DecayFit:
    """||E||_** for each k and the fitted log-log slope against the predicted 1 - n/q."""
    spec = WeightedNormSpec(q, STARSTAR, n)
    norms = []
    for k in ks:
        ens = BubbleEnsemble.standard(n, int(k))
        norms.append(weighted_norm(ens, error_field(ens), spec, budget))
    return DecayFit(tuple(int(k) for k in ks), tuple(norms), loglog_slope(ks, norms), 1.0 - n / q)


# ---------------------------------------------------------------- Taylor expansions


@dataclass(frozen=True)
class TaylorFit:
    name: str
    expected: float
    order: float
    mus: tuple
    remainders: tuple


@dataclass(frozen=True)
class TaylorReport:
    fits: tuple
    # order of the satellite expansion when the bracket multiplies mu^{n-2}/(1-cos theta)^{(n-2)/2} literally
    literal_prefactor_order: float
    # Z_0(mu^{-1}(xi_l - xi_1)) over its leading term, at the smallest mu
    leading_ratio: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return all(abs(f.order - f.expected) <= self.tolerance for f in self.fits)


def _expansions(n: int, k: int, mu: float, l: int, y: np.ndarray):
    """Relative remainders of the three truncated expansions at one mu."""
    a = 0.5 * (n - 2)
    tab = phase_tables(k)
    rad = math.sqrt(1.0 - mu * mu)
    xi1 = np.zeros(n)
    xi1[0] = rad
    xil = np.zeros(n)
    xil[0], xil[1] = rad * tab["cos"][l - 1], rad * tab["sin"][l - 1]
    vers = tab["versin"][l - 1]

    def U(x):
        return (2.0 / (1.0 + x @ x)) ** a

    # expansion of U(xi_1 + mu y) around its value at xi_1
    pre1 = (2.0 / (1.0 + xi1 @ xi1)) ** a
    br1 = 1.0 - a * y[0] * mu + 0.5 * a * (0.5 * n * (y @ xi1) ** 2 - y @ y) * mu * mu
    r1 = abs(U(xi1 + mu * y) / pre1 - br1)

    # expansion of U(y + (xi_1 - xi_l)/mu)
    diff = xi1 - xil
    dist = math.sqrt(diff @ diff)
    d = diff / mu
    exact2 = U(y + d)
    br2 = (
        1.0
        - a * (diff @ y) * mu / vers
        + 0.5 * a * mu * mu / vers * (-1.0 - y @ y + n * ((diff @ y) / dist) ** 2)
    )
    r2 = abs(exact2 / (2.0 / (d @ d)) ** a - br2)
    literal = mu ** (n - 2) / vers**a
    r2_lit = abs(exact2 / literal - br2)

    # expansion of Z_0(y + (xi_l - xi_1)/mu), Z_0 = a U (1 - |x|^2)/(1 + |x|^2)
    def Z0(x):
        s = x @ x
        return a * U(x) * (1.0 - s) / (1.0 + s)

    lead3 = -a * literal
    br3 = 1.0 - (n - 2) * (-diff @ y) / (dist * dist) * mu
    r3 = abs(Z0(y - d) / lead3 - br3)
    ratio = Z0(-d) / lead3
    return r1, r2, r3, r2_lit, ratio


def taylor_order_check(ens: BubbleEnsemble, y=None, l: int = 2, eta: float = 0.1, sigma: float = 0.0,
                       levels: int = 6, seed: int = 0, tolerance: float = 0.4) -> TaylorReport:
    """Fit the remainder orders in mu of the three truncated expansions.

    mu runs over ens.mu * 2^{-j}, j < levels, with y fixed; the centres move
    with mu so that mu^2 + |xi|^2 = 1 throughout. The default y has half the
    admissible length eta / (mu k^{1+sigma}) and a seeded random direction.
    The two bubble expansions use their exact prefactors, so their
    remainders start at mu^3; the Z_0 expansion is measured against its
    stated leading term, whose remainder starts at mu^2.
    """
    n, k = ens.n, ens.k
    if k < 3:
        raise DomainError("the Taylor checks need at least three satellites")
    if not 2 <= l <= k:
        raise DomainError(f"l must lie in 2..{k}")
    radius = eta / (ens.mu * k ** (1.0 + sigma))
    if y is None:
        rng = np.random.default_rng(seed)
        y = rng.normal(size=n)
        y *= 0.5 * radius / np.linalg.norm(y)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (n,):
        raise DomainError("y must be a point of n-space")
    if np.linalg.norm(y) > radius:
        raise DomainError(f"sample outside the validity region |y| <= {radius:.4g}")
    mus = ens.mu * 0.5 ** np.arange(levels)
    rows = np.array([_expansions(n, k, float(m), l, y) for m in mus])
    names = (("U(xi_1 + mu y)", 3.0), ("U(y + (xi_1 - xi_l)/mu)", 3.0), ("Z_0(y + (xi_l - xi_1)/mu)", 2.0))
    fits = tuple(
        TaylorFit(name, expected, loglog_slope(mus, rows[:, i]), tuple(mus.tolist()), tuple(rows[:, i].tolist()))
        for i, (name, expected) in enumerate(names)
    )
    return TaylorReport(
        fits=fits,
        literal_prefactor_order=loglog_slope(mus, rows[:, 3]),
        leading_ratio=float(rows[-1, 4]),
        tolerance=tolerance,
    )


# ---------------------------------------------------------------- grid export


def field_grid(ens: BubbleEnsemble, extent: float = 2.0, size: int = 65) -> np.ndarray:
    """A size x size grid of the (x1, x2) plane, other coordinates zero."""
    t = np.linspace(-extent, extent, size)
    xx, yy = np.meshgrid(t, t, indexing="ij")
    pts = np.zeros((size * size, ens.n))
    pts[:, 0], pts[:, 1] = xx.ravel(), yy.ravel()
    return pts


def write_grid_csv(points, values, stream=None) -> str:
    """CSV with header x1..xn,value; returns the text and writes it to ``stream`` if given."""
    points = np.asarray(points, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow([f"x{i + 1}" for i in range(points.shape[1])] + ["value"])
    for row, v in zip(points, values):
        w.writerow([repr(float(c)) for c in row] + [repr(float(v))])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text
