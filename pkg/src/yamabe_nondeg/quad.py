"""Quadrature for the closed-form bubble integrals.

Integrals of radial functions over n-space are reduced to one radial
integral times the area |S^{n-1}| of the unit sphere. The half line is mapped
to [0, pi/2] with r = tan(s) and integrated with adaptive Gauss-Kronrod
(QUADPACK through scipy). A quadrature that reports non-convergence raises
``QuadratureError`` instead of returning a truncated value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import DomainError, QuadratureError

EPS_ABS = 1e-12
EPS_REL = 1e-12
DEFAULT_LIMIT = 400


def _quad(f, a, b, limit=DEFAULT_LIMIT, epsabs=EPS_ABS, epsrel=EPS_REL, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, limit=limit, epsabs=epsabs, epsrel=epsrel, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature non-convergence: {exc}") from exc
    return val


def sphere_area(n: int) -> float:
    """|S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)."""
    return 2.0 * math.pi ** (0.5 * n) / math.gamma(0.5 * n)


@dataclass(frozen=True)
class RadialIntegrand:
    """profile(r) * r**moment on (0, inf)."""

    profile: Callable[[float], float]
    moment: int
    n: int
    decay: float | None = None

    def __post_init__(self):
        if self.decay is not None and not self.decay > self.moment + 1:
            raise DomainError("integrand not absolutely convergent: decay must exceed moment + 1")


def half_line_integral(f: Callable[[float], float], limit: int = DEFAULT_LIMIT) -> float:
    """int_0^inf f(r) dr via r = tan(s)."""

    def mapped(s):
        c = math.cos(s)
        if c == 0.0:
            return 0.0
        return f(math.tan(s)) / (c * c)

    return _quad(mapped, 0.0, 0.5 * math.pi, limit=limit, epsabs=0.0)


def radial_integral(integrand: RadialIntegrand, limit: int = DEFAULT_LIMIT) -> float:
    """int_0^inf profile(r) r^moment dr."""
    m = integrand.moment
    return half_line_integral(lambda r: integrand.profile(r) * r**m, limit=limit)


def space_integral(profile: Callable[[float], float], n: int, limit: int = DEFAULT_LIMIT) -> float:
    """int over R^n of the radial function profile(|x|)."""
    return sphere_area(n) * radial_integral(RadialIntegrand(profile, n - 1, n), limit=limit)


# ---------------------------------------------------------------- beta integral


def beta_closed_form(q_exp: float, alpha: float) -> float:
    """Gamma((q+alpha)/2) Gamma((q-alpha)/2) / (2 Gamma(q))."""
    return math.exp(
        special.gammaln(0.5 * (q_exp + alpha)) + special.gammaln(0.5 * (q_exp - alpha)) - special.gammaln(q_exp)
    ) / 2.0


def beta_integral(q_exp: float, alpha: float, limit: int = DEFAULT_LIMIT) -> float:
    """int_0^inf (r/(1+r^2))^q r^{-1-alpha} dr by quadrature.

    With r = tan(s) the integrand becomes sin^{q-alpha-1}(s) cos^{q+alpha-1}(s)
    on (0, pi/2). The two algebraic endpoint factors are handed to QUADPACK as
    a weight so that integrable endpoint singularities cost nothing extra.
    """
    if not q_exp - abs(alpha) > 0:
        raise DomainError(f"divergent parameters: need q - |alpha| > 0, got q={q_exp}, alpha={alpha}")
    lo = q_exp - alpha - 1.0
    hi = q_exp + alpha - 1.0
    half = 0.5 * math.pi

    if lo >= 0.0 and hi >= 0.0:
        return _quad(lambda s: math.sin(s) ** lo * math.cos(s) ** hi, 0.0, half, limit=limit, epsabs=0.0)

    def smooth(s):
        u = half - s
        f0 = math.sin(s) / s if s > 0 else 1.0
        f1 = math.sin(u) / u if u > 0 else 1.0
        return f0**lo * f1**hi

    return _quad(smooth, 0.0, half, limit=limit, epsabs=0.0, weight="alg", wvar=(lo, hi))


# ---------------------------------------------------------------- bubble profile


def _bubble_params(n):
    a = 0.5 * (n - 2)
    p = (n + 2) / (n - 2)
    gamma = n * (n - 2) / 4.0
    return a, p, gamma


def bubble_profile(n: int, r):
    """U(r) = (2/(1+r^2))^{(n-2)/2}."""
    return (2.0 / (1.0 + r * r)) ** (0.5 * (n - 2))


def bubble_power_integral(n: int) -> float:
    """int U^p over R^n in closed form: 2^{(n+2)/2} pi^{n/2} / Gamma(n/2 + 1)."""
    return math.exp(0.5 * (n + 2) * math.log(2.0) + 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1.0))


def y1_z1_moment(n: int, limit: int = DEFAULT_LIMIT) -> float:
    """-int y_1 U^{p-1} d_1 U by quadrature.

    By symmetry y_1 d_1 U averages to (1/n) r U'(r), and
    r U'(r) = -2a r^2 U / (1 + r^2).
    """
    a, p, _ = _bubble_params(n)

    def f(r):
        u = bubble_profile(n, r)
        return u ** (p - 1.0) * 2.0 * a * r * r * u / (1.0 + r * r) / n

    return space_integral(f, n, limit=limit)


@dataclass(frozen=True)
class BubbleMoments:
    """Radial integrals int_0^inf r^{n-1+2j} (1+r^2)^{-(n+2)} dr for j = 0, 1, 2.

    ``*_space`` are the same integrals over R^n (times |S^{n-1}|).
    ``printed_*`` are the Gamma-function values quoted for j = 0 and j = 1.
    """

    n: int
    radial0: float
    radial2: float
    radial4: float
    printed0: float
    printed2: float
    space0: float
    space2: float
    space4: float

    @property
    def ratio(self) -> float:
        return self.radial2 / self.radial0


def bubble_moments(n: int, limit: int = DEFAULT_LIMIT) -> BubbleMoments:
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise DomainError("bubble_moments needs n >= 3")
    vals = []
    for j in (0, 1, 2):
        vals.append(half_line_integral(lambda r, j=j: r ** (n - 1 + 2 * j) / (1.0 + r * r) ** (n + 2), limit=limit))
    h = 0.5 * n
    g2 = math.gamma(h) ** 2 / (2.0 * math.gamma(n + 2))
    area = sphere_area(n)
    return BubbleMoments(
        n=n,
        radial0=vals[0],
        radial2=vals[1],
        radial4=vals[2],
        printed0=h * (h + 1.0) * g2,
        printed2=h * h * g2,
        space0=area * vals[0],
        space2=area * vals[1],
        space4=area * vals[2],
    )


def x1_squared_moment(profile: Callable[[float], float], n: int, nodes: int = 64) -> float:
    """int profile(|x|) x_1^2 dx, without assuming the 1/n symmetry rule.

    Uses x_1 = r cos(phi) with measure |S^{n-2}| sin^{n-2}(phi) r^{n-1},
    Gauss-Legendre in phi and adaptive quadrature in r.
    """
    t, wts = np.polynomial.legendre.leggauss(nodes)
    phi = 0.5 * math.pi * (t + 1.0)
    ang = 0.5 * math.pi * float(np.sum(wts * np.cos(phi) ** 2 * np.sin(phi) ** (n - 2)))
    area = sphere_area(n - 1) if n > 2 else 2.0
    return area * ang * half_line_integral(lambda r: profile(r) * r ** (n + 1))


@dataclass(frozen=True)
class ZMassReport:
    """Quadrature values of the four bubble integrals and the identities between them."""

    n: int
    mass_z0: float
    mass_z1: float
    linear_z0: float
    y1_z1: float
    mass_closed_form: float
    mass_closed_form_gap: float
    mass_gap: float
    linear_lhs: float
    linear_rhs: float
    linear_rel_gap: float
    mass_from_moments: float


def z_mass_identities(n: int, limit: int = DEFAULT_LIMIT) -> ZMassReport:
    """int U^{p-1} Z_0^2, int U^{p-1} Z_1^2, int U^{p-1} Z_0 and -int y_1 U^{p-1} Z_1.

    Z_0 = a U + x.grad U = a U (1 - r^2)/(1 + r^2) and Z_1 = d_1 U, whose
    square averages to (1/n) U'(r)^2.
    """
    if not isinstance(n, (int, np.integer)) or n < 4:
        raise DomainError(f"invalid n: need an integer n >= 4, got {n!r}")
    a, p, _ = _bubble_params(n)

    def u(r):
        return bubble_profile(n, r)

    def z0(r):
        return a * u(r) * (1.0 - r * r) / (1.0 + r * r)

    def du(r):
        return -2.0 * a * r * u(r) / (1.0 + r * r)

    mass_z0 = space_integral(lambda r: u(r) ** (p - 1.0) * z0(r) ** 2, n, limit)
    mass_z1 = space_integral(lambda r: u(r) ** (p - 1.0) * du(r) ** 2 / n, n, limit)
    linear = space_integral(lambda r: u(r) ** (p - 1.0) * z0(r), n, limit)
    y1z1 = y1_z1_moment(n, limit)
    closed = 2.0 ** (0.5 * (n - 4)) * n * (n - 2) ** 2 * math.gamma(0.5 * n) ** 2 / math.gamma(n + 2)
    rhs = -a * y1z1
    # Same mass from the moment integrals: U^{p-1} Z_1^2 averages to 2^{n+2} a^2 r^2 / (1+r^2)^{n+2} / n
    mom = bubble_moments(n, limit)
    via_moments = 2.0 ** (n + 2) * a * a * mom.space2 / n
    return ZMassReport(
        n=int(n),
        mass_z0=mass_z0,
        mass_z1=mass_z1,
        linear_z0=linear,
        y1_z1=y1z1,
        mass_closed_form=closed,
        mass_closed_form_gap=abs(mass_z0 - closed) / closed,
        mass_gap=abs(mass_z0 - mass_z1),
        linear_lhs=linear,
        linear_rhs=rhs,
        linear_rel_gap=abs(linear - rhs) / abs(rhs),
        mass_from_moments=via_moments,
    )


# ---------------------------------------------------------------- Kelvin lemma


@dataclass(frozen=True)
class KelvinLemmaResult:
    lhs: float
    rhs: float
    relative_gap: float
    weight_defect: float
    # int of |integrand| on the left, the natural size of either side
    magnitude: float


def kelvin_weight_defect(h: Callable[[np.ndarray], np.ndarray], n: int, samples: int = 64, seed: int = 7) -> float:
    """max |h(y) - |y|^{-n-2} h(y/|y|^2)| / |h(y)| over random sample points."""
    rng = np.random.default_rng(seed)
    y = rng.normal(size=(samples, n))
    y *= (np.exp(rng.uniform(-1.5, 1.5, samples)) / np.linalg.norm(y, axis=1))[:, None]
    r2 = np.sum(y * y, axis=1)
    lhs = h(y)
    rhs = r2 ** (-0.5 * (n + 2)) * h(y / r2[:, None])
    return float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), 1e-300)))


def kelvin_lemma_check(
    n: int,
    mu: float,
    xi,
    h: Callable[[np.ndarray], np.ndarray] | None = None,
    angular_nodes: int = 96,
    limit: int = DEFAULT_LIMIT,
    weight_tol: float = 1e-9,
) -> KelvinLemmaResult:
    """Both sides of  mu int d/dmu[U_mu(x - xi)] h  =  xi . int grad U_mu(x - xi) h.

    ``h`` maps an (N, n) array of points to N values and must satisfy
    h(y) = |y|^{-n-2} h(y/|y|^2); the default is U^p. The integrals use
    polar coordinates centred at xi with the polar axis along xi, which
    requires h to be invariant under rotations fixing that axis (true for
    radial h). The radius is mapped by rho = mu tan(s).
    """
    if n < 3:
        raise DomainError("n must be >= 3")
    a, p, _ = _bubble_params(n)
    xi = np.asarray(xi, dtype=np.float64)
    if xi.shape != (n,):
        raise DomainError("xi must be a point of R^n")
    if h is None:

        def h(y):
            return bubble_profile(n, np.sqrt(np.sum(y * y, axis=-1))) ** p

    defect = kelvin_weight_defect(h, n)
    if defect > weight_tol:
        raise DomainError(f"h fails the Kelvin weight identity (defect {defect:.2e})")
    dist = float(np.linalg.norm(xi))
    axis = xi / dist if dist > 0 else np.eye(n)[0]
    # a unit vector orthogonal to the axis
    helper = np.eye(n)[1] if abs(axis[0]) > 0.9 else np.eye(n)[0]
    ortho = helper - axis * (helper @ axis)
    ortho /= np.linalg.norm(ortho)

    t, wts = np.polynomial.legendre.leggauss(angular_nodes)
    phi = 0.5 * math.pi * (t + 1.0)
    wphi = 0.5 * math.pi * wts * np.sin(phi) ** (n - 2)
    cphi, sphi = np.cos(phi), np.sin(phi)
    area = sphere_area(n - 1)

    def ring(rho):
        pts = xi[None, :] + rho * (cphi[:, None] * axis[None, :] + sphi[:, None] * ortho[None, :])
        return h(pts)

    def u_mu(rho):
        return mu ** (-a) * bubble_profile(n, rho / mu)

    def du_mu(rho):
        # radial derivative of U_mu at distance rho
        return u_mu(rho) * (-2.0 * a * rho / (mu * mu + rho * rho))

    def lhs_integrand(rho):
        # mu d/dmu U_mu = -(a U_mu + rho U_mu')
        hv = ring(rho)
        return -(a * u_mu(rho) + rho * du_mu(rho)) * float(np.sum(wphi * hv)) * rho ** (n - 1)

    def rhs_integrand(rho):
        # xi . grad U_mu(x - xi) = dist cos(phi) U_mu'(rho)
        hv = ring(rho)
        return dist * du_mu(rho) * float(np.sum(wphi * cphi * hv)) * rho ** (n - 1)

    def mapped(f):
        def g(s):
            c = math.cos(s)
            if c == 0.0:
                return 0.0
            return f(mu * math.tan(s)) * mu / (c * c)

        return g

    def ref_integrand(rho):
        hv = ring(rho)
        return (a * u_mu(rho) + abs(rho * du_mu(rho))) * float(np.sum(wphi * np.abs(hv))) * rho ** (n - 1)

    ref = area * _quad(mapped(ref_integrand), 0.0, 0.5 * math.pi, limit=limit, epsabs=0.0, epsrel=1e-10)
    tol_abs = 1e-13 * ref
    lhs = area * _quad(mapped(lhs_integrand), 0.0, 0.5 * math.pi, limit=limit, epsabs=tol_abs, epsrel=1e-11)
    rhs = area * _quad(mapped(rhs_integrand), 0.0, 0.5 * math.pi, limit=limit, epsabs=tol_abs, epsrel=1e-11)
    scale = max(abs(lhs), abs(rhs), 1e-9 * ref)
    gap = abs(lhs - rhs) / scale if scale > 0 else 0.0
    return KelvinLemmaResult(lhs=lhs, rhs=rhs, relative_gap=gap, weight_defect=defect, magnitude=ref)
