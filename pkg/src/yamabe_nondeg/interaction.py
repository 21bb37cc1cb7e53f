"""Leading-order eigenvalues of the circulant interaction matrices.

With theta_l = 2 pi (l-1)/k, a = (n-2)/2 and

    S[num, phase; e](m) = sum_{l=2}^{k} num(theta_l) phase(m theta_l) / (1 - cos theta_l)^e

the coefficients of mode m are

    abar = -a S[1, cos; a]                     bbar = -abar
    fbar = S[cos th, 1; n/2] + S[a cos th - n/2, cos; n/2]
    gbar = -S[a cos th + n/2, 1 - cos; n/2]
    cbar = a S[sin th, sin; n/2]               dbar = -cbar
    hbar = S[cos(m th) - cos th; n/2]

All values live on the scale where the common factor Xi mu^{n-2} is divided
out; ``entry_row`` multiplies it back in. Every sum is accumulated term by
term in ascending l, so the structural zeros (gbar_0, cbar_0, hbar_1 and
fbar_1 + bbar_1) come out exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._backend import kernels
from .errors import DomainError, ScaleOverflowError
from .series import GKernel

OVERFLOW_LIMIT = 1e300

PHASES = ("cos", "sin", "versin")


@dataclass(frozen=True)
class Affine:
    """The numerator c0 + c1 cos(theta)."""

    c0: float
    c1: float


def mu_solve(n: int, k: int) -> float:
    """Balancing scale: mu^{(n-2)/2} sum_{l>1} (1 - cos theta_l)^{-(n-2)/2} = 1."""
    _check_nk(n, k)
    a = 0.5 * (n - 2)
    base = _one_minus_cos(k)
    _guard(base, a, n, k)
    total = math.fsum((base ** (-a)).tolist())
    return total ** (-1.0 / a)


def _check_nk(n, k):
    if not isinstance(n, (int, np.integer)) or n < 4:
        raise DomainError(f"invalid n: need an integer n >= 4, got {n!r}")
    if not isinstance(k, (int, np.integer)) or k < 2:
        raise DomainError(f"invalid k: need an integer k >= 2, got {k!r}")


def phase_tables(k: int) -> dict:
    """cos, sin and 1 - cos of 2 pi r / k for r = 0 .. k-1.

    Entries r and k - r are mirrored exactly (cos equal, sin negated), so
    the parity relations between modes m and k - m hold to the last bit.
    """
    r = np.arange(k)
    half = r <= k // 2
    base = np.where(half, r, k - r)
    cos = np.cos(2.0 * np.pi * base / k)
    sin = np.where(half, 1.0, -1.0) * np.sin(2.0 * np.pi * base / k)
    if k % 2 == 0:
        sin[k // 2] = 0.0
    versin = 2.0 * np.sin(np.pi * base / k) ** 2
    return {"cos": cos, "sin": sin, "versin": versin}


def _one_minus_cos(k: int) -> np.ndarray:
    # 1 - cos(2 pi l / k) for l = 1 .. k-1, computed as 2 sin^2 without cancellation
    return phase_tables(k)["versin"][1:]


def _guard(base, exponent, n, k):
    # base[0] is the smallest value of 1 - cos theta_l
    if exponent * -math.log(base[0]) > math.log(OVERFLOW_LIMIT):
        raise ScaleOverflowError(
            f"scale-overflow: (1 - cos theta_2)^(-{exponent:g}) exceeds {OVERFLOW_LIMIT:g} at n={n}, k={k}",
            n=n,
            k=k,
        )


@dataclass(frozen=True)
class Configuration:
    """k points on a circle in dimension n with the balancing scale mu."""

    n: int
    k: int
    mu: float

    @classmethod
    def build(cls, n: int, k: int) -> "Configuration":
        return cls(int(n), int(k), mu_solve(n, k))

    @property
    def a(self) -> float:
        return 0.5 * (self.n - 2)

    @cached_property
    def thetas(self) -> np.ndarray:
        """theta_1 .. theta_k (theta_1 = 0)."""
        return 2.0 * np.pi * np.arange(self.k) / self.k

    @cached_property
    def tables(self) -> dict:
        return phase_tables(self.k)

    @cached_property
    def _trig(self):
        t = self.tables
        return t["cos"][1:], t["sin"][1:], t["versin"][1:]

    def weights(self, exponent: float) -> np.ndarray:
        _guard(self._trig[2], exponent, self.n, self.k)
        return self._trig[2] ** (-exponent)

    @cached_property
    def scale(self) -> float:
        """Xi mu^{n-2}, the factor between bar coefficients and eigenvalues."""
        return xi_value(self.n).value * self.mu ** (self.n - 2)


def _numerator(cfg: Configuration, numerator) -> np.ndarray:
    cos, sin, _ = cfg._trig
    if numerator == 1 or numerator == "1":
        return np.ones_like(cos)
    if numerator == "cos":
        return cos
    if numerator == "sin":
        return sin
    if isinstance(numerator, Affine):
        return numerator.c0 + numerator.c1 * cos
    raise DomainError(f"unsupported numerator {numerator!r}")


def _sums(cfg: Configuration, w, v, modes, phase: str) -> np.ndarray:
    modes = np.ascontiguousarray(np.asarray(modes, dtype=np.int64).reshape(-1))
    if np.any(modes < 0) or np.any(modes >= cfg.k):
        raise DomainError(f"mode out of range 0..{cfg.k - 1}")
    w = np.ascontiguousarray(w, dtype=np.float64)
    v = np.ascontiguousarray(np.zeros_like(w) if v is None else v, dtype=np.float64)
    out = kernels.lattice_sums(w, v, cfg.tables[phase], modes)
    if not np.all(np.isfinite(out)):
        raise ScaleOverflowError(f"scale-overflow in lattice sum at n={cfg.n}, k={cfg.k}", n=cfg.n, k=cfg.k)
    return np.asarray(out)


def trig_kernel_sum(cfg: Configuration, m: int, numerator, exponent: float, phase: str = "cos") -> float:
    """sum_{l=2}^{k} numerator(theta_l) phase(m theta_l) / (1 - cos theta_l)^exponent.

    ``numerator`` is 1, "cos", "sin" or an ``Affine``; ``phase`` is "cos",
    "sin" or "versin" (1 - cos).
    """
    if not exponent > 0:
        raise DomainError("exponent must be positive")
    if phase not in PHASES:
        raise DomainError(f"unknown phase {phase!r}")
    w = _numerator(cfg, numerator) * cfg.weights(exponent)
    return float(_sums(cfg, w, None, [m], phase)[0])


@dataclass(frozen=True)
class ModeCoefficients:
    m: int
    abar: float
    bbar: float
    cbar: float
    dbar: float
    fbar: float
    gbar: float
    hbar: float
    # fbar + bbar summed term by term (identically -hbar)
    fb: float


@dataclass(frozen=True)
class CoefficientTable:
    """Coefficients of every mode, as arrays indexed by m."""

    cfg: Configuration
    modes: np.ndarray
    abar: np.ndarray
    cbar: np.ndarray
    fbar: np.ndarray
    gbar: np.ndarray
    hbar: np.ndarray
    fb: np.ndarray

    @property
    def bbar(self):
        return -self.abar

    @property
    def dbar(self):
        return -self.cbar

    def mode(self, m: int) -> ModeCoefficients:
        hits = np.flatnonzero(self.modes == m)
        if hits.size == 0:
            raise DomainError(f"mode {m} is not in this table")
        i = int(hits[0])
        return ModeCoefficients(
            m=int(m),
            abar=float(self.abar[i]),
            bbar=float(-self.abar[i]),
            cbar=float(self.cbar[i]),
            dbar=float(-self.cbar[i]),
            fbar=float(self.fbar[i]),
            gbar=float(self.gbar[i]),
            hbar=float(self.hbar[i]),
            fb=float(self.fb[i]),
        )


def coefficient_table(cfg: Configuration, modes=None) -> CoefficientTable:
    modes = np.arange(cfg.k) if modes is None else np.asarray(modes, dtype=np.int64).reshape(-1)
    a, half_n = cfg.a, 0.5 * cfg.n
    cos, sin, _ = cfg._trig
    wa = cfg.weights(a)
    wn = cfg.weights(half_n)
    abar = _sums(cfg, -a * wa, None, modes, "cos")
    fbar = _sums(cfg, (a * cos - half_n) * wn, cos * wn, modes, "cos")
    gbar = _sums(cfg, -(a * cos + half_n) * wn, None, modes, "versin")
    cbar = _sums(cfg, a * sin * wn, None, modes, "sin")
    hbar = _sums(cfg, wn, -(cos * wn), modes, "cos")
    fb = _sums(cfg, -wn, cos * wn, modes, "cos")
    return CoefficientTable(cfg, modes, abar, cbar, fbar, gbar, hbar, fb)


def mode_coefficients(cfg: Configuration, m: int) -> ModeCoefficients:
    if not 0 <= m < cfg.k:
        raise DomainError(f"mode {m} out of range 0..{cfg.k - 1}")
    return coefficient_table(cfg, [m]).mode(m)


@dataclass(frozen=True)
class AsymptoticDeviation:
    """Relative deviations of abar, gbar, cbar from their g-function forms.

    ``dev_*`` compare against the single-endpoint expressions
    -a (k/(sqrt2 pi))^{n-2} g''(x), -(n-1)(k/(sqrt2 pi))^n g(x) and
    a sqrt2 (k/(sqrt2 pi))^{n-1} g'(x) at x = 2 pi m / k. The lattice sum
    collects equal contributions from theta near 0 and near 2 pi, so those
    ratios tend to 2; ``dev_*_two_sided`` compare against twice the
    expressions and do tend to 0. ``dev_c`` is None when g'(x) = 0.
    """

    m: int
    x: float
    dev_a: float
    dev_g: float
    dev_c: float | None
    dev_a_two_sided: float
    dev_g_two_sided: float
    dev_c_two_sided: float | None


def asymptotic_check(cfg: Configuration, m: int, gk: GKernel | None = None) -> AsymptoticDeviation:
    x = 2.0 * math.pi * m / cfg.k
    if not (math.pi / 2 <= x <= 3 * math.pi / 2):
        raise DomainError(f"mode {m} is outside the admissible mid-range 2 pi m / k in [pi/2, 3pi/2]")
    gk = gk if gk is not None else GKernel(cfg.n)
    if gk.n != cfg.n:
        raise DomainError("GKernel dimension differs from the configuration")
    n, a = cfg.n, cfg.a
    coef = mode_coefficients(cfg, m)
    xr = min(x, 2.0 * math.pi - x)
    flip = -1.0 if x > math.pi else 1.0
    g, dg, d2g = gk.g(xr), flip * gk.dg(xr), gk.d2g(xr)
    s = cfg.k / (math.sqrt(2.0) * math.pi)
    ref_a = -a * s ** (n - 2) * d2g
    ref_g = -(n - 1) * s**n * g
    ref_c = a * math.sqrt(2.0) * s ** (n - 1) * dg
    dev_c = dev_c2 = None
    if abs(dg) > 1e-14 * max(abs(g), 1.0):
        dev_c = abs(coef.cbar / ref_c - 1.0)
        dev_c2 = abs(coef.cbar / (2.0 * ref_c) - 1.0)
    return AsymptoticDeviation(
        m=int(m),
        x=x,
        dev_a=abs(coef.abar / ref_a - 1.0),
        dev_g=abs(coef.gbar / ref_g - 1.0),
        dev_c=dev_c,
        dev_a_two_sided=abs(coef.abar / (2.0 * ref_a) - 1.0),
        dev_g_two_sided=abs(coef.gbar / (2.0 * ref_g) - 1.0),
        dev_c_two_sided=dev_c2,
    )


@dataclass(frozen=True)
class XiConstant:
    n: int
    value: float
    quadrature_value: float
    relative_gap: float


def xi_value(n: int) -> XiConstant:
    """Xi = p gamma (n-2)/2 (-int y_1 U^{p-1} Z_1), by quadrature and in closed form.

    The closed form uses -int y_1 U^{p-1} d_1 U = (1/p) int U^p, so
    Xi = gamma (n-2)/2 int U^p with int U^p = 2^{(n+2)/2} pi^{n/2} / Gamma(n/2 + 1).
    """
    from . import quad

    if not isinstance(n, (int, np.integer)) or n < 4:
        raise DomainError(f"invalid n: need an integer n >= 4, got {n!r}")
    return _xi_cached(int(n), quad)


_XI_CACHE: dict = {}


def _xi_cached(n, quad):
    if n not in _XI_CACHE:
        p = (n + 2) / (n - 2)
        gamma = n * (n - 2) / 4.0
        closed = gamma * (n - 2) / 2.0 * quad.bubble_power_integral(n)
        numeric = p * gamma * (n - 2) / 2.0 * quad.y1_z1_moment(n)
        gap = abs(numeric - closed) / abs(closed)
        if gap > 1e-8:
            from .errors import QuadratureError

            raise QuadratureError(f"Xi quadrature disagrees with the closed form by {gap:.2e} at n={n}")
        _XI_CACHE[n] = XiConstant(n=n, value=closed, quadrature_value=numeric, relative_gap=gap)
    return _XI_CACHE[n]


ENTRY_TAGS = ("A", "B", "C", "D", "F", "G", "H")


def entry_row(cfg: Configuration, which: str) -> np.ndarray:
    """First row of the leading-order circulant ``which``, including Xi mu^{n-2}.

    Off-diagonal entries follow the entry formulas; the diagonal entry is the
    one for which the DFT of the row reproduces the analytic eigenvalues.
    G is signed so that its eigenvalues are Xi mu^{n-2} gbar_m.
    """
    if which not in ENTRY_TAGS:
        raise DomainError(f"unsupported matrix tag {which!r}")
    a, half_n = cfg.a, 0.5 * cfg.n
    cos, sin, _ = cfg._trig
    row = np.zeros(cfg.k)
    if which in ("A", "B"):
        off = -a * cfg.weights(a)
        row[1:] = off if which == "A" else -off
    elif which in ("C", "D"):
        off = a * sin * cfg.weights(half_n)
        row[1:] = off if which == "C" else -off
    elif which == "F":
        wn = cfg.weights(half_n)
        row[1:] = (a * cos - half_n) * wn
        row[0] = math.fsum((cos * wn).tolist())
    elif which == "G":
        off = (a * cos + half_n) * cfg.weights(half_n)
        row[1:] = off
        row[0] = -math.fsum(off.tolist())
    else:
        wn = cfg.weights(half_n)
        row[1:] = wn
        row[0] = -math.fsum((cos * wn).tolist())
    return cfg.scale * row


def analytic_eigenvalues(cfg: Configuration, which: str, table: CoefficientTable | None = None) -> np.ndarray:
    """Xi mu^{n-2} times the coefficient of ``which`` at every mode (imaginary unit included)."""
    t = table if table is not None else coefficient_table(cfg)
    bar = {
        "A": t.abar,
        "B": t.bbar,
        "C": 1j * t.cbar,
        "D": 1j * t.dbar,
        "F": t.fbar,
        "G": t.gbar,
        "H": t.hbar,
    }
    if which not in bar:
        raise DomainError(f"unsupported matrix tag {which!r}")
    return cfg.scale * np.asarray(bar[which])


# Mid-range sample points x = 2 pi m / k, as fractions of 2 pi, shared by all k.
MID_RANGE_FRACTIONS = (0.25, 0.375, 0.5, 0.625, 0.75)


@dataclass(frozen=True)
class AsymptoticFit:
    """Worst deviation per k over the shared mid-range points, and log-log slopes in k.

    Keys of ``deviations`` and ``slopes`` are "a", "g", "c" (single-endpoint
    references) and "a2", "g2", "c2" (two-sided references).
    """

    n: int
    ks: tuple
    deviations: dict
    slopes: dict


def asymptotic_fit(n: int, ks, fractions=MID_RANGE_FRACTIONS) -> AsymptoticFit:
    from .fit import loglog_slope

    ks = tuple(int(k) for k in ks)
    if len(ks) < 2:
        raise DomainError("an order fit needs at least two values of k")
    gk = GKernel(n)
    keys = ("a", "g", "c", "a2", "g2", "c2")
    dev = {key: [] for key in keys}
    for k in ks:
        cfg = Configuration.build(n, k)
        modes = [round(f * k) for f in fractions if abs(f * k - round(f * k)) < 1e-9]
        if not modes:
            raise DomainError(f"k={k} has no mode at the shared mid-range points")
        rows = [asymptotic_check(cfg, m, gk) for m in modes]
        dev["a"].append(max(r.dev_a for r in rows))
        dev["g"].append(max(r.dev_g for r in rows))
        dev["c"].append(max(r.dev_c for r in rows if r.dev_c is not None))
        dev["a2"].append(max(r.dev_a_two_sided for r in rows))
        dev["g2"].append(max(r.dev_g_two_sided for r in rows))
        dev["c2"].append(max(r.dev_c_two_sided for r in rows if r.dev_c_two_sided is not None))
    slopes = {key: loglog_slope(ks, dev[key]) for key in keys}
    return AsymptoticFit(n=int(n), ks=ks, deviations={key: tuple(v) for key, v in dev.items()}, slopes=slopes)


@dataclass(frozen=True)
class CancellationFit:
    n: int
    ks: tuple
    ratios: tuple
    # None when some ratio is exactly zero (no decay left to fit)
    slope: float | None


def case2_cancellation(n: int, ks) -> CancellationFit:
    """|fbar_1 + bbar_1| / max(|fbar_1|, |bbar_1|) for each k, with its order in k.

    With the weights used here the two sums cancel term by term, so the
    ratio is zero up to rounding for every k; the order fit is kept for
    coefficient conventions where the cancellation is only asymptotic.
    """
    from .fit import loglog_slope

    ks = tuple(int(k) for k in ks)
    ratios = []
    for k in ks:
        c = mode_coefficients(Configuration.build(n, k), 1)
        ratios.append(abs(c.fb) / max(abs(c.fbar), abs(c.bbar)))
    slope = loglog_slope(ks, ratios) if len(ks) >= 2 and min(ratios) > 0.0 else None
    return CancellationFit(n=int(n), ks=ks, ratios=tuple(ratios), slope=slope)
