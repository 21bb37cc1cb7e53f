"""Lattice trigonometric sums and the kernel function g.

    P_i(x) = sum_{l>=1} cos(l x) / l**i
    Q_i(x) = sum_{l>=1} sin(l x) / l**i
    g(x)   = P_n(0) - P_n(x),   g' = Q_{n-1},   g'' = P_{n-2}

Whenever the parity of the index allows it, a sum is evaluated from the
Fourier expansion of a Bernoulli polynomial. Otherwise it is summed directly,
and the number of terms is chosen from a rigorous bound on the tail, so every
returned value carries a guaranteed truncation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._backend import kernels
from .errors import DomainError, SummationBudgetError

DEFAULT_TOL = 1e-12
BERNOULLI_MAXDEG = 50
# Hard cap on the number of terms of one direct summation.
MAX_TERMS = 50_000_000

TWO_PI = 2.0 * math.pi


class BernoulliTable:
    """Exact coefficients of B_0 ... B_maxdeg.

    ``coeffs[m][j]`` is the coefficient of t**j in B_m(t), stored as a
    ``Fraction``; ``float_coeffs`` holds the same values rounded once.
    """

    def __init__(self, maxdeg: int = BERNOULLI_MAXDEG):
        self.maxdeg = maxdeg
        b = [Fraction(1)]
        for m in range(1, maxdeg + 1):
            acc = sum(math.comb(m + 1, j) * b[j] for j in range(m))
            b.append(-acc / (m + 1))
        self.numbers = b
        self.coeffs = [
            [math.comb(m, j) * b[m - j] for j in range(m + 1)] for m in range(maxdeg + 1)
        ]
        self.float_coeffs = [np.array([float(c) for c in row]) for row in self.coeffs]

    def horner(self, m: int, t, drop_constant: bool = False):
        """Evaluate B_m(t) (or B_m(t) - B_m(0)) by Horner's rule."""
        c = self.float_coeffs[m]
        t = np.asarray(t, dtype=np.float64)
        acc = np.zeros_like(t)
        for j in range(m, 0, -1):
            acc = acc * t + c[j]
        acc = acc * t
        if not drop_constant:
            acc = acc + c[0]
        return acc


BERNOULLI = BernoulliTable()


def _scalar_or_array(values, like):
    return float(values) if np.ndim(like) == 0 else values


def bernoulli_poly(m: int, t):
    """B_m(t) for 0 <= m <= 50 and t in [0, 1]."""
    if not isinstance(m, (int, np.integer)) or not 0 <= m <= BERNOULLI.maxdeg:
        raise DomainError(f"degree-out-of-range: m={m} not in [0, {BERNOULLI.maxdeg}]")
    arr = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("bernoulli_poly expects t in [0, 1]")
    return _scalar_or_array(BERNOULLI.horner(int(m), arr), t)


def _check_index(i):
    if not isinstance(i, (int, np.integer)) or i < 2:
        raise DomainError(f"index-too-small: series index must be an integer >= 2, got {i!r}")
    return int(i)


def _check_x(x, upper=TWO_PI):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("nonfinite input")
    if np.any(arr < 0.0) or np.any(arr > upper):
        raise DomainError(f"x must lie in [0, {upper:.17g}]")
    return np.atleast_1d(arr)


def _reduced_t(x):
    """Map x in [0, 2pi] to t in [0, 1/2] and the reflection sign."""
    t = x / TWO_PI
    reflected = t > 0.5
    return np.where(reflected, 1.0 - t, t), reflected


def _closed_form_prefactor(i: int) -> float:
    # (2pi)^i / (2 i!) via logs so large i neither overflows nor underflows.
    return math.exp(i * math.log(TWO_PI) - math.log(2.0) - math.lgamma(i + 1))


def _p_closed(i: int, x):
    mhalf = i // 2
    t, _ = _reduced_t(x)
    sign = -1.0 if (mhalf - 1) % 2 else 1.0
    return sign * _closed_form_prefactor(i) * BERNOULLI.horner(i, t)


def _q_closed(i: int, x):
    mhalf = (i - 1) // 2
    t, reflected = _reduced_t(x)
    sign = -1.0 if (mhalf + 1) % 2 else 1.0
    val = sign * _closed_form_prefactor(i) * BERNOULLI.horner(i, t)
    return np.where(reflected, -val, val)


def truncation_length(i: int, x, target, versine: bool = False):
    """Number of terms after which the tail of a lattice sum is below ``target``.

    Two bounds are available for sum_{l>L} e^{ilx}/l^i: the absolute one
    1/((i-1) L^{i-1}) and the Abel-summation one 1/((L+1)^i |sin(x/2)|).
    The smaller L of the two is used. For the versine sum
    sum 2 sin^2(lx/2)/l^i the bounds are 2/((i-1) L^{i-1}) and, using
    sin^2 <= (lx/2)^2, (x^2/2)/((i-3) L^{i-3}).
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    target = np.broadcast_to(np.asarray(target, dtype=np.float64), x.shape)
    huge = float(np.iinfo(np.int64).max // 4)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if versine:
            length = (2.0 / ((i - 1) * target)) ** (1.0 / (i - 1))
            if i > 3:
                small_x = (0.5 * x * x / ((i - 3) * target)) ** (1.0 / (i - 3))
                length = np.minimum(length, small_x)
        else:
            length = (1.0 / ((i - 1) * target)) ** (1.0 / (i - 1))
            s = np.abs(np.sin(0.5 * x))
            abel = np.where(s > 0.0, (1.0 / (target * s)) ** (1.0 / i) - 1.0, np.inf)
            length = np.minimum(length, abel)
        length = np.minimum(np.nan_to_num(length, nan=huge, posinf=huge), huge)
    return np.ceil(np.maximum(length, 1.0)).astype(np.int64)


def _summed(kernel, i: int, x, target, versine=False):
    nterms = truncation_length(i, x, target, versine=versine)
    worst = int(np.max(nterms)) if nterms.size else 0
    if worst > MAX_TERMS:
        raise SummationBudgetError(
            f"index {i} needs {worst} terms near x={float(x[np.argmax(nterms)]):.3g} "
            f"for the requested tolerance (cap {MAX_TERMS})"
        )
    return kernel(np.ascontiguousarray(x), i, np.ascontiguousarray(nterms))


def p_sum(i: int, x, tol: float = DEFAULT_TOL, method: str = "auto"):
    """P_i(x) for x in [0, 2pi] with absolute error at most ``tol``.

    ``method`` is ``"closed"`` (even i only), ``"sum"`` or ``"auto"``.
    Accepts a scalar or an array of points.
    """
    i = _check_index(i)
    xs = _check_x(x)
    if method == "auto":
        method = "closed" if i % 2 == 0 else "sum"
    if method == "closed":
        if i % 2:
            raise DomainError("the Bernoulli closed form of P_i needs an even index")
        val = _p_closed(i, xs)
    elif method == "sum":
        val = _summed(kernels.cos_series, i, xs, 0.5 * tol)
    else:
        raise DomainError(f"unknown method {method!r}")
    return _scalar_or_array(val if np.ndim(x) else val[0], x)


def q_sum(i: int, x, tol: float = DEFAULT_TOL, method: str = "auto"):
    """Q_i(x) for x in [0, 2pi] with absolute error at most ``tol``."""
    i = _check_index(i)
    xs = _check_x(x)
    if method == "auto":
        method = "closed" if i % 2 == 1 else "sum"
    if method == "closed":
        if i % 2 == 0:
            raise DomainError("the Bernoulli closed form of Q_i needs an odd index")
        val = _q_closed(i, xs)
    elif method == "sum":
        val = _summed(kernels.sin_series, i, xs, 0.5 * tol)
    else:
        raise DomainError(f"unknown method {method!r}")
    return _scalar_or_array(val if np.ndim(x) else val[0], x)


@dataclass(frozen=True)
class GKernel:
    """g and its first two derivatives in dimension n."""

    n: int
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 4:
            raise DomainError(f"GKernel needs an integer n >= 4, got {self.n!r}")
        if not (self.tol > 0.0 and math.isfinite(self.tol)):
            raise DomainError("tol must be positive")

    def g(self, x):
        """g(x) with error below tol * min(1, 2 sin^2(x/2)).

        The bound is relative near x = 0, where g vanishes quadratically, so
        ratios such as g'^2/g stay accurate at the endpoint.
        """
        xs = _check_x(x, upper=math.pi)
        n = self.n
        if n % 2 == 0:
            mhalf = n // 2
            sign = 1.0 if (mhalf - 1) % 2 else -1.0
            t = xs / TWO_PI
            val = sign * _closed_form_prefactor(n) * BERNOULLI.horner(n, t, drop_constant=True)
        else:
            target = self.tol * np.minimum(1.0, 2.0 * np.sin(0.5 * xs) ** 2)
            target = np.where(target > 0.0, target, self.tol)
            val = _summed(kernels.versin_series, n, xs, target, versine=True)
        return _scalar_or_array(val if np.ndim(x) else val[0], x)

    def dg(self, x):
        return q_sum(self.n - 1, x, self.tol)

    def d2g(self, x):
        return p_sum(self.n - 2, x, self.tol)


def g_eval(kernel: GKernel, x):
    """(g, g', g'') at x in [0, pi]."""
    _check_x(x, upper=math.pi)
    return kernel.g(x), kernel.dg(x), kernel.d2g(x)


def zeta(s: int, tol: float = DEFAULT_TOL) -> float:
    """Riemann zeta at an integer s >= 2, as P_s(0)."""
    return p_sum(s, 0.0, tol)


def eta(s: int, tol: float = DEFAULT_TOL) -> float:
    """Alternating zeta sum_{l>=1} (-1)^{l-1}/l^s, as -P_s(pi)."""
    return -p_sum(s, math.pi, tol)
