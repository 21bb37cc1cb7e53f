"""Circulant matrices: spectra, diagonalisation and mode-by-mode solves.

Convention: the entry (i, j) of the matrix with first row x_0 ... x_{k-1}
is x_{(j-i) mod k}, its eigenvalues are

    eta_m = sum_l x_l exp(2 pi i m l / k),

and the eigenvector of eta_m is column m of ``eigenvector_matrix(k)``.
Reconstruction uses the conjugate transpose: X = P diag(eta) P^*.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InconsistentRHSError, SingularBlockError

DEFAULT_KERNEL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Circulant:
    row: np.ndarray

    def __post_init__(self):
        row = np.asarray(self.row)
        if row.ndim != 1 or row.size == 0:
            raise DomainError("empty row: a circulant needs a non-empty first row")
        if not np.issubdtype(row.dtype, np.complexfloating):
            row = row.astype(np.float64)
        object.__setattr__(self, "row", row)

    @property
    def k(self) -> int:
        return self.row.size

    def entry(self, i: int, j: int):
        return self.row[(j - i) % self.k]

    def dense(self) -> np.ndarray:
        idx = (np.arange(self.k)[None, :] - np.arange(self.k)[:, None]) % self.k
        return self.row[idx]

    def transpose(self) -> "Circulant":
        return Circulant(self.row[(-np.arange(self.k)) % self.k])

    def __add__(self, other: "Circulant") -> "Circulant":
        if other.k != self.k:
            raise DomainError("size mismatch")
        return Circulant(self.row + other.row)

    def __matmul__(self, vec):
        return self.dense() @ np.asarray(vec)


@dataclass(frozen=True, eq=False)
class Spectrum:
    values: np.ndarray

    @property
    def k(self) -> int:
        return self.values.size

    def __getitem__(self, m):
        return self.values[m]


def _phase_table(k: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(k) / k)


def eigenvalues(c: Circulant, method: str = "direct") -> Spectrum:
    """All k eigenvalues, by the explicit exponential sum or by FFT."""
    k = c.k
    if method == "direct":
        idx = (np.arange(k)[:, None] * np.arange(k)[None, :]) % k
        vals = np.sum(c.row[None, :] * _phase_table(k)[idx], axis=1)
    elif method == "fft":
        vals = k * np.fft.ifft(c.row)
    else:
        raise DomainError(f"unknown method {method!r}")
    return Spectrum(np.asarray(vals, dtype=np.complex128))


def eigenvector_matrix(k: int) -> np.ndarray:
    """Unitary P with P[j, m] = exp(2 pi i m j / k) / sqrt(k)."""
    if k < 1:
        raise DomainError("k must be >= 1")
    idx = (np.arange(k)[:, None] * np.arange(k)[None, :]) % k
    return _phase_table(k)[idx] / np.sqrt(k)


def reconstruct(spec: Spectrum) -> np.ndarray:
    """P diag(eta) P^*."""
    p = eigenvector_matrix(spec.k)
    return (p * spec.values[None, :]) @ p.conj().T


def to_modes(vec) -> np.ndarray:
    """Coordinates P^* v of a k-vector in the eigenvector basis."""
    vec = np.asarray(vec)
    return np.fft.fft(vec) / np.sqrt(vec.size)


def from_modes(coef) -> np.ndarray:
    """P c, inverse of ``to_modes``."""
    coef = np.asarray(coef)
    return np.fft.ifft(coef) * np.sqrt(coef.size)


@dataclass(frozen=True)
class CirculantSolution:
    particular: np.ndarray
    kernel_modes: tuple


def solve(c: Circulant, rhs, kernel_tol: float = DEFAULT_KERNEL_TOL, strict: bool = True) -> CirculantSolution:
    """Solve C x = rhs in the Fourier basis.

    A mode is degenerate when |eta_m| <= kernel_tol * max|eta|. On such a
    mode the rhs coefficient must satisfy |(P^* rhs)_m| <= kernel_tol * ||rhs||
    or ``InconsistentRHSError`` is raised; with ``strict=False`` the offending
    component is projected out instead, which yields the minimal-norm least
    squares solution. The returned particular solution has no component
    along the degenerate modes.
    """
    rhs = np.asarray(rhs)
    if rhs.shape != (c.k,):
        raise DomainError("rhs has the wrong shape")
    eta = eigenvalues(c).values
    scale = np.max(np.abs(eta))
    if scale == 0.0:
        raise SingularBlockError("all-modes-degenerate: the circulant is zero", mode=None, ell=0.0)
    degenerate = np.abs(eta) <= kernel_tol * scale
    if np.all(degenerate):
        raise SingularBlockError("all-modes-degenerate", mode=None, ell=0.0)
    h = to_modes(rhs)
    norm = np.linalg.norm(rhs)
    if strict:
        for m in np.flatnonzero(degenerate):
            if abs(h[m]) > kernel_tol * max(norm, 1e-300):
                raise InconsistentRHSError(
                    f"inconsistent-rhs: mode {m} is degenerate but the rhs has weight {abs(h[m]):.3e} on it",
                    condition=f"mode {m}",
                    magnitude=float(abs(h[m]) / norm),
                )
    y = np.zeros_like(h)
    y[~degenerate] = h[~degenerate] / eta[~degenerate]
    x = from_modes(y)
    if not np.iscomplexobj(c.row) and not np.iscomplexobj(rhs):
        x = _real_part_checked(x)
    return CirculantSolution(particular=x, kernel_modes=tuple(int(m) for m in np.flatnonzero(degenerate)))


def _real_part_checked(x, rel: float = 1e-10):
    imag = np.max(np.abs(x.imag)) if x.size else 0.0
    if imag > rel * max(np.max(np.abs(x)), 1e-300):
        raise ArithmeticError(f"solution of a real system has imaginary residue {imag:.3e}")
    return x.real.copy()
