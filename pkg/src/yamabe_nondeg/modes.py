"""Per-mode 3x3 blocks of the block-circulant system and its solver.

The block-circulant matrix

        [ A   B   C ]
    N = [ B^T F   D ]
        [ C^T D^T G ]

is diagonalised by the Fourier basis. At mode m it acts on the three mode
coefficients as Xi mu^{n-2} D_m with

          [  abar     bbar    i cbar ]
    D_m = [  bbar     fbar    i dbar ]
          [ -i cbar  -i dbar  gbar   ]

Because abar = -bbar and dbar = -cbar, the change of variables
(y0, y1, y2) -> (y0 - y1, y1, y2) together with adding the first row to the
second turns D_m into

    [ -bbar      0       i cbar ]
    [  0      fbar+bbar  0      ]
    [ -i cbar    0       gbar   ]

whose determinant is ell_m = -(bbar + fbar)(gbar bbar + cbar^2).
Mode 0 has gbar = cbar = 0 (kernel direction (0, 0, 1)) and modes 1, k-1
have fbar + bbar = 0 (kernel direction (1, 1, 0)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circulant import from_modes, to_modes
from .errors import DomainError, InconsistentRHSError, ScaleOverflowError, SingularBlockError
from .interaction import (
    CoefficientTable,
    Configuration,
    ModeCoefficients,
    coefficient_table,
    entry_row,
    phase_tables,
)

KERNEL0 = "Kernel0"
KERNEL1 = "Kernel1"
REGULAR = "Regular"

DEFAULT_SOLVE_TOL = 1e-9
# A Regular block counts as resonant when |ell| falls below this fraction of
# the product of the row norms of the reduced block.
RESONANCE_TOL = 1e-12


def case_tag(m: int, k: int) -> str:
    if m == 0:
        return KERNEL0
    if m in (1, k - 1):
        return KERNEL1
    return REGULAR


@dataclass(frozen=True, eq=False)
class ModeBlock:
    m: int
    k: int
    coeffs: ModeCoefficients
    matrix: np.ndarray
    reduced: np.ndarray
    ell: float
    case_tag: str
    scale: float = 1.0

    @property
    def resonance_margin(self) -> float:
        """|ell| divided by the product of the reduced block's row norms."""
        norms = np.prod(np.linalg.norm(self.reduced, axis=1))
        return abs(self.ell) / norms if norms > 0 else 0.0


def build_block(coeffs: ModeCoefficients, k: int, scale: float = 1.0) -> ModeBlock:
    """Unreduced and reduced blocks of mode ``coeffs.m`` (bar scale; ``scale`` kept alongside)."""
    c = coeffs
    matrix = np.array(
        [
            [c.abar, c.bbar, 1j * c.cbar],
            [c.bbar, c.fbar, 1j * c.dbar],
            [-1j * c.cbar, -1j * c.dbar, c.gbar],
        ],
        dtype=np.complex128,
    )
    reduced = np.array(
        [
            [-c.bbar, 0.0, 1j * c.cbar],
            [0.0, c.fb, 0.0],
            [-1j * c.cbar, 0.0, c.gbar],
        ],
        dtype=np.complex128,
    )
    ell = -c.fb * (c.gbar * c.bbar + c.cbar * c.cbar)
    return ModeBlock(
        m=c.m, k=k, coeffs=c, matrix=matrix, reduced=reduced, ell=ell, case_tag=case_tag(c.m, k), scale=scale
    )


def blocks(cfg: Configuration, table: CoefficientTable | None = None) -> list[ModeBlock]:
    t = table if table is not None else coefficient_table(cfg)
    return [build_block(t.mode(m), cfg.k, cfg.scale) for m in range(cfg.k)]


@dataclass(frozen=True)
class EllEntry:
    m: int
    ell: float
    sign: int
    case_tag: str


@dataclass(frozen=True)
class EllScan:
    entries: tuple
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def ell_scan(cfg: Configuration, table: CoefficientTable | None = None) -> EllScan:
    """ell_m for every mode; violations lists the m in [2, k-2] with ell_m >= 0."""
    t = table if table is not None else coefficient_table(cfg)
    with np.errstate(over="ignore", invalid="ignore"):
        ell = -t.fb * (t.gbar * t.bbar + t.cbar * t.cbar)
    if not np.all(np.isfinite(ell)):
        raise ScaleOverflowError(
            f"scale-overflow: ell_m is not representable at n={cfg.n}, k={cfg.k}", n=cfg.n, k=cfg.k
        )
    entries = tuple(
        EllEntry(m=m, ell=float(ell[m]), sign=int(np.sign(ell[m])), case_tag=case_tag(m, cfg.k))
        for m in range(cfg.k)
    )
    violations = tuple(m for m in range(2, cfg.k - 1) if not ell[m] < 0.0)
    return EllScan(entries=entries, violations=violations)


@dataclass(frozen=True)
class BlockSolution:
    solution: np.ndarray
    kernel_directions: tuple
    solvable: bool


def solve_block(block: ModeBlock, rhs, tol: float = DEFAULT_SOLVE_TOL, check: bool = True) -> BlockSolution:
    """Solve scale * D_m y = rhs for one mode.

    Kernel modes return the solution orthogonal to their kernel direction.
    With ``check=False`` the solvability test is skipped and the component
    of the rhs outside the range is discarded.
    """
    h = np.asarray(rhs, dtype=np.complex128)
    if h.shape != (3,) or not np.all(np.isfinite(h)):
        raise DomainError("rhs must be three finite values")
    h = h / block.scale
    norm = np.linalg.norm(h)
    c = block.coeffs
    if block.case_tag == KERNEL0:
        if check and abs(h[2]) > tol * norm:
            raise InconsistentRHSError(
                f"inconsistent-rhs: mode 0 needs h2 = 0, got |h2|/|h| = {abs(h[2]) / norm:.3e}",
                condition="h2 = 0",
                magnitude=float(abs(h[2]) / norm),
            )
        u = -h[0] / c.bbar
        y1 = (h[0] + h[1]) / c.fb
        y = np.array([u + y1, y1, 0.0])
        return BlockSolution(y, (np.array([0.0, 0.0, 1.0]),), True)
    if block.case_tag == KERNEL1:
        s = h[0] + h[1]
        if check and abs(s) > tol * norm:
            raise InconsistentRHSError(
                f"inconsistent-rhs: mode {block.m} needs h0 + h1 = 0, got {abs(s) / norm:.3e}",
                condition="h0 + h1 = 0",
                magnitude=float(abs(s) / norm),
            )
        sub = block.reduced[np.ix_([0, 2], [0, 2])]
        u, y2 = np.linalg.solve(sub, np.array([h[0], h[2]]))
        # y0 = u + y1 with y1 free; the minimal-norm choice is y1 = -u/2
        y1 = -0.5 * u
        y = np.array([u + y1, y1, y2])
        return BlockSolution(y, (np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0),), True)
    if block.resonance_margin <= RESONANCE_TOL:
        raise SingularBlockError(
            f"singular-regular-block: mode {block.m} is resonant (ell = {block.ell:.3e})", mode=block.m, ell=block.ell
        )
    rh = np.array([h[0], h[0] + h[1], h[2]])
    u, y1, y2 = np.linalg.solve(block.reduced, rh)
    return BlockSolution(np.array([u + y1, y1, y2]), (), True)


def assemble_N(cfg: Configuration) -> np.ndarray:
    """Dense real 3k x 3k matrix N from the entry rows."""
    from .circulant import Circulant

    dense = {x: Circulant(entry_row(cfg, x)).dense() for x in "ABCDFG"}
    a, b, c, d, f, g = (dense[x] for x in "ABCDFG")
    return np.block([[a, b, c], [b.T, f, d], [c.T, d.T, g]])


def assemble_H(cfg: Configuration) -> np.ndarray:
    from .circulant import Circulant

    return Circulant(entry_row(cfg, "H")).dense()


def structured_vectors(k: int) -> dict:
    """1_k, cos and sin sampled at theta_l (sin is exactly zero when k = 2)."""
    t = phase_tables(k)
    return {"ones": np.ones(k), "cos": t["cos"].copy(), "sin": t["sin"].copy()}


@dataclass(frozen=True)
class BlockSolveResult:
    particular: np.ndarray
    kernel_basis: tuple
    free_parameters: int
    # ||w|| / (||s|| / (k^n mu^{n-2})), the constant of the a priori estimate
    estimate_ratio: float


def _solvability(named: list, total_norm: float, tol: float):
    for name, value, weight in named:
        if weight == 0.0:
            continue
        rel = abs(value) / (weight * max(total_norm, 1e-300))
        if rel > tol:
            raise InconsistentRHSError(
                f"solvability violated: {name} = {value:.6e} (relative {rel:.3e})", condition=name, magnitude=rel
            )


def _real(x, scale):
    if np.max(np.abs(x.imag), initial=0.0) > 1e-10 * max(scale, 1e-300):
        raise ArithmeticError("imaginary residue in the solution of a real system")
    return x.real.copy()


def solve_N(cfg: Configuration, s0, s1, s2, tol: float = DEFAULT_SOLVE_TOL, table=None) -> BlockSolveResult:
    """Solve N (w0, w1, w2) = (s0, s1, s2) mode by mode.

    Solvable iff s2 . 1_k = (s0 + s1) . cos = (s0 + s1) . sin = 0; the
    kernel is spanned by (0, 0, 1_k), (cos, cos, 0) and (sin, sin, 0).
    """
    k = cfg.k
    s = [np.asarray(v, dtype=np.float64) for v in (s0, s1, s2)]
    if any(v.shape != (k,) for v in s):
        raise DomainError("each rhs block must be a k-vector")
    vec = structured_vectors(k)
    total = float(np.linalg.norm(np.concatenate(s)))
    ssum = s[0] + s[1]
    _solvability(
        [
            ("s2 . 1_k", float(s[2] @ vec["ones"]), np.linalg.norm(vec["ones"])),
            ("(s0 + s1) . cos", float(ssum @ vec["cos"]), np.linalg.norm(vec["cos"])),
            ("(s0 + s1) . sin", float(ssum @ vec["sin"]), np.linalg.norm(vec["sin"])),
        ],
        total,
        tol,
    )
    t = table if table is not None else coefficient_table(cfg)
    h = np.stack([to_modes(v) for v in s], axis=1)  # (k, 3)
    y = np.zeros_like(h)
    for m in range(k):
        blk = build_block(t.mode(m), k, cfg.scale)
        y[m] = solve_block(blk, h[m], tol, check=False).solution
    w = [_real(from_modes(y[:, j]), total) for j in range(3)]
    zeros = np.zeros(k)
    basis = [
        np.concatenate([zeros, zeros, vec["ones"]]),
        np.concatenate([vec["cos"], vec["cos"], zeros]),
        np.concatenate([vec["sin"], vec["sin"], zeros]),
    ]
    basis = tuple(b for b in basis if np.linalg.norm(b) > 1e-12)
    particular = np.concatenate(w)
    return BlockSolveResult(
        particular=particular,
        kernel_basis=basis,
        free_parameters=len(basis),
        estimate_ratio=_estimate_ratio(cfg, particular, total),
    )


def _estimate_ratio(cfg, w, s_norm):
    if s_norm == 0.0:
        return 0.0
    return float(np.linalg.norm(w) / (s_norm / (cfg.k**cfg.n * cfg.mu ** (cfg.n - 2))))


def solve_H(cfg: Configuration, alpha: int, s, tol: float = DEFAULT_SOLVE_TOL, table=None) -> BlockSolveResult:
    """Solve H_alpha w = s; solvable iff s . cos = s . sin = 0, kernel {cos, sin}."""
    if not isinstance(alpha, (int, np.integer)) or not 3 <= alpha <= cfg.n:
        raise DomainError(f"alpha must lie in 3..{cfg.n}")
    k = cfg.k
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (k,):
        raise DomainError("rhs must be a k-vector")
    vec = structured_vectors(k)
    total = float(np.linalg.norm(s))
    _solvability(
        [
            ("s . cos", float(s @ vec["cos"]), np.linalg.norm(vec["cos"])),
            ("s . sin", float(s @ vec["sin"]), np.linalg.norm(vec["sin"])),
        ],
        total,
        tol,
    )
    t = table if table is not None else coefficient_table(cfg)
    h = to_modes(s)
    y = np.zeros_like(h)
    for m in range(k):
        if m in (1, k - 1):
            continue
        y[m] = h[m] / (cfg.scale * t.hbar[m])
    w = _real(from_modes(y), total)
    basis = tuple(v for v in (vec["cos"], vec["sin"]) if np.linalg.norm(v) > 1e-12)
    return BlockSolveResult(
        particular=w, kernel_basis=basis, free_parameters=len(basis), estimate_ratio=_estimate_ratio(cfg, w, total)
    )
