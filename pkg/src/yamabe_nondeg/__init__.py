"""Numerical checks for the nondegeneracy of bubble-tower solutions of the Yamabe equation."""

from ._backend import BACKEND
from .bubble import BubbleEnsemble, Field, WeightedNormSpec, bubble_eval, error_eval, kernel_fields, ustar_eval
from .circulant import Circulant, eigenvalues
from .condition import check_condition
from .errors import (
    DomainError,
    InconsistentRHSError,
    QuadratureError,
    ScaleOverflowError,
    SingularBlockError,
    SummationBudgetError,
    YamabeCheckError,
)
from .interaction import Configuration, coefficient_table, mu_solve
from .modes import solve_H, solve_N
from .series import GKernel, p_sum, q_sum

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BubbleEnsemble",
    "Circulant",
    "Configuration",
    "DomainError",
    "Field",
    "GKernel",
    "InconsistentRHSError",
    "QuadratureError",
    "ScaleOverflowError",
    "SingularBlockError",
    "SummationBudgetError",
    "WeightedNormSpec",
    "YamabeCheckError",
    "bubble_eval",
    "check_condition",
    "coefficient_table",
    "eigenvalues",
    "error_eval",
    "kernel_fields",
    "mu_solve",
    "p_sum",
    "q_sum",
    "solve_H",
    "solve_N",
    "ustar_eval",
]
