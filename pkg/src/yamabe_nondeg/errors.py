"""Exception hierarchy shared by all modules."""


class YamabeCheckError(Exception):
    """Base class for every error raised by this package."""


class DomainError(YamabeCheckError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class ScaleOverflowError(YamabeCheckError, ArithmeticError):
    """A lattice sum or a product of sums left the floating-point range."""

    def __init__(self, message, n=None, k=None):
        super().__init__(message)
        self.n = n
        self.k = k


class SummationBudgetError(YamabeCheckError, ArithmeticError):
    """The number of terms needed for the requested accuracy exceeds the cap."""


class QuadratureError(YamabeCheckError, ArithmeticError):
    """A quadrature did not reach its target within its budget."""


class InconsistentRHSError(YamabeCheckError, ValueError):
    """A right-hand side violates a solvability condition.

    ``condition`` names the violated condition and ``magnitude`` is its
    measured size relative to the right-hand side.
    """

    def __init__(self, message, condition, magnitude):
        super().__init__(message)
        self.condition = condition
        self.magnitude = magnitude


class SingularBlockError(YamabeCheckError, ArithmeticError):
    """A mode expected to be invertible is numerically singular (a resonance)."""

    def __init__(self, message, mode, ell):
        super().__init__(message)
        self.mode = mode
        self.ell = ell
