"""Exception hierarchy.

Every error raised by the library derives from :class:`ArtifactError`.
Errors that signal a failed numerical procedure derive from
:class:`NumericalError`; the CLI maps those to exit code 1.
"""


class ArtifactError(Exception):
    """Base class for all library errors."""


class DomainError(ArtifactError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation at a pole (e.g. Gamma at a nonpositive integer)."""


class DivergenceError(DomainError):
    """A series or integral that does not converge for the given arguments."""


class InvalidShapeError(DomainError):
    """A boundary perturbation that leaves the admissible set."""


class OutOfGridError(DomainError):
    """A kernel evaluation requested outside the tabulated region."""


class NumericalError(ArtifactError, ArithmeticError):
    """A numerical procedure failed to reach its target."""


class ConvergenceError(NumericalError):
    """An iteration did not converge."""


class QuadratureError(NumericalError):
    """Adaptive quadrature exhausted its subdivision budget."""


class ToleranceNotMetError(NumericalError):
    """A truncated expansion could not certify the requested tolerance."""

    def __init__(self, message, value=None, est_error=None):
        super().__init__(message)
        self.value = value
        self.est_error = est_error


class StepTooLargeError(NumericalError):
    """Finite-difference step dominated by the second-order term."""


class SingularJacobianError(NumericalError):
    """Newton Jacobian numerically singular (fold or bad pinning)."""


class PartialBranchError(NumericalError):
    """Continuation stopped early; carries the points computed so far."""

    def __init__(self, message, points=None, last_good=None):
        super().__init__(message)
        self.points = list(points or [])
        self.last_good = last_good
