"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures onto its frozen exit-code table without inspecting messages.
"""


class InterpolationError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InvalidInputError(InterpolationError, ValueError):
    exit_code = 2


class ParseError(InvalidInputError):
    """Malformed input file; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class SymmetryError(InvalidInputError):
    """Data that should be closed under conjugation is not."""


class PoleError(InterpolationError, ZeroDivisionError):
    """Evaluation at (or numerically on) a pole."""

    exit_code = 2

    def __init__(self, message, root=None):
        super().__init__(message)
        self.root = root


class NotPositiveRealError(InterpolationError):
    exit_code = 3


class InfeasibleError(InterpolationError):
    """The generalized Pick matrix is not positive definite."""

    exit_code = 3

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class GammaError(InfeasibleError):
    """Requested H-infinity level cannot be met by the constraint data."""


class IllConditionedError(InterpolationError):
    exit_code = 4

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SingularBlockError(IllConditionedError):
    pass


class ContractivityError(InterpolationError):
    """The first entry of ``p`` reached 1, so ``rho`` is undefined."""

    exit_code = 5


class PathTrackingError(InterpolationError):
    exit_code = 5

    def __init__(self, message, lam=None, p=None):
        super().__init__(message)
        self.lam = lam
        self.p = p


class SingularJacobianError(PathTrackingError):
    pass


class NoConvergenceError(InterpolationError):
    exit_code = 5


class InsufficientDataError(InterpolationError):
    exit_code = 6


class DegeneratePlantError(InvalidInputError):
    pass


class CancellationError(InterpolationError):
    exit_code = 4

    def __init__(self, message, residual_roots=None):
        super().__init__(message)
        self.residual_roots = residual_roots


class UnstableLoopError(InterpolationError):
    exit_code = 5
