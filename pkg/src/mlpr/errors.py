"""Exception types raised across the package."""


class MlprError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(MlprError):
    """An array does not have the required shape."""


class StochasticityError(MlprError):
    """A column, fiber, or vector that must sum to one does not.

    ``index`` identifies the offending column/fiber when known (1-based,
    matching the on-disk column numbering).
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DimensionMismatchError(MlprError):
    """A vector or matrix argument has the wrong length for the instance."""


class ZeroStateError(MlprError):
    """The generator state is zero, which the update rule cannot leave."""


class InvalidAlphaError(MlprError):
    """The damping factor is outside [0, 1) or missing where required."""


class SingularDenominatorError(MlprError):
    """The sum-prediction denominator 1 - 2*alpha*sum(x) is exactly zero."""


class SingularMatrixError(MlprError):
    """A pivot fell below the singularity threshold during factorization.

    When raised from inside a solver, ``report`` holds the partial run
    recorded up to the failure.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotConvergedError(MlprError):
    """An iteration cap was reached before the residual test was met.

    ``report`` carries the full log of the run, with the best (last)
    iterate as its solution.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ParseError(MlprError):
    """A problem file is syntactically malformed; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
