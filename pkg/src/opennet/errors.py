"""Exception hierarchy.

``ValidationError`` covers bad user input (CLI exit code 1); ``NumericError``
covers failures of the numerical routines themselves (exit code 2).
"""


class OpenNetError(Exception):
    exit_code = 2


class ValidationError(OpenNetError, ValueError):
    exit_code = 1

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CyclicityError(ValidationError):
    """The graph (self-loops excluded) contains a directed cycle."""


class PathExplosionError(ValidationError):
    """Path enumeration exceeded its guard."""


class LeakError(ValidationError):
    """A diagonal entry that must be strictly negative is not."""


class NumericError(OpenNetError, ArithmeticError):
    exit_code = 2


class StabilityError(NumericError):
    """State matrix is not Hurwitz."""


class ConditioningError(NumericError):
    """Sylvester operator is numerically singular."""


class ControllabilityError(NumericError):
    """Gramian is singular or too ill-conditioned to invert."""

    def __init__(self, message, null_directions=None):
        super().__init__(message)
        self.null_directions = null_directions


class ResolventError(NumericError):
    """``sI - A`` is numerically singular."""


class UndefinedIndexError(NumericError):
    """Henrici index requested for a zero matrix."""


class DegenerateDistributionError(NumericError):
    """Sample has zero spread but the scored value lies off the mean."""
