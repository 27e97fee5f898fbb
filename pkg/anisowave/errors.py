"""
Error types for anisowave.

Every error also derives from the matching builtin so callers that only
catch ``ValueError`` or ``RuntimeError`` keep working.
"""

from typing import Optional


class AnisowaveError(Exception):
    """Base class for all anisowave errors."""


class SingularMatrix(AnisowaveError, ValueError):
    """Matrix determinant is below the invertibility threshold."""


class LogarithmUnavailable(AnisowaveError, ValueError):
    """No real principal logarithm exists, so only integer powers are defined."""


class ConvergenceFailure(AnisowaveError, RuntimeError):
    """An iterative construction did not converge within its term budget."""


class ZeroVector(AnisowaveError, ValueError):
    """The continuous scale coordinate is undefined at the origin."""


class GridMismatch(AnisowaveError, ValueError):
    """Two fields or a field and a signal live on incompatible grids."""


class ProfileDegenerate(AnisowaveError, ValueError):
    """A scale profile has zero L2 norm."""


class CoverageGap(AnisowaveError, ValueError):
    """Integer dilates of a profile (or a signal spectrum) leave frequencies uncovered."""


class EmptyBallRange(AnisowaveError, ValueError):
    """The maximal-function ball range contains no shells."""


class NonConvergent(AnisowaveError, RuntimeError):
    """A brute-force supremum kept growing past its last box level."""


class ConfigError(AnisowaveError, ValueError):
    """Invalid experiment configuration, with field (and line) diagnostics."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        location = ""
        if field is not None:
            location += f" [field: {field}]"
        if line is not None:
            location += f" [line: {line}]"
        super().__init__(f"{message}{location}")


class AliasWarning(UserWarning):
    """Sampled spectrum reaches the edge of the grid's Nyquist box."""
