"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class FracEdgeError(Exception):
    """Base class for every error raised by this package."""


class BoundsError(FracEdgeError, ValueError):
    """An index or order lies outside its supported range."""


class ArityError(FracEdgeError, ValueError):
    """Not enough derivative or moment data was supplied."""


class PreconditionError(FracEdgeError, ValueError):
    """Inputs violate a documented precondition."""


class ConfigurationError(FracEdgeError, ValueError):
    """An experiment or numerical setup cannot meet its error budget."""


class NumericError(FracEdgeError, ArithmeticError):
    """A quadrature, extrapolation or series did not converge."""


class BranchError(NumericError):
    """A logarithm could not be continued because the function vanished.

    Attributes
    ----------
    location : float
        Point on the continuation path where the zero was detected.
    """

    def __init__(self, message: str, location: float) -> None:
        super().__init__(message)
        self.location = location


class TruncationError(NumericError):
    """Grid truncation discarded more probability mass than allowed."""

    def __init__(self, message: str, lost_mass: float) -> None:
        super().__init__(message)
        self.lost_mass = lost_mass


class ResolutionError(NumericError):
    """A grid is too coarse to realise the requested decomposition."""
