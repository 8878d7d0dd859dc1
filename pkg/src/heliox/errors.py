"""Exception types shared across the package."""

from __future__ import annotations


class HelioxError(Exception):
    """Base class for all computational failures raised by heliox."""


class ConditioningError(HelioxError):
    """Overlap matrix is not numerically positive definite.

    Carries the 0-based index of the failing Cholesky pivot so callers can
    tell how far the basis can be pushed before losing definiteness.
    """

    def __init__(self, message: str, pivot: int):
        super().__init__(message)
        self.pivot = pivot


class NumericalError(HelioxError):
    """An eigensolver or other numerical routine failed to converge."""


class BracketError(HelioxError):
    """The scalar minimizer found no interior minimum in its bracket."""

    def __init__(self, message: str, f_lo: float, f_hi: float):
        super().__init__(message)
        self.f_lo = f_lo
        self.f_hi = f_hi


class ConvergenceError(HelioxError):
    """A refinement ladder was exhausted before reaching tolerance.

    ``records`` holds the last two ladder records for diagnosis.
    """

    def __init__(self, message: str, records: list):
        super().__init__(message)
        self.records = records


class ConsistencyError(HelioxError):
    """An internal invariant was violated (e.g. occupation number > 1)."""
