"""Exception taxonomy shared across the package.

ValidationError covers malformed inputs (bad shapes, tolerances, scene files);
the remaining types are numerical failures raised during computation. The CLI
maps the former to exit code 2 and the latter to exit code 3.
"""
from __future__ import annotations


class WeylkitError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(WeylkitError, ValueError):
    """Input violates a documented precondition or schema."""


class NumericalError(WeylkitError, ArithmeticError):
    """Computation failed for numerical reasons."""


class JacobiConvergenceError(NumericalError):
    """The cyclic Jacobi sweep budget was exhausted before convergence."""

    def __init__(self, message: str, off_norm: float):
        super().__init__(message)
        self.off_norm = off_norm


class DomainError(NumericalError):
    """A scalar function was applied outside its domain on the spectrum."""


class PoleError(NumericalError):
    """Evaluation requested at a pole of the function."""


class IllConditionedTransformError(NumericalError):
    """B - F(z) is singular beyond the conditioning threshold."""


class NotStrictError(NumericalError):
    """Im F(i) is singular beyond tolerance, so the function is not strict."""
