"""Exception hierarchy shared by every module."""

from __future__ import annotations

from typing import Any


class IncompatError(Exception):
    """Root of all toolkit errors."""


class MeasurementValidationError(IncompatError, ValueError):
    def __init__(self, invariant: str, residual: float, location: str = "") -> None:
        self.invariant = invariant
        self.residual = float(residual)
        self.location = location
        where = f" ({location})" if location else ""
        super().__init__(f"{invariant} violated by {self.residual:.3e}{where}")


class MeasurementFileError(IncompatError, ValueError):
    pass


class ConstructionUnavailableError(IncompatError, ValueError):
    pass


class EnumerationLimitError(IncompatError, ValueError):
    pass


class ProblemValidationError(IncompatError, ValueError):
    pass


class ConfigurationError(IncompatError):
    pass


class MismatchedResultsError(IncompatError, ValueError):
    pass


class SolverFailure(IncompatError):
    """A solve that did not reach an optimal status."""

    def __init__(self, message: str, report: Any = None, stats: dict | None = None) -> None:
        self.report = report
        self.stats = dict(stats or {})
        if self.stats:
            details = ", ".join(f"{k}={v}" for k, v in sorted(self.stats.items()))
            message = f"{message} [{details}]"
        super().__init__(message)


class PolynomialError(IncompatError, ValueError):
    pass


class NotNormalisableError(PolynomialError):
    pass


class NotMarginalisableError(PolynomialError):
    pass


class NegativePinchCoefficientError(PolynomialError):
    pass


class NegativeIdentityResidueError(PolynomialError):
    pass


class InexactMarginalError(PolynomialError):
    pass


class AsymmetricMarginalError(PolynomialError):
    pass


class UnboundedWitnessError(IncompatError, ValueError):
    """Steering robustness too large for any finite dimension to be excluded."""
