"""Exception types raised across the package."""


class TidgError(Exception):
    """Base class for all package-specific errors."""


class DegenerateDenominatorError(TidgError):
    """Parameter conversion hit the stability boundary (denominator ~ 0)."""


class SingularMatrixError(TidgError):
    """A constitutive matrix is singular or indefinite."""


class InvalidDimensionsError(TidgError):
    """Mesh generator called with non-positive sizes or counts."""


class UncoveredBoundaryEdgeError(TidgError):
    """A boundary edge matched none of the classification predicates."""


class PointOutsideElementError(TidgError):
    """Evaluation point lies outside the requested element."""


class UnsupportedDegreeError(TidgError):
    """Requested quadrature degree is above the implemented table."""


class MissingBoundaryDataError(TidgError):
    """A Dirichlet-type edge has no boundary datum in the load spec."""


class InvalidStabilizationError(TidgError):
    """A stabilization parameter is negative."""


class CoercivityNotPositiveError(TidgError):
    """Numeric coercivity estimate is non-positive (stabilization too weak)."""

    def __init__(self, estimate, message=None):
        self.estimate = estimate
        super().__init__(message or f"coercivity estimate is non-positive: {estimate}")


class SingularSystemError(TidgError):
    """Direct factorization broke down (zero pivot / singular matrix)."""


class ToleranceNotReachedError(TidgError):
    """Solver finished but the residual exceeds the requested tolerance."""


class ZeroReferenceError(TidgError):
    """Relative error requested against an exact solution with zero norm."""


class InvalidSequenceError(TidgError):
    """Convergence-rate input is too short, non-decreasing in h, or non-positive."""


class StabilityViolationError(TidgError):
    """Material parameters fail the pointwise stability conditions."""


class ConfigError(TidgError):
    """Run configuration is malformed or inconsistent."""
