
"""
Domain exceptions for the coarse-geometry laboratory.
"""
from typing import Optional


class CoarseLabException(Exception):
    """Base exception for the coarse-geometry laboratory domain."""
    pass


class InvalidModelError(CoarseLabException):
    """Raised when a group model violates its construction rules."""
    pass


class DimensionMismatchError(CoarseLabException):
    """Raised when points, vectors or matrices do not fit the owning model."""
    pass


class MetricNotPositiveDefiniteError(CoarseLabException):
    """Raised when a frame metric is not symmetric positive definite."""
    pass


class DegeneratePairError(CoarseLabException):
    """Raised when a critical height is requested for two equal nilradical points."""
    pass


class PointOutsideGridError(CoarseLabException):
    """Raised when a query point does not lie on the lattice box."""
    pass


class GridDisconnectedError(CoarseLabException):
    """Raised when the target is unreachable at the current resolution."""
    pass


class ShootingError(CoarseLabException):
    """Raised when the geodesic boundary value problem cannot be solved."""
    pass


class InsufficientSamplesError(CoarseLabException):
    """Raised when too few long-range samples are available for an estimate."""
    pass


class EvaluatorError(CoarseLabException):
    """Raised when a distance evaluator fails on a given sample."""

    def __init__(self, message: str, sample_index: Optional[int] = None):
        super().__init__(message)
        self.sample_index = sample_index


class ModulusMismatchError(CoarseLabException):
    """Raised when lamplighter elements with different moduli are combined."""
    pass


class ConfigurationError(CoarseLabException):
    """Raised when configuration is invalid."""
    pass


class RepositoryError(CoarseLabException):
    """Raised when report persistence fails."""
    pass
