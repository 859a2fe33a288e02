"""Shared exception types."""


class RklError(Exception):
    """Base class for library errors."""


class DomainError(RklError):
    """Point or parameter outside the valid domain."""


class MetricError(RklError):
    """Metric tensor not positive definite where required."""


class StencilError(RklError):
    """Insufficient grid margin for a finite-difference stencil."""


class UnreachableError(RklError):
    """Target not reachable inside the discretized region."""


class TruncationError(RklError):
    """Requested region exceeds the chart's reach.

    Carries the clipped region in the ``region`` attribute.
    """

    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class UnsupportedOperationError(RklError):
    """Operation not defined for this surface type."""


class SolverError(RklError):
    """Linear or eigenvalue solver failed to converge."""


class CoercivityError(SolverError):
    """Discrete bilinear form failed the coercivity check after shrinking."""


class QuadratureError(RklError):
    """Quadrature resolution insufficient (e.g. indefinite Gram matrix)."""


class FitError(RklError):
    """Not enough samples or structure for a requested fit."""


class ConfigError(RklError):
    """Invalid run configuration.

    Carries the offending line number in ``line`` when known.
    """

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
