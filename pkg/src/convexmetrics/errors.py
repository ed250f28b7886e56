class ConvexMetricsError(Exception):
    """Base class for errors raised by this package."""


class DomainError(ConvexMetricsError, ValueError):
    """A parameter lies outside the range where the formula is defined."""


class ConstructionError(ConvexMetricsError, ValueError):
    """A distribution cannot be built from the given parameters."""


class PreconditionError(ConvexMetricsError, ValueError):
    """An operation was called on an input that violates its precondition."""


class ResourceError(ConvexMetricsError, RuntimeError):
    """A problem is too large for the requested exact method."""


class EstimatorError(ConvexMetricsError, RuntimeError):
    """A numerical backend failed to produce an estimate."""


class ConfigError(ConvexMetricsError, ValueError):
    """An experiment configuration is malformed or unconstructible."""
