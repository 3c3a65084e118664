"""Exception types shared across the package."""


class FKError(Exception):
    """Base class for all package errors."""


class DomainError(FKError, ValueError):
    """Arguments outside the documented domain of an operation."""


class ResourceError(FKError, RuntimeError):
    """Request would exceed a hard memory or size cap."""


class InsufficientDataError(FKError, RuntimeError):
    """Window too short to determine the requested combinatorial object."""


class ConfigError(FKError, ValueError):
    """Invalid run configuration."""


class NumericalFailure(FKError, RuntimeError):
    """Solver did not reach its tolerance; carries the best iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
