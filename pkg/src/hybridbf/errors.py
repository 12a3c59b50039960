"""Exception types raised across the package."""


class HybridBFError(Exception):
    """Base class for all package errors."""


class InvalidInputError(HybridBFError, ValueError):
    """Malformed input: wrong shape, non-finite entries, bad parameter."""


class NotPSDError(InvalidInputError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


class InfeasibleError(HybridBFError):
    """The requested configuration admits no solution."""


class DegenerateInputError(HybridBFError):
    """The input carries no usable signal direction."""


class ConfigError(HybridBFError, ValueError):
    """Scenario or CLI configuration is invalid."""
