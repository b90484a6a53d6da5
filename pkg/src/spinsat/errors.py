"""Exception hierarchy shared across the package."""


class SpinsatError(Exception):
    """Base class for all package-specific errors."""


class DimacsError(SpinsatError, ValueError):
    """Malformed DIMACS CNF input."""


class SizeLimitError(SpinsatError, ValueError):
    """A guard against problem sizes an operation is not meant to handle."""


class ConfigError(SpinsatError, ValueError):
    """Inconsistent or invalid configuration."""


class ConvergenceError(SpinsatError, RuntimeError):
    """A numerical scheme failed to converge within its budget."""
