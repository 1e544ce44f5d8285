"""Exception types shared across the package."""


class PorphaseError(Exception):
    """Base class for package errors."""


class GeometryError(PorphaseError):
    """Invalid or unusable geometry (containment, connectivity, size)."""


class SolverError(PorphaseError):
    """A linear or nonlinear solve failed to converge."""


class CompatibilityError(SolverError):
    """Right-hand side incompatible with a pure-Neumann problem."""


class ConfigError(PorphaseError):
    """Invalid run configuration."""
