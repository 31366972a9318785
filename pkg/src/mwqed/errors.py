"""Exception types shared across the library."""


class PhysicsError(Exception):
    """Invalid physical parameters or a failed physics-level computation."""


class ConvergenceError(PhysicsError):
    """A quadrature or diagonalization did not reach its target accuracy."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(Exception):
    """Malformed or inconsistent run configuration."""
