"""Typed exceptions shared across the package."""


class ParameterError(ValueError):
    """A physical or numerical parameter is outside its admissible range."""


class UsageError(ValueError):
    """Operands are individually valid but incompatible (wrong kind, mismatched grids, ...)."""


class DataError(ValueError):
    """Input data cannot be processed (e.g. non-positive values passed to a log-log fit)."""


class ConfigError(ValueError):
    """A run configuration failed validation.  Carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class SolverError(RuntimeError):
    """An iterative solve failed to converge.  Carries the residual history."""

    def __init__(self, message: str, history=None, residual=None):
        self.history = list(history) if history is not None else []
        self.residual = residual
        super().__init__(message)


class NewtonError(SolverError):
    """Newton iteration on a wall-law closure failed to converge."""
