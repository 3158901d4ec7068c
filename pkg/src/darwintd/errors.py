"""Exception types shared across the solver."""


class ConfigurationError(ValueError):
    """Invalid grid, material, electrode or scenario description."""


class SolverError(RuntimeError):
    """A linear solve failed to reach its tolerance contract."""

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = residual_history if residual_history is not None else []
