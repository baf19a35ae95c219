"""Exception types shared across the solver stack.

The CLI maps each of these to a distinct exit code, so failure modes
stay distinguishable from scripts without parsing log text.
"""

__all__ = [
    "ConfigError",
    "SolverFailure",
    "PicardDivergenceError",
    "RegimeExcursionError",
]


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class SolverFailure(RuntimeError):
    """A solve missed its residual target within its budget."""

    def __init__(self, message: str, mom_residual: float = float("nan"),
                 div_residual: float = float("nan")):
        super().__init__(message)
        self.mom_residual = mom_residual
        self.div_residual = div_residual


class PicardDivergenceError(RuntimeError):
    """The per-step fixed-point iteration stopped contracting."""


class RegimeExcursionError(RuntimeError):
    """The total phase field left the admissible pointwise range."""
