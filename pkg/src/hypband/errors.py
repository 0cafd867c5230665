"""Exception types shared across the package."""

from .quadrature import AccuracyError

__all__ = [
    "AccuracyError",
    "PoleError",
    "OutOfStripError",
    "InsufficientDataError",
    "DivergenceError",
    "TailBoundError",
    "DivisionUnstableError",
    "ConfigError",
]


class PoleError(ValueError):
    """Evaluation requested at a pole of the function."""


class OutOfStripError(ValueError):
    """Spectral parameter outside the admissible strip |Im| <= 1/2."""


class InsufficientDataError(ValueError):
    """Not enough samples/orbit points to produce the requested estimate."""


class DivergenceError(RuntimeError):
    """Series or sum cannot be certified to converge."""


class TailBoundError(RuntimeError):
    """Truncation tail bound exceeds the requested tolerance."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class DivisionUnstableError(RuntimeError):
    """Denominator below the guard threshold in a recovery formula."""


class ConfigError(ValueError):
    """Malformed or contradictory experiment configuration."""
