"""
Error kinds raised across the package.

Each kind also derives from the builtin it specializes, so callers that only
expect ``ValueError`` / ``ArithmeticError`` / ``RuntimeError`` keep working.
"""

from typing import Optional, Tuple


class SelfRegError(Exception):
    """Base class for every error raised by this package."""


class InputDomainError(SelfRegError, ValueError):
    """Non-finite inputs, empty data, dimension or length mismatch, index out of range."""


class ParameterError(SelfRegError, ValueError):
    """An invalid constant (clip level, huber delta, exponent, p, ...)."""


class ContractError(SelfRegError, ValueError):
    """A caller broke an object contract (support mismatch, missing snapshot)."""


class NumericError(SelfRegError, ArithmeticError):
    """NaN/inf produced by a computation, or a system singular beyond jitter."""


class StepSizeError(SelfRegError, ValueError):
    """A step size exceeds its theoretical cap while running in strict mode."""


class GridError(SelfRegError, ValueError):
    """A stopping grid violates its preconditions."""


class ConvergenceError(SelfRegError, RuntimeError):
    """An iterative solver hit its iteration cap without a certificate."""

    def __init__(self, message: str, best_gap: float = float("inf")):
        super().__init__(message)
        self.best_gap = best_gap


class RangeError(SelfRegError, ValueError):
    """A target lies outside the achievable range; ``bracket`` holds that range."""

    def __init__(self, message: str, bracket: Tuple[float, float] = (float("nan"), float("nan"))):
        super().__init__(message)
        self.bracket = bracket


class ConfigError(SelfRegError, ValueError):
    """A configuration file or option could not be parsed or validated."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key
