"""
Exceptions raised by ratnet.

Everything derives from `RatnetError` so the CLI can report any library
failure with one handler. Each class also derives from the closest builtin
so callers that only know about `ValueError`/`ArithmeticError` still work.
"""

from typing import Any, Optional


class RatnetError(Exception):
    pass


class EvaluationError(RatnetError, ArithmeticError):
    """
    A rational function, composition or network produced a non-finite value.
    """

    def __init__(
        self,
        message: str,
        *,
        x: Optional[float] = None,
        stage: Optional[int] = None,
        layer: Optional[int] = None
    ) -> None:
        super().__init__(message)
        self.x = x
        self.stage = stage
        self.layer = layer


class DomainError(RatnetError, ValueError):
    pass


class RangeError(RatnetError, ValueError):
    """
    The request is mathematically valid but outside the range in which the
    float64 construction is certified. `admissible` holds the limit.
    """

    def __init__(self, message: str, *, admissible: Optional[float] = None):
        super().__init__(message)
        self.admissible = admissible


class NumericError(RatnetError, ArithmeticError):
    def __init__(
        self,
        message: str,
        *,
        diagnostics: Optional[dict[str, Any]] = None
    ) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class PreconditionError(RatnetError, ValueError):
    def __init__(
        self,
        message: str,
        *,
        offenders: Optional[list[Any]] = None
    ) -> None:
        super().__init__(message)
        self.offenders = offenders or []


class TrainingError(RatnetError, RuntimeError):
    def __init__(self, message: str, *, history: Any = None) -> None:
        super().__init__(message)
        self.history = history


class ConfigError(RatnetError, ValueError):
    pass


class CheckpointError(RatnetError, ValueError):
    pass
