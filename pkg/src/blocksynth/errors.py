"""Exception types raised across the synthesis pipeline."""

from __future__ import annotations

from typing import Any


class NumericalFailure(ArithmeticError):
    """An objective produced NaN or inf; carries the last finite iterate."""

    def __init__(self, message: str, x: Any = None, f: float | None = None):
        super().__init__(message)
        self.x = x
        self.f = f


class DepthLimitError(RuntimeError):
    """Decomposition ran out of layers before reaching the threshold."""

    def __init__(self, message: str, best: Any = None):
        super().__init__(message)
        self.best = best


class SynthesisError(RuntimeError):
    """A native backend could not realize a block within its threshold."""


class QasmParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ResourceLimitError(RuntimeError):
    """Requested dense simulation exceeds the supported width."""
