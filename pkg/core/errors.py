"""
errors.py
Error hierarchy shared by every package.

Each error also derives from the matching builtin (ValueError, RuntimeError,
FloatingPointError) so callers that only know the builtins keep working.

Example:
    from core.errors import InvalidInputError
    raise InvalidInputError("count must be >= 1, got 0")
"""
from typing import Optional, Sequence


class ChebCNNError(Exception):
    """Root of all library errors"""


class InvalidInputError(ChebCNNError, ValueError):
    """Argument outside the accepted domain"""


class DegenerateInputError(InvalidInputError):
    """Input that is valid in type but carries no usable information (e.g. a constant image)"""


class DimensionError(ChebCNNError, ValueError):
    """Shape mismatch between operands"""

    def __init__(self, message: str, *shapes: Sequence[int]):
        if shapes:
            rendered = " vs ".join(str(tuple(s)) for s in shapes)
            message = f"{message}: {rendered}"
        super().__init__(message)
        self.shapes = tuple(tuple(s) for s in shapes)


class NonFiniteError(ChebCNNError, FloatingPointError):
    """NaN or Inf produced by a forward operation"""


class GradientAccumulationError(ChebCNNError, RuntimeError):
    """backward() called again before gradients were reset"""


class ConfigError(ChebCNNError, ValueError):
    """Configuration file could not be parsed or validated"""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        location = []
        if key is not None:
            location.append(f"key '{key}'")
        if line is not None:
            location.append(f"line {line}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.key = key
        self.line = line


class CheckpointError(ChebCNNError, RuntimeError):
    """Checkpoint container is corrupt, truncated or of an unsupported version"""


class OutOfDomainWarning(UserWarning):
    """Chebyshev argument outside [-1, 1]; the recurrence is still evaluated"""
