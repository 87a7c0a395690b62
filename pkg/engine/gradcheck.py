"""
Gradient check - Central finite differences against tape gradients

Responsibility: certify backward rules. The loss closure is evaluated in
float64 (the "shadow" precision) because float32 cannot resolve a 1e-4
relative error with central differences.

Interface:
  numerical_gradient(loss_fn, tensor, h) -> ndarray
  gradcheck(loss_fn, inputs, h=1e-3, rtol=1e-4) -> GradCheckResult
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

import numpy as np

from core.errors import InvalidInputError
from .tensor import Tensor, no_grad

logger = logging.getLogger(__name__)

# Denominator floor so that entries where both gradients vanish compare absolutely
RELATIVE_FLOOR = 1e-6


@dataclass
class GradCheckResult:
    """Outcome of one gradient check"""
    max_relative_error: float
    per_input: Dict[str, float] = field(default_factory=dict)
    rtol: float = 1e-4

    @property
    def passed(self) -> bool:
        return self.max_relative_error < self.rtol


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """max_i |a_i - n_i| / max(|a_i|, |n_i|, floor)"""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), RELATIVE_FLOOR)
    return float(np.max(np.abs(analytic - numeric) / scale)) if analytic.size else 0.0


def numerical_gradient(loss_fn: Callable[[], Tensor], tensor: Tensor, h: float = 1e-3) -> np.ndarray:
    """Central differences (f(x + h) - f(x - h)) / 2h, one element at a time"""
    grad = np.zeros(tensor.shape, dtype=np.float64)
    data = tensor.data
    with no_grad():
        for index in np.ndindex(*data.shape):
            original = data[index]
            data[index] = original + h
            plus = float(loss_fn().data)
            data[index] = original - h
            minus = float(loss_fn().data)
            data[index] = original
            grad[index] = (plus - minus) / (2.0 * h)
    return grad


def gradcheck(
    loss_fn: Callable[[], Tensor],
    inputs: Sequence[Tensor],
    h: float = 1e-3,
    rtol: float = 1e-4,
    names: Sequence[str] = ()
) -> GradCheckResult:
    """
    Compare backward() gradients of a scalar loss with finite differences

    Args:
        loss_fn: Closure rebuilding the scalar loss from the current input data
        inputs: float64 tensors with requires_grad=True
        h: Finite-difference step
        rtol: Pass threshold on the max relative error
        names: Optional labels for the per-input report
    """
    for t in inputs:
        if t.dtype != np.float64:
            raise InvalidInputError(f"gradcheck needs float64 inputs, got {t.dtype}")
        if not t.requires_grad:
            raise InvalidInputError("gradcheck inputs must require grad")
        t.zero_grad()

    loss = loss_fn()
    loss.backward()
    analytic: List[np.ndarray] = [
        np.zeros(t.shape) if t.grad is None else t.grad.astype(np.float64) for t in inputs
    ]

    per_input = {}
    for i, (t, grad) in enumerate(zip(inputs, analytic)):
        label = names[i] if i < len(names) else (t.name or f"input{i}")
        per_input[label] = relative_error(grad, numerical_gradient(loss_fn, t, h))

    result = GradCheckResult(
        max_relative_error=max(per_input.values()) if per_input else 0.0,
        per_input=per_input,
        rtol=rtol,
    )
    logger.debug(f"gradcheck: max relative error {result.max_relative_error:.3e}")
    return result
