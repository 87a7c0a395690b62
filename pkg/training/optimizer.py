"""
Optimizer - Adam with per-parameter moment buffers

Update, applied elementwise:

  m <- beta1 * m + (1 - beta1) * g
  v <- beta2 * v + (1 - beta2) * g^2
  theta <- theta - lr * m / (sqrt(v) + eps)

Raw moments are used by default. With `bias_correction` the textbook
m / (1 - beta1^t) and v / (1 - beta2^t) replace them.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from core.config import TrainConfig
from core.errors import DimensionError
from engine.tensor import Tensor

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """First/second moment buffers aligned with a parameter list, plus the step counter"""
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    t: int = 0

    @classmethod
    def zeros_like(cls, params: Sequence[Tensor]) -> "AdamState":
        return cls(
            m=[np.zeros_like(p.data) for p in params],
            v=[np.zeros_like(p.data) for p in params],
            t=0,
        )

    def matches(self, params: Sequence[Tensor]) -> bool:
        return len(self.m) == len(params) and all(
            m.shape == p.shape and v.shape == p.shape for m, v, p in zip(self.m, self.v, params)
        )


def adam_step(
    params: Sequence[Tensor],
    grads: Sequence[Optional[np.ndarray]],
    state: AdamState,
    cfg: TrainConfig
) -> None:
    """
    One in-place Adam update

    Missing gradients (None) count as zero.

    Raises:
        DimensionError: parameter, gradient and state shapes disagree
    """
    if len(grads) != len(params):
        raise DimensionError("one gradient per parameter expected", (len(grads),), (len(params),))
    if not state.m:
        fresh = AdamState.zeros_like(params)
        state.m, state.v = fresh.m, fresh.v
    if not state.matches(params):
        raise DimensionError("optimizer state does not match the parameter list", (len(state.m),), (len(params),))

    state.t += 1
    lr, b1, b2, eps = cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if g is None:
            g = np.zeros_like(p.data)
        elif g.shape != p.shape:
            raise DimensionError(f"gradient shape mismatch for {p.name or 'parameter'}", g.shape, p.shape)
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * (g * g)
        if cfg.bias_correction:
            m_used = m / (1 - b1 ** state.t)
            v_used = v / (1 - b2 ** state.t)
        else:
            m_used, v_used = m, v
        p.data -= (lr * m_used / (np.sqrt(v_used) + eps)).astype(p.dtype)
