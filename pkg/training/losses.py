"""
Losses - Class-weighted cross-entropy and L2 weight penalty

Interface:
  compute_class_weights(labels, num_classes) -> ClassWeights
  weighted_cross_entropy(probs, labels, weights) -> scalar Tensor
  l2_penalty(params, lam) -> scalar Tensor

The cross-entropy is averaged over the batch so the learning rate does not
depend on batch size; probabilities are floored at 1e-12 before the log.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from core.errors import DimensionError, InvalidInputError
from engine.tensor import Tensor, as_tensor, clamp_min, log, mul, neg, scale, tensor_sum

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class ClassWeights:
    """Per-class loss weights w_c, all positive"""
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise InvalidInputError(f"class weights must be a non-empty vector, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InvalidInputError(f"class weights must be positive, got {w.tolist()}")
        object.__setattr__(self, "weights", w)

    @property
    def num_classes(self) -> int:
        return int(self.weights.size)

    @classmethod
    def uniform(cls, num_classes: int) -> "ClassWeights":
        return cls(np.ones(num_classes))

    def to_dict(self) -> dict:
        return {str(c): float(w) for c, w in enumerate(self.weights)}


def compute_class_weights(labels: Sequence[int], num_classes: int) -> ClassWeights:
    """
    Inverse-frequency weights w_c = N / (C * N_c)

    Classes with no training examples get weight 1.0 and a warning.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise InvalidInputError("cannot compute class weights from an empty label set")
    if labels.min() < 0 or labels.max() >= num_classes:
        raise InvalidInputError(f"labels must lie in [0, {num_classes}), got range [{labels.min()}, {labels.max()}]")

    counts = np.bincount(labels, minlength=num_classes)
    weights = np.ones(num_classes, dtype=np.float64)
    observed = counts > 0
    weights[observed] = labels.size / (num_classes * counts[observed])
    for c in np.flatnonzero(~observed):
        logger.warning(f"⚠️ Class {c} has no training examples; using weight 1.0")
    logger.debug(f"Class counts {counts.tolist()} -> weights {np.round(weights, 4).tolist()}")
    return ClassWeights(weights)


def _check_labels(labels: np.ndarray, batch: int, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (batch,):
        raise DimensionError("one label per probability row expected", labels.shape, (batch,))
    if not np.issubdtype(labels.dtype, np.integer):
        raise InvalidInputError(f"labels must be integers, got {labels.dtype}")
    if batch and (labels.min() < 0 or labels.max() >= num_classes):
        raise InvalidInputError(f"label out of range [0, {num_classes}): {labels.min()}..{labels.max()}")
    return labels.astype(np.int64)


def weighted_cross_entropy(
    probs: Tensor,
    labels: Sequence[int],
    weights: Optional[Union[ClassWeights, Sequence[float]]] = None
) -> Tensor:
    """
    (1 / N) * sum_i w_{y_i} * (-log p_i[y_i])

    Args:
        probs: N x C softmax rows
        labels: N integer class indices
        weights: ClassWeights or raw per-class weights; uniform when omitted
    """
    probs = as_tensor(probs)
    if probs.ndim != 2:
        raise DimensionError("weighted_cross_entropy expects N x C probabilities", probs.shape)
    n, num_classes = probs.shape
    if n == 0:
        raise InvalidInputError("weighted_cross_entropy needs a non-empty batch")
    labels = _check_labels(labels, n, num_classes)

    if weights is None:
        weights = ClassWeights.uniform(num_classes)
    elif not isinstance(weights, ClassWeights):
        weights = ClassWeights(np.asarray(weights))
    if weights.num_classes != num_classes:
        raise DimensionError("one weight per class expected", (weights.num_classes,), (num_classes,))

    # Constant selector: w_{y_i} / N at (i, y_i), zero elsewhere
    selector = np.zeros((n, num_classes), dtype=probs.dtype)
    selector[np.arange(n), labels] = weights.weights[labels] / n

    log_probs = log(clamp_min(probs, PROB_FLOOR))
    return neg(tensor_sum(mul(log_probs, Tensor(selector))))


def l2_penalty(params: Sequence[Tensor], lam: float) -> Tensor:
    """lam * sum ||theta||^2 over the given weight tensors"""
    if lam < 0:
        raise InvalidInputError(f"L2 coefficient must be >= 0, got {lam}")
    params: List[Tensor] = list(params)
    if lam == 0 or not params:
        dtype = params[0].dtype if params else None
        return Tensor(0.0, dtype=dtype)
    total = tensor_sum(mul(params[0], params[0]))
    for p in params[1:]:
        total = total + tensor_sum(mul(p, p))
    return scale(total, lam)
