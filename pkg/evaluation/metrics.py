"""
Metrics - Confusion counts, ratio metrics and ROC analysis

Interface:
  confusion(labels, predictions, num_classes) -> ConfusionMatrix
  metrics_from_counts(tp, fp, fn, tn) -> CountMetrics
  auc_roc(scores, labels) -> float
  multiclass_auc(prob_matrix, labels) -> MulticlassAUC
  roc_points(scores, labels) -> DataFrame (fpr, tpr, threshold)

A ratio whose numerator and denominator are both zero is undefined and is
carried as None, never as 0.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics import auc as trapezoid_area
from sklearn.metrics import confusion_matrix as sk_confusion_matrix
from sklearn.metrics import roc_curve

from core.errors import DimensionError, InvalidInputError

logger = logging.getLogger(__name__)


def _ratio(numerator: float, denominator: float) -> Optional[float]:
    return None if denominator == 0 else float(numerator) / float(denominator)


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[t][p] = samples of true class t predicted as p"""
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or counts.shape[0] == 0:
            raise DimensionError("confusion matrix must be square and non-empty", counts.shape)
        if np.any(counts < 0):
            raise InvalidInputError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def num_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def one_vs_rest(self, c: int) -> Tuple[int, int, int, int]:
        """(TP, FP, FN, TN) of class c against all others"""
        if not 0 <= c < self.num_classes:
            raise InvalidInputError(f"class index {c} outside [0, {self.num_classes})")
        tp = int(self.counts[c, c])
        fp = int(self.counts[:, c].sum()) - tp
        fn = int(self.counts[c, :].sum()) - tp
        tn = self.total - tp - fp - fn
        return tp, fp, fn, tn

    def to_frame(self, class_names: Optional[Sequence[str]] = None) -> pd.DataFrame:
        names = list(class_names) if class_names else [str(c) for c in range(self.num_classes)]
        frame = pd.DataFrame(self.counts, index=names, columns=names)
        frame.index.name = "true\\predicted"
        return frame


@dataclass(frozen=True)
class CountMetrics:
    """Sensitivity, specificity, precision, F1 and accuracy of one count quadruple"""
    sensitivity: Optional[float]
    specificity: Optional[float]
    precision: Optional[float]
    f1: Optional[float]
    accuracy: Optional[float]

    def to_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)


@dataclass(frozen=True)
class MulticlassAUC:
    """One-vs-rest AUC per class (None when a class lacks positives or negatives) and their macro mean"""
    per_class: Tuple[Optional[float], ...]
    macro: Optional[float]

    def to_dict(self) -> Dict[str, object]:
        return {"per_class": list(self.per_class), "macro": self.macro}


def _check_labels(values: np.ndarray, num_classes: int, what: str) -> np.ndarray:
    values = np.asarray(values)
    if values.ndim != 1:
        raise DimensionError(f"{what} must be a vector", values.shape)
    if values.size and not np.issubdtype(values.dtype, np.integer):
        if not np.all(np.equal(np.mod(values, 1), 0)):
            raise InvalidInputError(f"{what} must be integer class indices")
    values = values.astype(np.int64)
    if values.size and (values.min() < 0 or values.max() >= num_classes):
        raise InvalidInputError(f"{what} outside [0, {num_classes}): {values.min()}..{values.max()}")
    return values


def confusion(labels: Sequence[int], predictions: Sequence[int], num_classes: int) -> ConfusionMatrix:
    """
    Count (true, predicted) pairs

    Raises:
        DimensionError: length mismatch
        InvalidInputError: value outside [0, num_classes)
    """
    if num_classes < 1:
        raise InvalidInputError(f"num_classes must be >= 1, got {num_classes}")
    labels = _check_labels(labels, num_classes, "labels")
    predictions = _check_labels(predictions, num_classes, "predictions")
    if labels.shape != predictions.shape:
        raise DimensionError("labels and predictions differ in length", labels.shape, predictions.shape)
    if labels.size == 0:
        return ConfusionMatrix(np.zeros((num_classes, num_classes), dtype=np.int64))
    return ConfusionMatrix(sk_confusion_matrix(labels, predictions, labels=np.arange(num_classes)))


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int) -> CountMetrics:
    """
    sensitivity = TP / (TP + FN)
    specificity = TN / (TN + FP)
    precision   = TP / (TP + FP)
    F1          = 2 * precision * recall / (precision + recall)
    accuracy    = (TP + TN) / (TP + TN + FP + FN)

    F1 is undefined when either input is undefined or both are zero.
    """
    if min(tp, fp, fn, tn) < 0:
        raise InvalidInputError(f"counts must be non-negative, got TP={tp} FP={fp} FN={fn} TN={tn}")
    sensitivity = _ratio(tp, tp + fn)
    precision = _ratio(tp, tp + fp)
    f1 = None
    if sensitivity is not None and precision is not None and precision + sensitivity > 0:
        f1 = 2.0 * precision * sensitivity / (precision + sensitivity)
    return CountMetrics(
        sensitivity=sensitivity,
        specificity=_ratio(tn, tn + fp),
        precision=precision,
        f1=f1,
        accuracy=_ratio(tp + tn, tp + tn + fp + fn),
    )


def _binary_inputs(scores: Sequence[float], labels: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 1 or scores.shape != labels.shape:
        raise DimensionError("scores and labels must be equal-length vectors", scores.shape, labels.shape)
    if not np.all(np.isin(labels, (0, 1))):
        raise InvalidInputError("ROC labels must be binary (0/1)")
    labels = labels.astype(np.int64)
    if np.unique(labels).size < 2:
        raise InvalidInputError("ROC analysis needs both positive and negative samples")
    if not np.all(np.isfinite(scores)):
        raise InvalidInputError("scores must be finite")
    return scores, labels


def roc_points(scores: Sequence[float], labels: Sequence[int]) -> pd.DataFrame:
    """ROC curve with one step per distinct score (ties grouped), from (0, 0) to (1, 1)"""
    scores, labels = _binary_inputs(scores, labels)
    fpr, tpr, thresholds = roc_curve(labels, scores, drop_intermediate=False)
    return pd.DataFrame({"fpr": fpr, "tpr": tpr, "threshold": thresholds})


def auc_roc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Trapezoidal area under the ROC curve; equals P(s+ > s-) + P(s+ == s-) / 2

    Raises:
        InvalidInputError: labels not binary or only one class present
    """
    scores, labels = _binary_inputs(scores, labels)
    fpr, tpr, _ = roc_curve(labels, scores, drop_intermediate=False)
    return float(trapezoid_area(fpr, tpr))


def multiclass_auc(prob_matrix: np.ndarray, labels: Sequence[int]) -> MulticlassAUC:
    """One-vs-rest AUC of each class's probability column, macro-averaged over defined classes"""
    probs = np.asarray(prob_matrix, dtype=np.float64)
    if probs.ndim != 2:
        raise DimensionError("probability matrix must be N x C", probs.shape)
    labels = _check_labels(labels, probs.shape[1], "labels")
    if labels.shape[0] != probs.shape[0]:
        raise DimensionError("one label per probability row expected", labels.shape, probs.shape)

    per_class = []
    for c in range(probs.shape[1]):
        positives = (labels == c).astype(np.int64)
        if np.unique(positives).size < 2:
            logger.warning(f"⚠️ AUC undefined for class {c}: only one outcome present")
            per_class.append(None)
            continue
        per_class.append(auc_roc(probs[:, c], positives))
    defined = [a for a in per_class if a is not None]
    return MulticlassAUC(tuple(per_class), float(np.mean(defined)) if defined else None)
