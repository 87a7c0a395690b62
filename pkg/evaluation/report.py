"""
Report - Per-class classification report built from a confusion matrix

Columns: precision, recall (sensitivity), F1, specificity, support, for every
class plus macro and support-weighted averages and overall accuracy. Macro
and weighted averages skip undefined per-class values; an average with no
defined entry is itself undefined.

Interface:
  build_report(confusion, class_names=None, auc=None) -> ClassificationReport
  report.render() -> aligned text, percentages to two decimals
  report.to_dict() / report.save(path)
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from core.errors import DimensionError
from .metrics import ConfusionMatrix, MulticlassAUC, metrics_from_counts

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ("precision", "recall", "f1", "specificity")
UNDEFINED = "n/a"


@dataclass
class ClassMetrics:
    """One row of the report"""
    name: str
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    specificity: Optional[float]
    support: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "specificity": self.specificity,
            "support": self.support,
        }


@dataclass
class ClassificationReport:
    """Per-class rows, macro/weighted averages and accuracy"""
    rows: List[ClassMetrics]
    accuracy: Optional[float]
    macro: Dict[str, Optional[float]]
    weighted: Dict[str, Optional[float]]
    total: int
    confusion: ConfusionMatrix
    auc: Optional[MulticlassAUC] = None
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def class_names(self) -> List[str]:
        return [r.name for r in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "accuracy": self.accuracy,
            "total": self.total,
            "classes": [r.to_dict() for r in self.rows],
            "macro_avg": dict(self.macro),
            "weighted_avg": dict(self.weighted),
            "auc": self.auc.to_dict() if self.auc else None,
            "confusion": self.confusion.counts.tolist(),
            **self.extras,
        }

    def render(self) -> str:
        """Aligned plain-text table"""
        width = max([len(r.name) for r in self.rows] + [len("weighted avg")])
        header = f"{'':<{width}}  " + "  ".join(f"{c:>11}" for c in METRIC_COLUMNS) + f"  {'support':>8}"
        lines = ["Classification report", "", header]

        for r in self.rows:
            values = "  ".join(f"{_pct(getattr(r, c)):>11}" for c in METRIC_COLUMNS)
            lines.append(f"{r.name:<{width}}  {values}  {r.support:>8}")
        lines.append("")
        for label, avg in (("macro avg", self.macro), ("weighted avg", self.weighted)):
            values = "  ".join(f"{_pct(avg.get(c)):>11}" for c in METRIC_COLUMNS)
            lines.append(f"{label:<{width}}  {values}  {self.total:>8}")
        lines.append(f"{'accuracy':<{width}}  {_pct(self.accuracy):>11}  {'':>11}  {'':>11}  {'':>11}  {self.total:>8}")

        if self.auc is not None:
            lines.append("")
            for name, value in zip(self.class_names, self.auc.per_class):
                lines.append(f"AUC-ROC {name:<{width}}  {_num(value)}")
            lines.append(f"AUC-ROC {'macro':<{width}}  {_num(self.auc.macro)}")
        return "\n".join(lines) + "\n"

    def save(self, path: Union[str, Path]) -> Dict[str, Path]:
        """Write <path> (text), <path>.json and <path>.confusion.csv"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(), encoding="utf-8")
        json_path = path.with_name(path.name + ".json")
        json_path.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        csv_path = path.with_name(path.name + ".confusion.csv")
        self.confusion.to_frame(self.class_names).to_csv(csv_path)
        logger.info(f"✅ Report written to {path}")
        return {"text": path, "json": json_path, "confusion": csv_path}


def _pct(value: Optional[float]) -> str:
    return UNDEFINED if value is None else f"{100.0 * value:.2f}%"


def _num(value: Optional[float]) -> str:
    return UNDEFINED if value is None else f"{value:.4f}"


def _average(values: Sequence[Optional[float]], weights: Sequence[float]) -> Optional[float]:
    pairs = [(v, w) for v, w in zip(values, weights) if v is not None]
    total_weight = sum(w for _, w in pairs)
    if not pairs or total_weight == 0:
        return None
    return float(sum(v * w for v, w in pairs) / total_weight)


def build_report(
    confusion: ConfusionMatrix,
    class_names: Optional[Sequence[str]] = None,
    auc: Optional[MulticlassAUC] = None
) -> ClassificationReport:
    """One-vs-rest metrics per class, their averages and the overall accuracy"""
    names = list(class_names) if class_names else [str(c) for c in range(confusion.num_classes)]
    if len(names) != confusion.num_classes:
        raise DimensionError("one class name per confusion row expected", (len(names),), (confusion.num_classes,))

    support = confusion.support()
    rows = []
    for c, name in enumerate(names):
        m = metrics_from_counts(*confusion.one_vs_rest(c))
        rows.append(ClassMetrics(name, m.precision, m.sensitivity, m.f1, m.specificity, int(support[c])))

    macro = {c: _average([getattr(r, c) for r in rows], [1.0] * len(rows)) for c in METRIC_COLUMNS}
    weighted = {c: _average([getattr(r, c) for r in rows], support.tolist()) for c in METRIC_COLUMNS}
    total = confusion.total
    accuracy = float(np.trace(confusion.counts)) / total if total else None
    return ClassificationReport(rows, accuracy, macro, weighted, total, confusion, auc)
