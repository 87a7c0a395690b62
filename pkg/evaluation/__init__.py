# evaluation/__init__.py
"""
Evaluation: confusion matrices, ratio metrics, ROC/AUC and the classification report.

Example:
    from evaluation import confusion, build_report
    report = build_report(confusion([0, 1, 2], [0, 1, 1], 3), ["a", "b", "c"])
    print(report.render())
"""
from .metrics import (
    ConfusionMatrix,
    CountMetrics,
    MulticlassAUC,
    confusion,
    metrics_from_counts,
    auc_roc,
    multiclass_auc,
    roc_points,
)
from .report import ClassMetrics, ClassificationReport, build_report

__all__ = [
    "ConfusionMatrix",
    "CountMetrics",
    "MulticlassAUC",
    "confusion",
    "metrics_from_counts",
    "auc_roc",
    "multiclass_auc",
    "roc_points",
    "ClassMetrics",
    "ClassificationReport",
    "build_report",
]
