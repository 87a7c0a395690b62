# training/__init__.py
"""
Training: weighted cross-entropy, L2 penalty, Adam and the early-stopping loop.

Example:
    from training import train_loop
    report = train_loop(model, train_set, val_set, cfg.train, cfg.augment)
    report.save_curves("runs/curves.csv")
"""
from .losses import ClassWeights, compute_class_weights, weighted_cross_entropy, l2_penalty, PROB_FLOOR
from .optimizer import AdamState, adam_step
from .trainer import (
    EpochRecord,
    TrainingReport,
    BatchProducer,
    train_loop,
    evaluate_loss,
    predict,
)

__all__ = [
    "ClassWeights",
    "compute_class_weights",
    "weighted_cross_entropy",
    "l2_penalty",
    "PROB_FLOOR",
    "AdamState",
    "adam_step",
    "EpochRecord",
    "TrainingReport",
    "BatchProducer",
    "train_loop",
    "evaluate_loss",
    "predict",
]
