"""
Trainer - Mini-batch training with validation-driven early stopping

Responsibility: run epochs of shuffled (seeded) mini-batches through the
network, optimize weighted cross-entropy + L2 with Adam, evaluate on the
validation split after every epoch, stop after `patience` consecutive
non-improving epochs and restore the best epoch's parameters and buffers.

Batches are assembled (and augmented) by a producer thread feeding a bounded
queue; every random draw comes from a stream keyed by (seed, epoch[, index])
so the producer's timing never changes results.

Interface:
  train_loop(model, train_set, val_set, cfg, augment_cfg=None) -> TrainingReport
  evaluate_loss(model, dataset, weights, batch_size) -> (loss, accuracy)
  predict(model, images, batch_size) -> N x C probabilities
"""

import logging
import math
import queue
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from core.config import AugmentConfig, TrainConfig
from core.errors import InvalidInputError
from core.rng import make_rng
from engine.tensor import Tensor, no_grad
from layers.modules import Dropout, Module
from processing.augmentation import augment_image
from processing.dataset import Dataset
from .losses import ClassWeights, compute_class_weights, l2_penalty, weighted_cross_entropy
from .optimizer import AdamState, adam_step

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ["epoch", "train_loss", "train_acc", "val_loss", "val_acc"]


@dataclass
class EpochRecord:
    """Loss/accuracy of one epoch on both splits"""
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TrainingReport:
    """Per-epoch curves plus the early-stopping outcome"""
    history: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = math.inf
    stopped_early: bool = False
    class_weights: Optional[ClassWeights] = None
    optimizer_state: Optional[AdamState] = None

    @property
    def epochs_run(self) -> int:
        return len(self.history)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.to_dict() for r in self.history], columns=CURVE_COLUMNS)

    def save_curves(self, path: Union[str, Path]) -> Path:
        """Write the per-epoch CSV (epoch, train_loss, train_acc, val_loss, val_acc)"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.8g")
        logger.info(f"✅ Training curves written to {path}")
        return path

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epochs_run": self.epochs_run,
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "stopped_early": self.stopped_early,
            "class_weights": self.class_weights.to_dict() if self.class_weights else None,
            "history": [r.to_dict() for r in self.history],
        }


def _as_batch(images: np.ndarray) -> np.ndarray:
    """N x H x W -> N x 1 x H x W; NCHW passes through"""
    return images[:, None, :, :] if images.ndim == 3 else images


class BatchProducer:
    """Builds (and augments) one epoch's batches, optionally on a background thread"""

    _DONE = object()

    def __init__(
        self,
        dataset: Dataset,
        order: np.ndarray,
        batch_size: int,
        seed: int,
        epoch: int,
        augment_cfg: Optional[AugmentConfig],
        prefetch: int
    ):
        self.dataset = dataset
        self.order = order
        self.batch_size = batch_size
        self.seed = seed
        self.epoch = epoch
        self.augment_cfg = augment_cfg
        self.prefetch = prefetch

    def _make_batch(self, indices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        images = self.dataset.images[indices]
        if self.augment_cfg is not None:
            images = np.stack([
                augment_image(img, self.augment_cfg, make_rng(self.seed, "augment", self.epoch, int(i)))
                for img, i in zip(images, indices)
            ])
        return _as_batch(images), self.dataset.labels[indices]

    def _batches(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        for start in range(0, len(self.order), self.batch_size):
            yield self._make_batch(self.order[start:start + self.batch_size])

    def __iter__(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        if self.prefetch <= 0:
            yield from self._batches()
            return

        buffer: "queue.Queue[Any]" = queue.Queue(maxsize=self.prefetch)
        stop = threading.Event()

        def produce():
            try:
                for batch in self._batches():
                    while not stop.is_set():
                        try:
                            buffer.put(batch, timeout=0.1)
                            break
                        except queue.Full:
                            continue
                    if stop.is_set():
                        return
                buffer.put(self._DONE)
            except BaseException as e:  # surfaced on the consumer side
                buffer.put(e)

        worker = threading.Thread(target=produce, name=f"batch-producer-{self.epoch}", daemon=True)
        worker.start()
        try:
            while True:
                item = buffer.get()
                if item is self._DONE:
                    break
                if isinstance(item, BaseException):
                    raise item
                yield item
        finally:
            stop.set()
            worker.join(timeout=5.0)


def _iterate_eval(images: np.ndarray, batch_size: int) -> Iterator[slice]:
    for start in range(0, len(images), batch_size):
        yield slice(start, min(len(images), start + batch_size))


def predict(model: Module, images: np.ndarray, batch_size: int = 32) -> np.ndarray:
    """Evaluation-mode softmax probabilities for N images (N x H x W or NCHW)"""
    images = np.asarray(images, dtype=np.float32)
    if len(images) == 0:
        raise InvalidInputError("predict needs at least one image")
    model.eval()
    out: List[np.ndarray] = []
    with no_grad():
        for part in _iterate_eval(images, batch_size):
            _, probs = model(_as_batch(images[part]))
            out.append(probs.data.astype(np.float64))
    return np.concatenate(out, axis=0)


def evaluate_loss(
    model: Module,
    dataset: Dataset,
    weights: Optional[ClassWeights] = None,
    batch_size: int = 32
) -> Tuple[float, float]:
    """Mean weighted cross-entropy and accuracy of the model on a dataset (evaluation mode)"""
    probs = predict(model, dataset.images, batch_size)
    loss = weighted_cross_entropy(Tensor(probs, dtype=np.float64), dataset.labels, weights)
    accuracy = float(np.mean(probs.argmax(axis=1) == dataset.labels))
    return float(loss.data), accuracy


def _reseed_dropout(model: Module, seed: int, epoch: int) -> None:
    for module in model.modules():
        if isinstance(module, Dropout):
            module.rng = make_rng(seed, "dropout", epoch)


def train_loop(
    model: Module,
    train_set: Dataset,
    val_set: Dataset,
    cfg: TrainConfig,
    augment_cfg: Optional[AugmentConfig] = None,
    class_weights: Optional[ClassWeights] = None,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None
) -> TrainingReport:
    """
    Train until max_epochs or early stopping; the model ends at its best epoch

    Args:
        model: Network returning (logits, probs)
        train_set: Training split
        val_set: Validation split, disjoint from train_set
        cfg: Optimizer / loop settings
        augment_cfg: Augmentation applied when cfg.augment is set
        class_weights: Loss weights; inverse training frequencies when omitted
        on_epoch: Called with every EpochRecord

    Raises:
        InvalidInputError: empty split
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise InvalidInputError(f"train and validation splits must be non-empty ({len(train_set)}/{len(val_set)})")

    num_classes = train_set.num_classes
    weights = class_weights or compute_class_weights(train_set.labels, num_classes)
    params = model.parameters()
    decayed = model.decayed_parameters()
    state = AdamState.zeros_like(params)
    report = TrainingReport(class_weights=weights, optimizer_state=state)
    augmentation = augment_cfg if cfg.augment and augment_cfg is not None else None

    best_state: Optional[Dict[str, np.ndarray]] = None
    stale_epochs = 0
    logger.info(
        f"🚀 Training on {len(train_set)} samples, validating on {len(val_set)} "
        f"(max {cfg.max_epochs} epochs, batch {cfg.batch_size}, patience {cfg.patience})"
    )

    for epoch in range(1, cfg.max_epochs + 1):
        order = make_rng(cfg.seed, "shuffle", epoch).permutation(len(train_set))
        _reseed_dropout(model, cfg.seed, epoch)
        model.train()

        loss_sum = 0.0
        correct = 0
        producer = BatchProducer(train_set, order, cfg.batch_size, cfg.seed, epoch, augmentation, cfg.prefetch)
        for images, labels in producer:
            model.zero_grad()
            _, probs = model(images)
            data_loss = weighted_cross_entropy(probs, labels, weights)
            loss = data_loss + l2_penalty(decayed, cfg.l2_lambda)
            loss.backward()
            adam_step(params, [p.grad for p in params], state, cfg)

            loss_sum += float(data_loss.data) * len(labels)
            correct += int(np.sum(probs.data.argmax(axis=1) == labels))

        val_loss, val_acc = evaluate_loss(model, val_set, weights, cfg.batch_size)
        record = EpochRecord(
            epoch=epoch,
            train_loss=loss_sum / len(train_set),
            train_acc=correct / len(train_set),
            val_loss=val_loss,
            val_acc=val_acc,
        )
        report.history.append(record)
        logger.info(
            f"📈 Epoch {epoch}/{cfg.max_epochs}: train_loss={record.train_loss:.4f} "
            f"train_acc={record.train_acc:.3f} val_loss={val_loss:.4f} val_acc={val_acc:.3f}"
        )
        if on_epoch is not None:
            on_epoch(record)

        if val_loss < report.best_val_loss - cfg.min_delta:
            report.best_val_loss = val_loss
            report.best_epoch = epoch
            best_state = model.state_dict()
            stale_epochs = 0
        else:
            stale_epochs += 1
            if stale_epochs >= cfg.patience:
                report.stopped_early = True
                logger.info(f"⏹️ Early stop after epoch {epoch}: no improvement for {stale_epochs} epoch(s)")
                break

    if best_state is not None:
        model.load_state_dict(best_state)
        logger.info(f"✅ Restored epoch {report.best_epoch} (val_loss={report.best_val_loss:.4f})")
    model.eval()
    return report
