"""
Dataset - In-memory labelled image collection

Responsibility: hold normalized side x side images with labels, identifiers
and class names; seeded stratified train/validation splitting.

Interface:
  Dataset(images, labels, identifiers, class_names)
  dataset[i] -> Sample
  split_dataset(dataset, val_fraction, seed) -> (train, val)
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import DimensionError, InvalidInputError
from core.rng import make_rng

logger = logging.getLogger(__name__)


@dataclass
class Sample:
    """One image with its class index and source identifier"""
    image: np.ndarray
    label: int
    identifier: str


@dataclass
class LoadReport:
    """Outcome of a directory load: files accepted and files skipped with a reason"""
    loaded: int = 0
    failures: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return len(self.failures)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "loaded": self.loaded,
            "failed": self.failed,
            "failures": [{"path": p, "reason": r} for p, r in self.failures],
        }


@dataclass
class Dataset:
    """N single-channel images (N x side x side float32) with labels"""
    images: np.ndarray
    labels: np.ndarray
    identifiers: List[str]
    class_names: List[str]
    report: Optional[LoadReport] = None

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.images.ndim != 3 or self.images.shape[1] != self.images.shape[2]:
            raise DimensionError("dataset images must be N x side x side", self.images.shape)
        if self.labels.shape != (self.images.shape[0],):
            raise DimensionError("one label per image expected", self.labels.shape, (self.images.shape[0],))
        if len(self.identifiers) != len(self.labels):
            raise InvalidInputError("one identifier per image expected")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise InvalidInputError(f"labels must lie in [0, {len(self.class_names)})")

    def __len__(self) -> int:
        return int(self.labels.size)

    def __getitem__(self, index: int) -> Sample:
        return Sample(self.images[index], int(self.labels[index]), self.identifiers[index])

    @property
    def side(self) -> int:
        return int(self.images.shape[1])

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            images=self.images[indices],
            labels=self.labels[indices],
            identifiers=[self.identifiers[i] for i in indices],
            class_names=list(self.class_names),
        )

    def summary(self) -> Dict[str, Any]:
        return {
            "samples": len(self),
            "side": self.side,
            "classes": {name: int(n) for name, n in zip(self.class_names, self.class_counts())},
        }


def split_dataset(dataset: Dataset, val_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """
    Stratified seeded split; the two parts are disjoint and together exhaustive

    Each class contributes round(n_c * val_fraction) samples to validation,
    at least one when it has two or more samples, and always keeps one for
    training.

    Raises:
        InvalidInputError: fraction outside (0, 1) or a split would be empty
    """
    if not 0.0 < val_fraction < 1.0:
        raise InvalidInputError(f"val_fraction must lie in (0, 1), got {val_fraction}")
    rng = make_rng(seed, "split")
    val_indices: List[int] = []
    train_indices: List[int] = []
    for c in range(dataset.num_classes):
        members = np.flatnonzero(dataset.labels == c)
        if members.size == 0:
            continue
        members = rng.permutation(members)
        n_val = int(round(members.size * val_fraction))
        if members.size >= 2:
            n_val = min(max(n_val, 1), members.size - 1)
        else:
            n_val = 0
        val_indices.extend(members[:n_val].tolist())
        train_indices.extend(members[n_val:].tolist())

    if not train_indices or not val_indices:
        raise InvalidInputError(f"split of {len(dataset)} samples leaves an empty partition")
    train, val = dataset.subset(sorted(train_indices)), dataset.subset(sorted(val_indices))
    logger.info(f"✅ Split {len(dataset)} samples into {len(train)} train / {len(val)} validation")
    return train, val
