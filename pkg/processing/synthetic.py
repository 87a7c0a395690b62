"""
Synthetic nodules - Desk-scale stand-in for CT nodule patches

Every image is a noisy background with a bright blob whose texture depends on
the class:

  benign      smooth Gaussian blobs
  low_risk    blob modulated by a low-frequency sinusoid (1.5-3 cycles/image)
  high_risk   irregular (radially perturbed) boundary and a high-frequency
              texture (side/5 - side/4 cycles/image)

Images are rendered in [0, 1], quantized to 8 bits and then Z-scored, exactly
as a PNG written by write_directory_dataset would be when loaded back.
Each sample draws from its own stream keyed by (seed, class, index).

Example:
    from processing.synthetic import generate_synthetic
    data = generate_synthetic(classes=3, per_class=50, side=32, seed=0)
"""

import logging
import os
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from PIL import Image

from core.errors import DimensionError, InvalidInputError
from core.rng import make_rng
from .dataset import Dataset
from .normalization import zscore_normalize

logger = logging.getLogger(__name__)

CLASS_NAMES: Dict[int, Tuple[str, ...]] = {
    2: ("0_benign", "1_malignant"),
    3: ("0_benign", "1_low_risk", "2_high_risk"),
}
# Texture rendered for each class, by class count
_TEXTURES: Dict[int, Tuple[str, ...]] = {
    2: ("smooth", "high"),
    3: ("smooth", "low", "high"),
}

BACKGROUND_LEVEL = 0.2
BACKGROUND_NOISE = 0.03


def _grid(side: int) -> Tuple[np.ndarray, np.ndarray]:
    axis = np.linspace(-1.0, 1.0, side)
    return np.meshgrid(axis, axis, indexing="xy")


def _render_one(texture: str, side: int, rng: np.random.Generator) -> np.ndarray:
    x, y = _grid(side)
    cx, cy = rng.uniform(-0.3, 0.3, size=2)
    radius = rng.uniform(0.25, 0.45)
    amplitude = rng.uniform(0.45, 0.6)
    dx, dy = x - cx, y - cy
    dist = np.hypot(dx, dy)

    if texture == "high":
        # irregular boundary: radius modulated around the circumference
        lobes = rng.integers(5, 9)
        phase = rng.uniform(0, 2 * np.pi)
        theta = np.arctan2(dy, dx)
        edge = radius * (1.0 + 0.25 * np.sin(lobes * theta + phase))
        body = 1.0 / (1.0 + np.exp((dist - edge) / 0.04))
    else:
        body = np.exp(-2.0 * (dist / radius) ** 2)
        if texture == "smooth":
            # faint satellite blob
            sx, sy = rng.uniform(-0.7, 0.7, size=2)
            body = body + 0.35 * np.exp(-2.0 * (np.hypot(x - sx, y - sy) / (0.5 * radius)) ** 2)

    if texture in ("low", "high"):
        if texture == "low":
            cycles = rng.uniform(1.5, 3.0)
        else:
            cycles = rng.uniform(side / 5.0, side / 4.0)
        angle = rng.uniform(0, np.pi)
        phase = rng.uniform(0, 2 * np.pi)
        # coordinates span 2 units, so cycles/image -> cycles/2 per unit
        u = x * np.cos(angle) + y * np.sin(angle)
        body = body * (1.0 + 0.6 * np.sin(np.pi * cycles * u + phase))

    image = BACKGROUND_LEVEL + amplitude * body
    image = image + rng.normal(0.0, BACKGROUND_NOISE, size=image.shape)
    return np.clip(image, 0.0, 1.0)


def render_synthetic(
    per_class: int,
    side: int,
    seed: int,
    classes: int = 3
) -> Tuple[np.ndarray, np.ndarray]:
    """
    8-bit images (N x side x side uint8) and labels, class-major order

    Raises:
        InvalidInputError: per_class < 1, unsupported class count or side < 4
    """
    if per_class < 1:
        raise InvalidInputError(f"per_class must be >= 1, got {per_class}")
    if classes not in _TEXTURES:
        raise InvalidInputError(f"synthetic data supports {sorted(_TEXTURES)} classes, got {classes}")
    if side < 4:
        raise InvalidInputError(f"side must be >= 4, got {side}")

    images = np.empty((classes * per_class, side, side), dtype=np.uint8)
    labels = np.repeat(np.arange(classes, dtype=np.int64), per_class)
    for c, texture in enumerate(_TEXTURES[classes]):
        for i in range(per_class):
            raw = _render_one(texture, side, make_rng(seed, "synthetic", c, i))
            images[c * per_class + i] = np.round(raw * 255.0).astype(np.uint8)
    return images, labels


def generate_synthetic(classes: int = 3, per_class: int = 250, side: int = 128, seed: int = 0) -> Dataset:
    """Balanced, Z-scored synthetic dataset; identical for identical arguments"""
    raw, labels = render_synthetic(per_class, side, seed, classes)
    names = list(CLASS_NAMES[classes])
    dataset = Dataset(
        images=np.stack([zscore_normalize(img) for img in raw]),
        labels=labels,
        identifiers=[f"{names[c]}/{names[c]}_{i % per_class:05d}.png" for i, c in enumerate(labels)],
        class_names=names,
    )
    logger.info(f"✅ Generated {len(dataset)} synthetic images ({classes} x {per_class}, side {side})")
    return dataset


def write_directory_dataset(
    root: Union[str, os.PathLike],
    images: np.ndarray,
    labels: Sequence[int],
    class_names: Sequence[str]
) -> List[Path]:
    """Write 8-bit images as root/<class>/<class>_<i>.png; returns the written paths"""
    images = np.asarray(images)
    labels = np.asarray(labels, dtype=np.int64)
    if images.dtype != np.uint8 or images.ndim != 3:
        raise DimensionError("expected N x H x W uint8 images", images.shape)
    if labels.shape != (images.shape[0],):
        raise DimensionError("one label per image expected", labels.shape, (images.shape[0],))

    root = Path(root)
    written: List[Path] = []
    counters = [0] * len(class_names)
    for image, label in zip(images, labels):
        name = class_names[label]
        folder = root / name
        folder.mkdir(parents=True, exist_ok=True)
        path = folder / f"{name}_{counters[label]:05d}.png"
        Image.fromarray(image).save(path)
        counters[label] += 1
        written.append(path)
    logger.info(f"✅ Wrote {len(written)} PNG files under {root}")
    return written
