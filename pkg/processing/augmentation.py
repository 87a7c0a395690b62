"""
Augmentation - Random geometric and photometric perturbation of one image

Applied in order, each step behind its AugmentConfig flag:
  rotation   angle ~ U(-deg, deg), bilinear, zero fill
  scaling    factor ~ U(scale_min, scale_max), bilinear resample, then
             center crop or zero pad back to the original side
  flips      horizontal and vertical, independently with their probabilities
  noise      additive N(0, sigma^2) per pixel

Fill value 0 equals the mean of a Z-scored image. Labels are never touched.
"""

import logging
from dataclasses import replace

import numpy as np
from PIL import Image

from core.config import AugmentConfig
from core.errors import DimensionError
from .dataset import Sample

logger = logging.getLogger(__name__)


def rotate(image: np.ndarray, degrees: float) -> np.ndarray:
    """Counter-clockwise rotation about the center; exact copy at 0 degrees"""
    if degrees == 0:
        return image.copy()
    pil = Image.fromarray(np.asarray(image, dtype=np.float32))
    return np.asarray(pil.rotate(degrees, resample=Image.BILINEAR, fillcolor=0.0), dtype=np.float32)


def rescale(image: np.ndarray, factor: float) -> np.ndarray:
    """Zoom by `factor` keeping the image side (crop when enlarging, pad when shrinking)"""
    side = image.shape[0]
    new_side = max(1, int(round(side * factor)))
    if new_side == side:
        return image.copy()
    pil = Image.fromarray(np.asarray(image, dtype=np.float32))
    resized = np.asarray(pil.resize((new_side, new_side), resample=Image.BILINEAR), dtype=np.float32)
    if new_side > side:
        start = (new_side - side) // 2
        return np.ascontiguousarray(resized[start:start + side, start:start + side])
    out = np.zeros_like(image, dtype=np.float32)
    start = (side - new_side) // 2
    out[start:start + new_side, start:start + new_side] = resized
    return out


def hflip(image: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(image[:, ::-1])


def vflip(image: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(image[::-1, :])


def augment_image(image: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    """Augmented copy of a square single-channel image"""
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        raise DimensionError("augmentation expects a square H x W image", image.shape)

    out = image.copy()
    if cfg.rotation and cfg.rotation_degrees > 0:
        out = rotate(out, float(rng.uniform(-cfg.rotation_degrees, cfg.rotation_degrees)))
    if cfg.scaling:
        out = rescale(out, float(rng.uniform(cfg.scale_min, cfg.scale_max)))
    if cfg.flips:
        if rng.random() < cfg.hflip_prob:
            out = hflip(out)
        if rng.random() < cfg.vflip_prob:
            out = vflip(out)
    if cfg.noise and cfg.noise_sigma > 0:
        out = out + rng.normal(0.0, cfg.noise_sigma, size=out.shape).astype(np.float32)
    return out


def augment(sample: Sample, cfg: AugmentConfig, rng: np.random.Generator) -> Sample:
    """Augmented copy of a sample; label and identifier preserved"""
    return replace(sample, image=augment_image(sample.image, cfg, rng))
