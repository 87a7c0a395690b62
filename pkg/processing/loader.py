"""
Image Ingester - Loads a directory-of-PNG dataset

Responsibility: decode one subdirectory per class (lexicographic order gives
the label), resize to side x side with bilinear interpolation and Z-score
each image. Unreadable or constant images are skipped and recorded in a
LoadReport; decoding runs on a thread pool with results kept in file order.

Layout:
  root/
    <class_a>/*.png
    <class_b>/*.png
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from core.errors import DegenerateInputError, InvalidInputError
from .dataset import Dataset, LoadReport
from .normalization import zscore_normalize

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png",)


def decode_image(path: Union[str, Path], side: int) -> np.ndarray:
    """8-bit grayscale decode, bilinear resize to side x side, Z-score"""
    with Image.open(path) as img:
        gray = img.convert("L")
        pixels = np.asarray(gray, dtype=np.float32)
    if pixels.shape != (side, side):
        resized = Image.fromarray(pixels).resize((side, side), resample=Image.BILINEAR)
        pixels = np.asarray(resized, dtype=np.float32)
    return zscore_normalize(pixels)


class ImageIngester:
    """Decodes and normalizes class-labelled image folders"""

    def __init__(self, side: int, workers: int = 4):
        """
        Args:
            side: Output image side length
            workers: Decoder threads
        """
        if side < 1:
            raise InvalidInputError(f"side must be positive, got {side}")
        self.side = side
        self.workers = max(1, workers)

    @staticmethod
    def class_directories(root: Path) -> List[Path]:
        if not root.is_dir():
            raise InvalidInputError(f"dataset root is not a directory: {root}")
        classes = sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: p.name)
        if not classes:
            raise InvalidInputError(f"no class subdirectories under {root}")
        return classes

    @staticmethod
    def image_files(class_dir: Path) -> List[Path]:
        return sorted(p for p in class_dir.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)

    def _decode(self, path: Path) -> Tuple[Path, Union[np.ndarray, str]]:
        try:
            return path, decode_image(path, self.side)
        except (UnidentifiedImageError, OSError, ValueError) as e:
            return path, f"unreadable image: {e}"
        except DegenerateInputError as e:
            return path, str(e)

    def load(self, root: Union[str, os.PathLike]) -> Dataset:
        """
        Load every class directory under root

        Raises:
            InvalidInputError: missing root, no classes, or a class with no
                usable image
        """
        root = Path(root)
        classes = self.class_directories(root)
        jobs: List[Tuple[int, Path]] = []
        for label, class_dir in enumerate(classes):
            files = self.image_files(class_dir)
            if not files:
                raise InvalidInputError(f"class '{class_dir.name}' has no images")
            jobs.extend((label, path) for path in files)

        report = LoadReport()
        images: List[np.ndarray] = []
        labels: List[int] = []
        identifiers: List[str] = []
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            decoded = pool.map(self._decode, [path for _, path in jobs])
            for (label, _), (path, result) in zip(jobs, decoded):
                ident = f"{path.parent.name}/{path.name}"
                if isinstance(result, str):
                    report.failures.append((str(path), result))
                    logger.warning(f"⚠️ Skipping {ident}: {result}")
                    continue
                images.append(result)
                labels.append(label)
                identifiers.append(ident)
        report.loaded = len(images)

        counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=len(classes))
        empty = [classes[c].name for c in np.flatnonzero(counts == 0)]
        if empty:
            raise InvalidInputError(f"no readable images for class(es): {', '.join(empty)}")

        dataset = Dataset(
            images=np.stack(images),
            labels=np.asarray(labels),
            identifiers=identifiers,
            class_names=[c.name for c in classes],
            report=report,
        )
        logger.info(
            f"✅ Loaded {report.loaded} images from {root} "
            f"({len(classes)} classes, {report.failed} skipped)"
        )
        return dataset


def load_directory_dataset(root: Union[str, os.PathLike], side: int, workers: int = 4) -> Dataset:
    """Shortcut for ImageIngester(side, workers).load(root); the LoadReport is on dataset.report"""
    return ImageIngester(side, workers).load(root)
