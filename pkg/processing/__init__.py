# processing/__init__.py
"""
Image data pipeline: normalization, augmentation, directory ingestion and the
synthetic nodule generator.

Example:
    from processing import generate_synthetic, split_dataset
    data = generate_synthetic(classes=3, per_class=40, side=32, seed=1)
    train, val = split_dataset(data, 0.2, seed=1)
"""
from .normalization import zscore_normalize
from .dataset import Sample, Dataset, LoadReport, split_dataset
from .augmentation import augment, augment_image, rotate, rescale, hflip, vflip
from .loader import ImageIngester, decode_image, load_directory_dataset
from .synthetic import CLASS_NAMES, render_synthetic, generate_synthetic, write_directory_dataset

__all__ = [
    "zscore_normalize",
    "Sample",
    "Dataset",
    "LoadReport",
    "split_dataset",
    "augment",
    "augment_image",
    "rotate",
    "rescale",
    "hflip",
    "vflip",
    "ImageIngester",
    "decode_image",
    "load_directory_dataset",
    "CLASS_NAMES",
    "render_synthetic",
    "generate_synthetic",
    "write_directory_dataset",
]
