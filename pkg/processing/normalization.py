"""
Normalization - Per-image Z-score standardization

(I - mu) / sigma with mu and sigma the mean and population standard deviation
of the image itself.
"""

import numpy as np

from core.errors import DegenerateInputError, InvalidInputError

SIGMA_FLOOR = 1e-8


def zscore_normalize(image: np.ndarray) -> np.ndarray:
    """
    Standardize one image to zero mean and unit standard deviation

    Raises:
        InvalidInputError: empty image
        DegenerateInputError: sigma < 1e-8 (constant image)
    """
    values = np.asarray(image, dtype=np.float64)
    if values.size == 0:
        raise InvalidInputError("cannot normalize an empty image")
    mu = values.mean()
    sigma = values.std()
    if sigma < SIGMA_FLOOR:
        raise DegenerateInputError(f"image is constant (sigma={sigma:.3e}); Z-score undefined")
    return ((values - mu) / sigma).astype(np.float32)
