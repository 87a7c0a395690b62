"""
rng.py
Per-purpose random streams derived from one seed.

Each purpose (initialization, shuffling, dropout, augmentation, splitting,
synthetic rendering) draws from its own SeedSequence, so consuming numbers in
one stream never shifts another and a background thread cannot perturb results.

Example:
    from core.rng import make_rng
    rng = make_rng(7, "augment", epoch, index)
"""
from typing import Dict

import numpy as np

STREAMS: Dict[str, int] = {
    "init": 1,
    "shuffle": 2,
    "dropout": 3,
    "augment": 4,
    "split": 5,
    "synthetic": 6,
}


def make_rng(seed: int, stream: str, *keys: int) -> np.random.Generator:
    """Generator for (seed, stream, *keys); identical arguments give identical draws"""
    if stream not in STREAMS:
        raise KeyError(f"Unknown random stream: {stream}")
    entropy = [int(seed), STREAMS[stream], *(int(k) for k in keys)]
    return np.random.default_rng(np.random.SeedSequence(entropy))
