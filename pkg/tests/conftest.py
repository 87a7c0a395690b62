"""
Shared fixtures: small network specs, synthetic datasets and PNG folders.
"""

import logging

import numpy as np
import pytest

from core.config import AugmentConfig, NetworkSpec, TrainConfig
from engine.tensor import set_finite_checks
from processing.synthetic import CLASS_NAMES, generate_synthetic, render_synthetic, write_directory_dataset

logging.basicConfig(level=logging.INFO)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="also run the full-size training and ablation runs")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size training runs, skipped without --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def finite_checks_on():
    set_finite_checks(True)
    yield
    set_finite_checks(True)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_spec():
    """Two-stage network at side 8, small enough for float64 gradient checks"""
    return NetworkSpec(side=8, widths=(2, 3), orders=(2, 3), dense_width=5, num_classes=3, dropout=0.0)


@pytest.fixture
def small_spec():
    """Desk-scale network for short training runs"""
    return NetworkSpec(side=16, widths=(4, 8), orders=(2, 3), dense_width=16, num_classes=3, dropout=0.25)


@pytest.fixture
def fast_train_cfg():
    return TrainConfig(max_epochs=3, batch_size=8, patience=5, seed=3, learning_rate=0.003, prefetch=2)


@pytest.fixture
def no_augment():
    return AugmentConfig.disabled()


@pytest.fixture
def synthetic_small():
    return generate_synthetic(classes=3, per_class=12, side=16, seed=5)


@pytest.fixture
def png_dataset(tmp_path):
    """3 classes x 4 PNGs of side 16 on disk"""
    images, labels = render_synthetic(per_class=4, side=16, seed=2, classes=3)
    root = tmp_path / "pngs"
    write_directory_dataset(root, images, labels, CLASS_NAMES[3])
    return root
