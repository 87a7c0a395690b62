"""
Tests for the binary checkpoint container
"""

import struct

import numpy as np
import pytest

from chebyshev import fit_coeffs_2d
from core.errors import CheckpointError
from layers import build_network, forward
from storage import (
    FORMAT_VERSION,
    MAGIC,
    load_checkpoint,
    load_coeff_grid,
    restore_model,
    save_checkpoint,
    save_coeff_grid,
)
from storage.checkpoint import _write_container
from training.optimizer import AdamState


@pytest.fixture
def trained_like(small_spec, rng):
    """A network whose parameters and batchnorm buffers differ from initialization"""
    model = build_network(small_spec, seed=7)
    forward(model, rng.standard_normal((6, 1, 16, 16)).astype(np.float32), training=True)
    for p in model.parameters():
        p.data += rng.standard_normal(p.shape).astype(p.dtype) * 0.01
    return model


class TestModelCheckpoint:

    def test_round_trip_is_bit_exact(self, trained_like, tmp_path, rng):
        path = save_checkpoint(tmp_path / "model.ckpt", trained_like, epoch=4, best_val_loss=0.3125,
                               class_names=["a", "b", "c"])
        checkpoint = load_checkpoint(path)
        assert checkpoint.epoch == 4
        assert checkpoint.best_val_loss == 0.3125
        assert checkpoint.version == FORMAT_VERSION
        assert checkpoint.class_names == ["a", "b", "c"]
        assert checkpoint.spec == trained_like.spec

        restored = restore_model(checkpoint)
        original = trained_like.state_dict()
        for name, value in restored.state_dict().items():
            assert value.dtype == original[name].dtype
            np.testing.assert_array_equal(value, original[name])

        batch = rng.standard_normal((3, 1, 16, 16)).astype(np.float32)
        _, expected = forward(trained_like, batch, training=False)
        _, actual = forward(restored, batch, training=False)
        np.testing.assert_array_equal(actual.data, expected.data)

    def test_adam_state_round_trip(self, trained_like, tmp_path, rng):
        params = trained_like.parameters()
        state = AdamState(
            m=[rng.standard_normal(p.shape).astype(np.float32) for p in params],
            v=[rng.random(p.shape).astype(np.float32) for p in params],
            t=17,
        )
        checkpoint = load_checkpoint(save_checkpoint(tmp_path / "m.ckpt", trained_like, state))
        names = [name for name, _ in trained_like.named_parameters()]
        loaded = checkpoint.adam_state(names)
        assert loaded.t == 17
        for a, b in zip(loaded.m + loaded.v, state.m + state.v):
            np.testing.assert_array_equal(a, b)
        assert set(checkpoint.model_state()) == set(trained_like.state_dict())

    def test_without_optimizer_state(self, trained_like, tmp_path):
        checkpoint = load_checkpoint(save_checkpoint(tmp_path / "m.ckpt", trained_like))
        assert checkpoint.adam_state(["conv1.bias"]) is None
        assert np.isnan(checkpoint.best_val_loss)

    def test_float64_model(self, tiny_spec, tmp_path):
        model = build_network(tiny_spec, seed=1, dtype=np.float64)
        restored = restore_model(load_checkpoint(save_checkpoint(tmp_path / "m.ckpt", model)))
        assert restored.parameters()[0].dtype == np.float64

    def test_no_temporary_file_left(self, trained_like, tmp_path):
        save_checkpoint(tmp_path / "m.ckpt", trained_like)
        assert [p.name for p in tmp_path.iterdir()] == ["m.ckpt"]


class TestCorruption:
    """Every malformed container is rejected with a CheckpointError"""

    @pytest.fixture
    def saved(self, trained_like, tmp_path):
        return save_checkpoint(tmp_path / "m.ckpt", trained_like)

    def test_truncated(self, saved):
        data = saved.read_bytes()
        saved.write_bytes(data[: len(data) // 2])
        with pytest.raises(CheckpointError):
            load_checkpoint(saved)

    def test_bad_magic(self, saved):
        data = saved.read_bytes()
        saved.write_bytes(b"NOTACKPT" + data[len(MAGIC):])
        with pytest.raises(CheckpointError, match="magic"):
            load_checkpoint(saved)

    def test_unsupported_version(self, saved):
        data = bytearray(saved.read_bytes())
        data[len(MAGIC):len(MAGIC) + 4] = struct.pack("<I", FORMAT_VERSION + 1)
        saved.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(saved)

    def test_flipped_byte_fails_checksum(self, saved):
        data = bytearray(saved.read_bytes())
        data[-20] ^= 0xFF
        saved.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="checksum"):
            load_checkpoint(saved)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.ckpt")

    def test_coefficient_file_is_not_a_model(self, tmp_path):
        path = save_coeff_grid(tmp_path / "grid.bin", fit_coeffs_2d(lambda x, y: x, (1, 1)))
        with pytest.raises(CheckpointError, match="model"):
            load_checkpoint(path)


class TestCoeffGridStorage:

    def test_round_trip(self, tmp_path, rng):
        grid = fit_coeffs_2d(lambda x, y: np.exp(x) * np.sin(2 * y), (5, 3))
        loaded = load_coeff_grid(save_coeff_grid(tmp_path / "grid.bin", grid))
        assert loaded.orders == (5, 3)
        np.testing.assert_array_equal(loaded.coeffs, grid.coeffs)

    def test_model_file_is_not_a_grid(self, tiny_spec, tmp_path):
        path = save_checkpoint(tmp_path / "m.ckpt", build_network(tiny_spec))
        with pytest.raises(CheckpointError):
            load_coeff_grid(path)

    @pytest.mark.parametrize("manifest", [{}, {"orders": [5]}, {"orders": "ab"}, {"orders": [1, 1]}])
    def test_malformed_grid_manifest(self, tmp_path, manifest):
        coeffs = np.zeros((3, 2), dtype=np.float64)
        path = _write_container(tmp_path / "grid.bin", "coeff_grid", {"coeffs": coeffs}, manifest)
        with pytest.raises(CheckpointError, match="malformed"):
            load_coeff_grid(path)
