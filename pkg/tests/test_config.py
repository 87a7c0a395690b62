"""
Tests for configuration records and the section.key = value file format
"""

import pytest

from core.config import (
    AugmentConfig,
    NetworkSpec,
    RunConfig,
    TrainConfig,
    load_config,
    parse_config,
    render_config,
)
from core.errors import ConfigError


class TestDefaults:

    def test_documented_defaults(self):
        cfg = RunConfig()
        assert cfg.train.learning_rate == 0.001
        assert (cfg.train.beta1, cfg.train.beta2, cfg.train.epsilon) == (0.9, 0.999, 1e-8)
        assert cfg.train.l2_lambda == 1e-4
        assert (cfg.train.patience, cfg.train.max_epochs, cfg.train.batch_size) == (10, 100, 32)
        assert not cfg.train.bias_correction
        assert cfg.network.side == 128
        assert cfg.network.widths == (32, 64)
        assert cfg.network.orders == (4, 6)
        assert cfg.network.dense_width == 256
        assert cfg.network.dropout == 0.5
        assert cfg.augment.rotation_degrees == 15.0
        assert (cfg.augment.scale_min, cfg.augment.scale_max) == (0.9, 1.1)

    def test_rendered_defaults_parse_back(self):
        cfg = RunConfig()
        assert parse_config(render_config(cfg)) == cfg

    def test_non_default_values_round_trip(self):
        cfg = RunConfig().with_overrides(
            train={"learning_rate": 0.0025, "bias_correction": True},
            network={"side": 32, "widths": (8, 16), "conv_kind": "standard"},
            data={"train_dir": "data/train"},
        )
        assert parse_config(render_config(cfg)) == cfg

    def test_every_key_is_rendered(self):
        text = render_config(RunConfig())
        for section, record in (("train", TrainConfig), ("network", NetworkSpec), ("augment", AugmentConfig)):
            for key in record.model_fields:
                assert f"{section}.{key} = " in text


class TestParse:
    """Parsing and validation errors"""

    def test_partial_file_keeps_defaults(self):
        cfg = parse_config("# comment\n\ntrain.max_epochs = 7   # inline\nnetwork.orders = 2, 3\n")
        assert cfg.train.max_epochs == 7
        assert cfg.network.orders == (2, 3)
        assert cfg.train.learning_rate == 0.001

    def test_hash_inside_value_is_kept(self):
        cfg = parse_config("data.train_dir = data/run#3  # second attempt\n#data.val_dir = x\n")
        assert cfg.data.train_dir == "data/run#3"
        assert cfg.data.val_dir is None

    def test_path_with_hash_round_trips(self):
        cfg = RunConfig().with_overrides(data={"train_dir": "scans/batch#7"})
        assert parse_config(render_config(cfg)) == cfg

    def test_booleans_and_empty_values(self):
        cfg = parse_config("augment.flips = false\ndata.val_dir =\n")
        assert cfg.augment.flips is False
        assert cfg.data.val_dir is None

    def test_unknown_key_names_key_and_line(self):
        with pytest.raises(ConfigError) as info:
            parse_config("train.seed = 1\n\ntrain.momentum = 0.9\n")
        assert info.value.key == "train.momentum"
        assert info.value.line == 3
        assert "line 3" in str(info.value)

    def test_unknown_section(self):
        with pytest.raises(ConfigError) as info:
            parse_config("model.side = 32\n")
        assert info.value.line == 1

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate") as info:
            parse_config("train.seed = 1\ntrain.seed = 2\n")
        assert info.value.line == 2

    def test_malformed_line(self):
        with pytest.raises(ConfigError) as info:
            parse_config("train.seed 1\n")
        assert info.value.line == 1

    def test_invalid_value_names_key_and_line(self):
        with pytest.raises(ConfigError) as info:
            parse_config("train.seed = 1\ntrain.learning_rate = -0.5\n")
        assert info.value.key == "train.learning_rate"
        assert info.value.line == 2

    def test_side_must_divide_by_four(self):
        with pytest.raises(ConfigError):
            parse_config("network.side = 30\n")

    def test_even_kernel_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("network.kernel = 4\n")

    def test_scale_range_checked(self):
        with pytest.raises(ConfigError):
            parse_config("augment.scale_min = 1.2\naugment.scale_max = 1.1\n")


class TestLoadAndOverrides:

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("train.batch_size = 4\n", encoding="utf-8")
        assert load_config(path).train.batch_size == 4

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.cfg")

    def test_override_validation(self):
        with pytest.raises(ConfigError) as info:
            RunConfig().with_overrides(train={"patience": 0})
        assert info.value.key == "train.patience"

    def test_override_unknown_section(self):
        with pytest.raises(ConfigError):
            RunConfig().with_overrides(optimizer={"lr": 1.0})

    def test_records_are_frozen(self):
        with pytest.raises(Exception):
            TrainConfig().learning_rate = 0.5
