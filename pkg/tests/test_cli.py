"""
Tests for the chebcnn command line
"""

import json
import logging

import numpy as np
import pandas as pd
import pytest
from PIL import Image

from cli.main import build_parser, main
from core.config import parse_config
from layers import build_network
from storage import load_checkpoint, load_coeff_grid, save_checkpoint

SMALL_CONFIG = """\
network.side = 16
network.widths = 4, 8
network.orders = 2, 3
network.dense_width = 16
network.dropout = 0.0
train.max_epochs = 2
train.batch_size = 8
train.prefetch = 0
data.workers = 1
"""


@pytest.fixture(autouse=True)
def restore_root_logger():
    """main() reconfigures the root logger; put pytest's handlers back"""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(SMALL_CONFIG, encoding="utf-8")
    return path


@pytest.fixture
def generated(tmp_path):
    out = tmp_path / "synth"
    assert main(["generate", "--out", str(out), "--per-class", "6", "--side", "16", "--seed", "1"]) == 0
    return out


class TestParser:

    def test_no_command_is_usage_error(self, capsys):
        assert main([]) == 2
        assert "usage" in capsys.readouterr().out

    def test_unknown_command_exits_two(self):
        with pytest.raises(SystemExit) as info:
            main(["fly"])
        assert info.value.code == 2

    def test_print_defaults_is_a_valid_config(self, capsys):
        assert main(["--print-defaults"]) == 0
        cfg = parse_config(capsys.readouterr().out)
        assert cfg.network.side == 128

    def test_train_requires_out(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["train", "--data", "x"])


class TestGenerate:

    def test_writes_class_folders(self, tmp_path, capsys):
        out = tmp_path / "synth"
        assert main(["generate", "--out", str(out), "--per-class", "10", "--side", "16"]) == 0
        assert len(list(out.rglob("*.png"))) == 30
        assert sorted(p.name for p in out.iterdir()) == ["0_benign", "1_low_risk", "2_high_risk"]
        assert "Wrote 30 images" in capsys.readouterr().out

    def test_binary_variant(self, tmp_path):
        out = tmp_path / "bin"
        assert main(["generate", "--out", str(out), "--per-class", "2", "--side", "8", "--classes", "2"]) == 0
        assert sorted(p.name for p in out.iterdir()) == ["0_benign", "1_malignant"]

    def test_same_seed_writes_identical_files(self, tmp_path):
        for name in ("a", "b"):
            assert main(["generate", "--out", str(tmp_path / name), "--per-class", "2", "--side", "8",
                         "--seed", "9"]) == 0
        first = sorted((tmp_path / "a").rglob("*.png"))
        second = sorted((tmp_path / "b").rglob("*.png"))
        assert [p.relative_to(tmp_path / "a") for p in first] == [p.relative_to(tmp_path / "b") for p in second]
        assert all(a.read_bytes() == b.read_bytes() for a, b in zip(first, second))

    def test_zero_per_class_fails(self, tmp_path, capsys):
        assert main(["generate", "--out", str(tmp_path / "x"), "--per-class", "0"]) == 1
        assert "❌ Error:" in capsys.readouterr().err


class TestTrainAndEval:
    """Short end-to-end run on generated PNGs"""

    def test_train_then_eval(self, generated, small_config, tmp_path, capsys):
        ckpt = tmp_path / "runs" / "best.ckpt"
        curves = tmp_path / "runs" / "curves.csv"
        code = main(["train", "--config", str(small_config), "--data", str(generated),
                     "--out", str(ckpt), "--curves", str(curves), "--seed", "2"])
        assert code == 0
        assert ckpt.is_file()
        assert len(pd.read_csv(curves)) == 2
        checkpoint = load_checkpoint(ckpt)
        assert checkpoint.class_names == ["0_benign", "1_low_risk", "2_high_risk"]
        assert 1 <= checkpoint.epoch <= 2

        report = tmp_path / "runs" / "report.txt"
        assert main(["eval", "--ckpt", str(ckpt), "--data", str(generated),
                     "--report", str(report), "--workers", "1"]) == 0
        out = capsys.readouterr().out
        assert "Classification report" in out
        payload = json.loads(report.with_name("report.txt.json").read_text(encoding="utf-8"))
        assert sum(map(sum, payload["confusion"])) == 18
        assert report.with_name("report.txt.roc.csv").is_file()

    def test_same_seed_writes_identical_curves(self, generated, small_config, tmp_path):
        curves = []
        for name in ("a", "b"):
            path = tmp_path / name / "curves.csv"
            assert main(["train", "--config", str(small_config), "--data", str(generated),
                         "--out", str(tmp_path / name / "m.ckpt"), "--curves", str(path), "--seed", "5"]) == 0
            curves.append(path.read_bytes())
        assert curves[0] == curves[1]

    def test_epochs_override(self, generated, small_config, tmp_path):
        curves = tmp_path / "curves.csv"
        assert main(["train", "--config", str(small_config), "--data", str(generated),
                     "--out", str(tmp_path / "m.ckpt"), "--curves", str(curves), "--epochs", "1"]) == 0
        assert pd.read_csv(curves)["epoch"].tolist() == [1]

    def test_missing_data_directory(self, small_config, tmp_path, capsys):
        code = main(["train", "--config", str(small_config), "--data", str(tmp_path / "absent"),
                     "--out", str(tmp_path / "m.ckpt")])
        assert code == 1
        assert "❌ Error:" in capsys.readouterr().err

    def test_no_data_configured(self, small_config, tmp_path, capsys):
        assert main(["train", "--config", str(small_config), "--out", str(tmp_path / "m.ckpt")]) == 1
        assert "data.train_dir" in capsys.readouterr().err

    def test_bad_config_file(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("train.momentum = 0.9\n", encoding="utf-8")
        assert main(["summary", "--config", str(path)]) == 1
        assert "train.momentum" in capsys.readouterr().err

    def test_eval_rejects_corrupt_checkpoint(self, generated, tmp_path, capsys):
        ckpt = tmp_path / "broken.ckpt"
        ckpt.write_bytes(b"garbage")
        assert main(["eval", "--ckpt", str(ckpt), "--data", str(generated),
                     "--report", str(tmp_path / "r.txt")]) == 1

    def test_eval_rejects_empty_class_directory(self, generated, small_spec, tmp_path, capsys):
        ckpt = save_checkpoint(tmp_path / "m.ckpt", build_network(small_spec))
        (generated / "3_empty").mkdir()
        assert main(["eval", "--ckpt", str(ckpt), "--data", str(generated),
                     "--report", str(tmp_path / "r.txt")]) == 1
        assert "3_empty" in capsys.readouterr().err


class TestAblate:

    def test_two_seeds_both_arms(self, generated, small_config, tmp_path):
        report = tmp_path / "ablation.csv"
        code = main(["ablate", "--config", str(small_config), "--data", str(generated),
                     "--seeds", "0,1", "--epochs", "1", "--report", str(report)])
        assert code == 0
        frame = pd.read_csv(report, dtype={"seed": str})
        assert len(frame) == 6
        means = frame[frame["seed"] == "mean"].set_index("arm")
        assert set(means.index) == {"cheb", "standard"}
        assert means.loc["cheb", "parameters"] > means.loc["standard", "parameters"]

    @pytest.mark.parametrize("seeds", ["0", "1,1", "a,b"])
    def test_seed_list_validation(self, generated, small_config, tmp_path, seeds, capsys):
        code = main(["ablate", "--config", str(small_config), "--data", str(generated),
                     "--seeds", seeds, "--report", str(tmp_path / "a.csv")])
        assert code == 1
        assert "seeds" in capsys.readouterr().err

    @pytest.mark.slow
    def test_cheb_arm_keeps_up_with_standard(self, tmp_path):
        data = tmp_path / "synth32"
        assert main(["generate", "--out", str(data), "--per-class", "100", "--side", "32", "--seed", "0"]) == 0
        config = tmp_path / "side32.cfg"
        config.write_text("network.side = 32\nnetwork.dense_width = 64\n"
                          "train.max_epochs = 20\ntrain.patience = 5\n", encoding="utf-8")
        report = tmp_path / "ablation.csv"
        assert main(["ablate", "--config", str(config), "--data", str(data),
                     "--seeds", "0,1,2", "--report", str(report)]) == 0
        frame = pd.read_csv(report, dtype={"seed": str})
        means = frame[frame["seed"] == "mean"].set_index("arm")
        assert means.loc["cheb", "val_accuracy"] >= means.loc["standard", "val_accuracy"] - 0.02


class TestApprox:

    @pytest.fixture
    def image_file(self, tmp_path):
        y, x = np.mgrid[0:24, 0:24]
        pixels = (127 + 100 * np.sin(x / 5.0) * np.cos(y / 7.0)).astype(np.uint8)
        path = tmp_path / "img.png"
        Image.fromarray(pixels).save(path)
        return path

    def test_curve_csv_and_coefficients(self, image_file, tmp_path, capsys):
        csv_path = tmp_path / "curve.csv"
        grid_path = tmp_path / "coeffs.bin"
        assert main(["approx", "--image", str(image_file), "--order", "5",
                     "--out", str(csv_path), "--save-coeffs", str(grid_path)]) == 0
        frame = pd.read_csv(csv_path)
        assert frame["order"].tolist() == list(range(6))
        assert np.all(np.diff(frame["node_rmse"]) <= 1e-12)
        assert load_coeff_grid(grid_path).orders == (5, 5)
        assert "node_rmse" in capsys.readouterr().out

    def _curve(self, tmp_path, pixels, order):
        image = tmp_path / "exact.png"
        Image.fromarray(np.asarray(pixels, dtype=np.uint8)).save(image)
        out = tmp_path / "exact.csv"
        assert main(["approx", "--image", str(image), "--order", str(order), "--out", str(out)]) == 0
        return pd.read_csv(out)

    def test_constant_image_is_exact_from_order_zero(self, tmp_path):
        frame = self._curve(tmp_path, np.full((16, 16), 90), 3)
        assert np.all(frame["node_rmse"] < 1e-9)
        assert np.all(frame["pixel_rmse"] < 1e-9)

    def test_product_image_is_exact_from_order_one(self, tmp_path):
        """Corners 1, 0, 0, 1 interpolate to (1 + x y) / 2"""
        frame = self._curve(tmp_path, [[255, 0], [0, 255]], 3)
        assert frame["node_rmse"].iloc[0] > 0.1
        assert np.all(frame["node_rmse"].iloc[1:] < 1e-9)

    def test_too_few_nodes(self, image_file, capsys):
        assert main(["approx", "--image", str(image_file), "--order", "5", "--nodes", "3"]) == 1
        assert "nodes" in capsys.readouterr().err

    def test_unreadable_image(self, tmp_path):
        path = tmp_path / "x.png"
        path.write_bytes(b"nope")
        assert main(["approx", "--image", str(path), "--order", "2"]) == 1


class TestSpectralDemo:

    def test_locality_holds(self, capsys):
        assert main(["spectral-demo", "--dim", "16", "--order", "3", "--seed", "4"]) == 0
        out = capsys.readouterr().out
        assert "holds" in out
        assert "path graph d=16" in out

    @pytest.mark.parametrize("dim", ["0", "65"])
    def test_dimension_range(self, dim):
        assert main(["spectral-demo", "--dim", dim]) == 1

    def test_negative_order(self):
        assert main(["spectral-demo", "--order", "-1"]) == 1


class TestSummary:

    def test_default_ledger(self, capsys):
        assert main(["summary"]) == 0
        out = capsys.readouterr().out
        assert "total" in out
        assert "cheb=" in out and "standard=" in out

    def test_small_config(self, small_config, capsys):
        assert main(["summary", "--config", str(small_config)]) == 0
        assert "conv1" in capsys.readouterr().out
