"""
CLI - Command-line entry point for the Chebyshev CNN toolkit

Subcommands:
  generate        write the synthetic nodule dataset as class folders of PNGs
  train           train on a directory dataset, write checkpoint and curves
  eval            evaluate a checkpoint, write report / confusion / ROC files
  ablate          Chebyshev vs standard convolution over several seeds
  approx          2D Chebyshev approximation error of an image by order
  spectral-demo   Chebyshev spectral filter on a path graph, with locality check
  summary         layer ledger and parameter counts of a configuration

Exit code 0 on success, 1 on any toolkit or I/O error (one-line message on
stderr), 2 on usage errors.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError

from chebyshev import (
    approximation_curve,
    apply_filter,
    cheb_gauss_nodes,
    eigen_filter,
    fit_coeffs_2d,
    locality_certificate,
    path_laplacian,
    rescale,
    sample_image_at_nodes,
)
from core.config import RunConfig, load_config, render_config
from core.errors import ChebCNNError, InvalidInputError
from evaluation import build_report, confusion, multiclass_auc, roc_points
from infrastructure.logging import init_logging
from layers import build_network, describe_network, render_ledger
from processing import CLASS_NAMES, Dataset, load_directory_dataset, render_synthetic, split_dataset
from processing import write_directory_dataset
from storage import load_checkpoint, restore_model, save_checkpoint, save_coeff_grid
from training import evaluate_loss, predict, train_loop

logger = logging.getLogger(__name__)

MAX_SPECTRAL_DIM = 64


# ========== helpers ==========

def _load_run_config(path: Optional[str]) -> RunConfig:
    return load_config(path) if path else RunConfig()


def _parse_seeds(text: str) -> List[int]:
    try:
        seeds = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidInputError(f"seeds must be comma-separated integers, got '{text}'") from None
    if len(seeds) < 2:
        raise InvalidInputError(f"ablation needs at least 2 seeds for a mean, got {len(seeds)}")
    if len(set(seeds)) != len(seeds):
        raise InvalidInputError(f"seeds must be distinct, got {seeds}")
    return seeds


def _training_data(cfg: RunConfig, data_dir: Optional[str], val_dir: Optional[str], seed: int):
    """(train, val) from a directory, an optional separate validation directory or a seeded split"""
    train_dir = data_dir or cfg.data.train_dir
    if not train_dir:
        raise InvalidInputError("no training data: pass --data or set data.train_dir")
    dataset = load_directory_dataset(train_dir, cfg.network.side, cfg.data.workers)
    val_dir = val_dir or cfg.data.val_dir
    if val_dir:
        val = load_directory_dataset(val_dir, cfg.network.side, cfg.data.workers)
        if val.class_names != dataset.class_names:
            raise InvalidInputError(f"validation classes {val.class_names} differ from training {dataset.class_names}")
        return dataset, val
    return split_dataset(dataset, cfg.data.val_fraction, seed)


def _match_classes(cfg: RunConfig, dataset: Dataset) -> RunConfig:
    if cfg.network.num_classes != dataset.num_classes:
        logger.warning(
            f"⚠️ network.num_classes={cfg.network.num_classes} but the data has "
            f"{dataset.num_classes} classes; using {dataset.num_classes}"
        )
        cfg = cfg.with_overrides(network={"num_classes": dataset.num_classes})
    return cfg


def _train_overrides(args: argparse.Namespace) -> Dict[str, object]:
    overrides: Dict[str, object] = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "epochs", None) is not None:
        overrides["max_epochs"] = args.epochs
    return overrides


def _read_gray_image(path: str) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("L"), dtype=np.float64) / 255.0
    except (UnidentifiedImageError, OSError) as e:
        raise InvalidInputError(f"cannot read image {path}: {e}") from None


# ========== commands ==========

def cmd_generate(args: argparse.Namespace) -> int:
    images, labels = render_synthetic(args.per_class, args.side, args.seed, args.classes)
    names = CLASS_NAMES[args.classes]
    write_directory_dataset(args.out, images, labels, names)
    counts = np.bincount(labels, minlength=len(names))
    print(f"✅ Wrote {len(labels)} images to {args.out}")
    for name, count in zip(names, counts):
        print(f"  {name:<14} {count}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args.config)
    overrides = _train_overrides(args)
    if overrides:
        cfg = cfg.with_overrides(train=overrides)

    train_set, val_set = _training_data(cfg, args.data, args.val_data, cfg.train.seed)
    cfg = _match_classes(cfg, train_set)
    model = build_network(cfg.network, seed=cfg.train.seed)
    report = train_loop(model, train_set, val_set, cfg.train, cfg.augment)

    save_checkpoint(
        args.out, model,
        adam_state=report.optimizer_state,
        epoch=report.best_epoch,
        best_val_loss=report.best_val_loss,
        class_names=train_set.class_names,
    )
    if args.curves:
        report.save_curves(args.curves)

    val_loss, val_acc = evaluate_loss(model, val_set, report.class_weights, cfg.train.batch_size)
    status = "early stop" if report.stopped_early else "max epochs"
    print(f"✅ Trained {report.epochs_run} epoch(s) ({status}); best epoch {report.best_epoch}")
    print(f"  val_loss={val_loss:.4f}  val_acc={100 * val_acc:.2f}%")
    print(f"  checkpoint: {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    checkpoint = load_checkpoint(args.ckpt)
    model = restore_model(checkpoint)
    spec = model.spec
    dataset = load_directory_dataset(args.data, spec.side, args.workers)
    if dataset.num_classes != spec.num_classes:
        raise InvalidInputError(f"data has {dataset.num_classes} classes, checkpoint expects {spec.num_classes}")
    names = checkpoint.class_names or dataset.class_names

    probs = predict(model, dataset.images, args.batch_size)
    matrix = confusion(dataset.labels, probs.argmax(axis=1), spec.num_classes)
    auc = multiclass_auc(probs, dataset.labels)
    report = build_report(matrix, names, auc)
    paths = report.save(args.report)

    roc_frames = []
    for c, name in enumerate(names):
        positives = (dataset.labels == c).astype(np.int64)
        if positives.min() == positives.max():
            continue
        frame = roc_points(probs[:, c], positives)
        frame.insert(0, "class", name)
        roc_frames.append(frame)
    roc_path = Path(args.report).with_name(Path(args.report).name + ".roc.csv")
    if roc_frames:
        pd.concat(roc_frames, ignore_index=True).to_csv(roc_path, index=False)

    print(report.render(), end="")
    print(f"✅ Report: {paths['text']}  (+ .json, .confusion.csv{', .roc.csv' if roc_frames else ''})")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    seeds = _parse_seeds(args.seeds)
    base = _load_run_config(args.config)
    overrides = _train_overrides(args)
    if overrides:
        base = base.with_overrides(train=overrides)

    rows = []
    for seed in seeds:
        cfg = base.with_overrides(train={"seed": seed})
        train_set, val_set = _training_data(cfg, args.data, args.val_data, seed)
        cfg = _match_classes(cfg, train_set)
        for arm in ("cheb", "standard"):
            arm_cfg = cfg.with_overrides(network={"conv_kind": arm})
            model = build_network(arm_cfg.network, seed=seed)
            report = train_loop(model, train_set, val_set, arm_cfg.train, arm_cfg.augment)
            val_loss, val_acc = evaluate_loss(model, val_set, report.class_weights, arm_cfg.train.batch_size)
            rows.append({
                "arm": arm,
                "seed": str(seed),
                "val_accuracy": val_acc,
                "val_loss": val_loss,
                "best_epoch": report.best_epoch,
                "epochs_run": report.epochs_run,
                "parameters": model.num_parameters(),
            })
            logger.info(f"✅ Ablation seed={seed} arm={arm}: val_acc={val_acc:.4f}")

    frame = pd.DataFrame(rows)
    means = (
        frame.groupby("arm", sort=False)
        .agg(val_accuracy=("val_accuracy", "mean"), val_loss=("val_loss", "mean"),
             best_epoch=("best_epoch", "mean"), epochs_run=("epochs_run", "mean"),
             parameters=("parameters", "first"))
        .reset_index()
    )
    means["seed"] = "mean"
    frame = pd.concat([frame, means[frame.columns]], ignore_index=True)

    Path(args.report).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(args.report, index=False, float_format="%.6g")
    print(frame.to_string(index=False))
    print(f"✅ Ablation report: {args.report}")
    return 0


def cmd_approx(args: argparse.Namespace) -> int:
    image = _read_gray_image(args.image)
    steps = approximation_curve(image, args.order, args.nodes)
    print(f"{'order':>5}  {'node_rmse':>12}  {'pixel_rmse':>12}")
    for step in steps:
        print(f"{step.order:>5}  {step.node_rmse:>12.6g}  {step.pixel_rmse:>12.6g}")

    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame([s.to_dict() for s in steps]).to_csv(args.out, index=False, float_format="%.10g")
    if args.save_coeffs:
        count = args.nodes if args.nodes is not None else max(2 * (args.order + 1), 8)
        grid = cheb_gauss_nodes(count)
        coeffs = fit_coeffs_2d(sample_image_at_nodes(image, grid, grid), (args.order, args.order))
        save_coeff_grid(args.save_coeffs, coeffs)
    return 0


def cmd_spectral_demo(args: argparse.Namespace) -> int:
    if not 1 <= args.dim <= MAX_SPECTRAL_DIM:
        raise InvalidInputError(f"--dim must lie in [1, {MAX_SPECTRAL_DIM}], got {args.dim}")
    if args.order < 0:
        raise InvalidInputError(f"--order must be >= 0, got {args.order}")

    laplacian = path_laplacian(args.dim)
    operator = rescale(laplacian)
    theta = np.random.default_rng(args.seed).standard_normal(args.order + 1)
    impulse = np.zeros(args.dim)
    impulse[args.dim // 2] = 1.0

    filtered = apply_filter(operator, theta, impulse)
    oracle = eigen_filter(operator, theta, impulse)
    certificate = locality_certificate(laplacian, theta)

    print(f"path graph d={args.dim}, filter order K={args.order}, theta={np.round(theta, 4).tolist()}")
    print(f"impulse response: {np.array2string(filtered, precision=4, max_line_width=100)}")
    print(f"max |recurrence - eigendecomposition| = {np.max(np.abs(filtered - oracle)):.3e}")
    print(
        f"locality: max |entry| beyond {certificate.order} hops = {certificate.max_outside:.3e}, "
        f"within = {certificate.max_inside:.3e} -> {'holds' if certificate.holds else 'VIOLATED'}"
    )
    return 0 if certificate.holds else 1


def cmd_summary(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args.config)
    model = build_network(cfg.network, seed=0)
    print(render_ledger(describe_network(model)))
    other = "standard" if cfg.network.conv_kind == "cheb" else "cheb"
    twin = build_network(cfg.network.model_copy(update={"conv_kind": other}), seed=0)
    print(f"\nparameters: {cfg.network.conv_kind}={model.num_parameters():,}  {other}={twin.num_parameters():,}")
    return 0


# ========== Entry point CLI ==========

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chebcnn",
        description="Chebyshev-polynomial CNN toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s generate --out data/synth --per-class 200 --side 32
  %(prog)s train --config run.cfg --data data/synth --out runs/best.ckpt --curves runs/curves.csv
  %(prog)s eval --ckpt runs/best.ckpt --data data/synth --report runs/report.txt
  %(prog)s --print-defaults > run.cfg
        """
    )
    parser.add_argument("--print-defaults", action="store_true", help="Print the default configuration and exit")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Logging level")
    parser.add_argument("--log-dir", default=None, help="Also write rotating log files here")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("generate", help="Write the synthetic dataset as PNG class folders")
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--per-class", type=int, default=250, help="Images per class")
    p.add_argument("--side", type=int, default=128, help="Image side length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--classes", type=int, default=3, choices=sorted(CLASS_NAMES), help="Class count")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("train", help="Train a network on a directory dataset")
    p.add_argument("--config", help="Configuration file (defaults when omitted)")
    p.add_argument("--data", help="Training directory (overrides data.train_dir)")
    p.add_argument("--val-data", help="Validation directory (otherwise a seeded split)")
    p.add_argument("--out", required=True, help="Checkpoint path")
    p.add_argument("--curves", help="Per-epoch CSV path")
    p.add_argument("--seed", type=int, help="Override train.seed")
    p.add_argument("--epochs", type=int, help="Override train.max_epochs")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="Evaluate a checkpoint on a directory dataset")
    p.add_argument("--ckpt", required=True, help="Checkpoint path")
    p.add_argument("--data", required=True, help="Dataset directory")
    p.add_argument("--report", required=True, help="Report path (.json/.confusion.csv/.roc.csv written alongside)")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("ablate", help="Chebyshev vs standard convolution over several seeds")
    p.add_argument("--config", help="Configuration file")
    p.add_argument("--data", help="Training directory")
    p.add_argument("--val-data", help="Validation directory")
    p.add_argument("--seeds", default="0,1,2", help="Comma-separated seeds (at least 2)")
    p.add_argument("--report", required=True, help="CSV report path")
    p.add_argument("--epochs", type=int, help="Override train.max_epochs")
    p.set_defaults(handler=cmd_ablate)

    p = sub.add_parser("approx", help="Chebyshev approximation error of an image by order")
    p.add_argument("--image", required=True, help="Grayscale image file")
    p.add_argument("--order", type=int, required=True, help="Maximum order M")
    p.add_argument("--nodes", type=int, help="Gauss nodes per axis (default max(2(M+1), 8))")
    p.add_argument("--out", help="CSV of (order, node_rmse, pixel_rmse)")
    p.add_argument("--save-coeffs", help="Write the order-M coefficient grid here")
    p.set_defaults(handler=cmd_approx)

    p = sub.add_parser("spectral-demo", help="Spectral filter on a path graph with locality check")
    p.add_argument("--dim", type=int, default=16, help=f"Vertices (<= {MAX_SPECTRAL_DIM})")
    p.add_argument("--order", type=int, default=3, help="Filter order K")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_spectral_demo)

    p = sub.add_parser("summary", help="Layer ledger of a configuration")
    p.add_argument("--config", help="Configuration file")
    p.set_defaults(handler=cmd_summary)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one subcommand and return its exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.print_defaults:
        print(render_config(RunConfig()), end="")
        return 0
    if not getattr(args, "handler", None):
        parser.print_help()
        return 2

    init_logging(args.log_level, args.log_dir)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except (ChebCNNError, OSError) as e:
        message = " ".join(str(e).split())
        logger.debug("Command failed", exc_info=True)
        print(f"❌ Error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
