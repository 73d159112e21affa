from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Any, Callable

from pydantic import BaseModel, Field, ValidationError

from tabletop_pose.dataset.image import DEFAULT_SHIFTS
from tabletop_pose.dataset.synth import SynthConfig
from tabletop_pose.errors import (
    ConfigError,
    DimensionError,
    NoObjectError,
    NumericError,
    ParseError,
    StateError,
    TabletopError,
)
from tabletop_pose.train.config import TrainConfig
from tabletop_pose.types import ANGLE_LABELS, ObjectKind, Split, Task

logger = logging.getLogger("tabletop_pose")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

_USAGE_ERRORS = (ValidationError, ConfigError, ParseError, DimensionError, NoObjectError, OSError)
_RUNTIME_ERRORS = (NumericError, StateError, TabletopError)


class RunConfig(BaseModel):
    """Resolved configuration for one command.

    Built from defaults, then an optional JSON file (`--config`), then
    command-line flags; unknown keys anywhere are rejected.

    Example config file:
        {"train": {"epochs": 20, "learning_rate": 0.0005}, "workers": 4}
    """

    model_config = {"extra": "forbid"}

    train: TrainConfig = Field(default_factory=TrainConfig)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    shifts: list[tuple[int, int]] = Field(default_factory=lambda: list(DEFAULT_SHIFTS))
    workers: int = Field(default=0, ge=0)


def _setup_logging(verbose: bool = False) -> None:
    """Configure logging for the tabletop-pose CLI."""
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)


# =============================================================================
# Argument parsing
# =============================================================================


def _parse_shifts(text: str) -> list[tuple[int, int]]:
    """`"5:0,-5:0,0:5"` -> [(5, 0), (-5, 0), (0, 5)]."""
    shifts = []
    for item in text.split(","):
        try:
            dx, dy = item.split(":")
            shifts.append((int(dx), int(dy)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad shift {item!r}, expected dx:dy") from None
    return shifts


def _parse_point(text: str) -> tuple[float, float]:
    try:
        x, y = text.split(",")
        return float(x), float(y)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point {text!r}, expected X,Y") from None


def _parse_angle_class(text: str) -> int:
    """`3` or `A4` -> 3."""
    if text in ANGLE_LABELS:
        return ANGLE_LABELS.index(text)
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad angle class {text!r}, expected 0..7 or A1..A8") from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="JSON config file; flags override it")
    p.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Number of parallel workers (default: 0 = CPU count). Use 1 for sequential.",
    )


def _build_parser() -> argparse.ArgumentParser:
    """Build the CLI argument parser."""
    parser = argparse.ArgumentParser(
        prog="tabletop-pose",
        description="Tabletop object recognition, angle classification and home-pose transforms.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="cmd", required=False)

    # --- preprocess command ---
    pre_p = sub.add_parser("preprocess", help="Mask and shift-augment raw images into an archive")
    pre_p.add_argument("--input", type=Path, required=True, help="Directory of <name>.pgm + <name>_mask.pgm")
    pre_p.add_argument("--output", type=Path, required=True, help="Archive directory to write")
    pre_p.add_argument(
        "--shifts",
        type=_parse_shifts,
        default=None,
        help="Comma-separated dx:dy pairs, e.g. --shifts=5:0,-5:0,0:5 (default: {-10,-5,0,5,10}^2 minus 0:0)",
    )
    pre_p.add_argument("--val-fraction", type=float, default=None, help="Validation share of H1 (default: 0.1)")
    pre_p.add_argument("--seed", type=int, default=None, help="Split seed (default: 0)")
    pre_p.add_argument(
        "--unmasked",
        action="store_true",
        help="Ignore masks and keep every image's raw pixels (recognition archives)",
    )
    _add_common(pre_p)

    # --- synth command ---
    syn_p = sub.add_parser("synth", help="Render a synthetic dataset archive")
    syn_p.add_argument("--output", type=Path, required=True, help="Archive directory to write")
    syn_p.add_argument("--per-cell", type=int, default=None, help="Images per object/angle/height (default: 10)")
    syn_p.add_argument("--resolution", type=int, default=None, help="Square image side, >= 32 (default: 64)")
    syn_p.add_argument("--seed", type=int, default=None, help="Random seed (default: 0)")
    syn_p.add_argument("--noise", type=float, default=None, help="Gaussian pixel noise std (default: 0.02)")
    syn_p.add_argument("--instances", type=int, default=None, help="Instances per object (default: 10)")
    syn_p.add_argument("--val-fraction", type=float, default=None, help="Validation share of H1 (default: 0.1)")
    _add_common(syn_p)

    # --- train command ---
    train_p = sub.add_parser("train", help="Train a recognition or per-object angle model")
    train_p.add_argument("--task", type=Task, choices=list(Task), metavar="{recognition,angle}", required=True)
    train_p.add_argument("--object", default=None, help="mug|mouse|stapler (required for --task angle)")
    train_p.add_argument("--data", type=Path, required=True, help="Archive directory with manifest.csv")
    train_p.add_argument("--out", type=Path, required=True, help="Checkpoint file to write")
    train_p.add_argument("--epochs", type=int, default=None)
    train_p.add_argument("--batch-size", type=int, default=None)
    train_p.add_argument("--lr", type=float, default=None, help="RMSProp learning rate (default: 1e-3)")
    train_p.add_argument("--rho", type=float, default=None, help="RMSProp decay (default: 0.9)")
    train_p.add_argument("--seed", type=int, default=None, help="Initialization and shuffle seed")
    train_p.add_argument(
        "--halve-input",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Halve images before training (default: on for recognition, off for angle)",
    )
    _add_common(train_p)

    # --- eval command ---
    eval_p = sub.add_parser("eval", help="Accuracy and confusion matrix on an archive split")
    eval_p.add_argument("--ckpt", type=Path, required=True)
    eval_p.add_argument("--data", type=Path, required=True)
    eval_p.add_argument("--object", default=None, help="Restrict to one object (default: the model's object)")
    eval_p.add_argument(
        "--split", type=Split, choices=list(Split), metavar="{train,val,test}", default=Split.TEST
    )
    eval_p.add_argument(
        "--allow-train-eval",
        action="store_true",
        help="Permit evaluating on the train or val split",
    )
    eval_p.add_argument("--report", type=Path, default=None, help="Write the evaluation report as JSON")
    _add_common(eval_p)

    # --- predict command ---
    pred_p = sub.add_parser("predict", help="Classify one image")
    pred_p.add_argument("--ckpt", type=Path, required=True)
    pred_p.add_argument("--image", type=Path, required=True)
    pred_p.add_argument("--top-k", type=int, default=None, help="Only list the k most likely classes")

    # --- viz command ---
    viz_p = sub.add_parser("viz", help="Write activation grids for every conv layer")
    viz_p.add_argument("--ckpt", type=Path, required=True)
    viz_p.add_argument("--image", type=Path, required=True)
    viz_p.add_argument("--out", type=Path, required=True, help="Output directory")

    # --- pose command ---
    pose_p = sub.add_parser("pose", help="Transform that moves an object to its home pose")
    pose_p.add_argument("--object", required=True)
    pose_p.add_argument("--angle-class", type=_parse_angle_class, required=True, help="0..7 or A1..A8")
    pose_p.add_argument("--centroid", type=_parse_point, default=None, help="X,Y of the object now")
    pose_p.add_argument("--mask", type=Path, default=None, help="Mask/image PGM to take the centroid from")
    pose_p.add_argument("--home-table", type=Path, required=True, help="JSON home pose table")

    # --- locate command ---
    loc_p = sub.add_parser("locate", help="Recognize, classify the angle, and plan the move home for one image")
    loc_p.add_argument("--recognizer", type=Path, required=True, help="Recognition checkpoint")
    loc_p.add_argument("--angle-dir", type=Path, required=True, help="Directory holding angle-<object>.ckpt files")
    loc_p.add_argument("--image", type=Path, required=True)
    loc_p.add_argument("--mask", type=Path, default=None, help="Take the centroid from this PGM instead of the image")
    loc_p.add_argument("--home-table", type=Path, required=True, help="JSON home pose table")

    return parser


# =============================================================================
# Configuration
# =============================================================================


def _resolve_config(args: argparse.Namespace, overrides: dict[str, dict[str, Any]]) -> RunConfig:
    """Defaults < JSON file < flags. `overrides` maps section -> {field: flag value}."""
    config_path = getattr(args, "config", None)
    if config_path is not None:
        if not config_path.is_file():
            raise ConfigError(f"config file {config_path} not found")
        base = RunConfig.model_validate_json(config_path.read_text(encoding="utf-8"))
    else:
        base = RunConfig()

    data = base.model_dump()
    for section, values in overrides.items():
        given = {k: v for k, v in values.items() if v is not None}
        if section == "":
            data.update(given)
        else:
            data[section].update(given)
    if getattr(args, "workers", None) is not None:
        data["workers"] = args.workers
    return RunConfig.model_validate(data)


def _object_arg(value: str | None) -> ObjectKind | None:
    if value is None:
        return None
    try:
        return ObjectKind(value)
    except ValueError:
        known = ", ".join(o.value for o in ObjectKind)
        raise ConfigError(f"unknown object {value!r} (expected one of: {known})") from None


def _sidecar(out: Path, suffix: str) -> Path:
    """`runs/angle-mug.ckpt` -> `runs/angle-mug<suffix>`."""
    return out.with_suffix(suffix)


# =============================================================================
# Commands
# =============================================================================


def _cmd_preprocess(args: argparse.Namespace) -> int:
    """Handle the 'preprocess' command."""
    from tabletop_pose.dataset.archive import build_archive

    config = _resolve_config(
        args,
        {
            "": {"shifts": args.shifts},
            "train": {"val_fraction": args.val_fraction, "seed": args.seed},
        },
    )
    manifest = build_archive(
        args.input,
        args.output,
        config.shifts,
        val_fraction=config.train.val_fraction,
        seed=config.train.seed,
        workers=config.workers,
        masked=not args.unmasked,
    )
    counts = manifest.split_counts()
    logger.info(f"{len(manifest)} samples")
    logger.info("  " + ", ".join(f"{split}: {count}" for split, count in counts.items()))
    logger.info(f"Manifest written to {args.output / 'manifest.csv'}")
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    """Handle the 'synth' command."""
    from tabletop_pose.dataset.synth import synth_generate

    config = _resolve_config(
        args,
        {
            "synth": {
                "per_cell": args.per_cell,
                "resolution": args.resolution,
                "seed": args.seed,
                "noise": args.noise,
                "instances": args.instances,
            },
            "train": {"val_fraction": args.val_fraction},
        },
    )
    manifest = synth_generate(
        config.synth, args.output, val_fraction=config.train.val_fraction, workers=config.workers
    )
    counts = manifest.split_counts()
    logger.info(f"{len(manifest)} images")
    logger.info("  " + ", ".join(f"{split}: {count}" for split, count in counts.items()))
    return EXIT_OK


def _load_split(data_dir: Path, split: Split, obj: ObjectKind | None, task: Task, halve: bool, workers: int):
    from tabletop_pose.dataset.manifest import Manifest, load_samples
    from tabletop_pose.dataset.workers import resolve_workers
    from tabletop_pose.train.data import LabeledData

    rows = Manifest.read(data_dir).select(split, obj)
    if not rows:
        target = f" for {obj.value}" if obj else ""
        raise ConfigError(f"{data_dir}: no {split.value} samples{target}")
    samples = load_samples(data_dir, rows, workers=resolve_workers(workers, len(rows)))
    return LabeledData.from_samples(samples, task, halve_input=halve)


def _cmd_train(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    """Handle the 'train' command."""
    if args.task is Task.ANGLE and args.object is None:
        parser.error("--task angle requires --object (one model per object)")

    from tabletop_pose.events.history import HistoryCsvSink
    from tabletop_pose.events.jsonl import JsonlSink
    from tabletop_pose.events.sink import MultiSink
    from tabletop_pose.models.architectures import model_for, recognition_net
    from tabletop_pose.nn.network import Network
    from tabletop_pose.train.checkpoint import save_checkpoint
    from tabletop_pose.train.loop import train

    config = _resolve_config(
        args,
        {
            "train": {
                "epochs": args.epochs,
                "batch_size": args.batch_size,
                "learning_rate": args.lr,
                "rmsprop_decay": args.rho,
                "seed": args.seed,
            }
        },
    )
    obj = _object_arg(args.object) if args.task is Task.ANGLE else None
    halve = args.halve_input if args.halve_input is not None else args.task is Task.RECOGNITION

    train_data = _load_split(args.data, Split.TRAIN, obj, args.task, halve, config.workers)
    val_data = _load_split(args.data, Split.VAL, obj, args.task, halve, config.workers)
    _, h, w = train_data.sample_shape
    spec = recognition_net(h, w) if args.task is Task.RECOGNITION else model_for(obj, h, w)
    network = Network(spec, seed=config.train.seed, precision=config.train.precision)

    events_path = _sidecar(args.out, ".events.jsonl")
    events_path.unlink(missing_ok=True)
    sink = MultiSink([JsonlSink(events_path), HistoryCsvSink(_sidecar(args.out, ".history.csv"))])
    try:
        result = train(
            network,
            train_data,
            val_data,
            config.train,
            sink=sink,
            task=args.task,
            obj=obj,
            halve_input=halve,
            run_name=spec.name,
        )
    finally:
        sink.close()

    save_checkpoint(result.best, args.out)
    logger.info(
        f"Saved {args.out} (epoch {result.best_epoch}, val acc {result.best_val_accuracy:.3f})"
    )
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    """Handle the 'eval' command."""
    if args.split is not Split.TEST and not args.allow_train_eval:
        parser.error(f"refusing to evaluate on the {args.split.value} split without --allow-train-eval")

    from tabletop_pose.train.checkpoint import load_checkpoint
    from tabletop_pose.train.evaluate import evaluate

    config = _resolve_config(args, {})
    checkpoint = load_checkpoint(args.ckpt)
    meta = checkpoint.metadata
    obj = _object_arg(args.object) if args.object is not None else meta.object
    data = _load_split(args.data, args.split, obj, meta.task, meta.halve_input, config.workers)

    report = evaluate(checkpoint, data)
    scope = f"{obj.value} " if obj else ""
    logger.info(f"{checkpoint.architecture.name} on {scope}{args.split.value} ({report.total} samples)")
    logger.info(f"accuracy: {report.accuracy:.4f} ({report.correct}/{report.total})")
    logger.info(report.format_confusion())
    if args.report is not None:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(report.to_json() + "\n", encoding="utf-8")
        logger.info(f"Report written to {args.report}")
    return EXIT_OK


def _cmd_predict(args: argparse.Namespace) -> int:
    """Handle the 'predict' command."""
    import numpy as np

    from tabletop_pose.dataset.pgm import read_unit_image
    from tabletop_pose.train.checkpoint import load_checkpoint

    checkpoint = load_checkpoint(args.ckpt)
    x = checkpoint.prepare_input(read_unit_image(args.image))
    probs = checkpoint.to_network().predict_proba(x)
    labels = checkpoint.metadata.labels or [str(i) for i in range(len(probs))]

    order = np.argsort(-probs, kind="stable")
    if args.top_k is not None:
        order = order[: max(1, args.top_k)]
    logger.info(f"label: {labels[int(order[0])]}")
    for i in order:
        logger.info(f"  {labels[int(i)]}: {float(probs[i]):.6f}")
    return EXIT_OK


def _cmd_viz(args: argparse.Namespace) -> int:
    """Handle the 'viz' command."""
    from tabletop_pose.dataset.pgm import read_unit_image
    from tabletop_pose.models.visualize import visualize_activations
    from tabletop_pose.train.checkpoint import load_checkpoint

    checkpoint = load_checkpoint(args.ckpt)
    written = visualize_activations(checkpoint, read_unit_image(args.image), args.out)
    for path in written:
        logger.info(f"  {path}")
    logger.info(f"{len(written)} activation grid(s) written to {args.out}")
    return EXIT_OK


def _cmd_pose(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    """Handle the 'pose' command."""
    if (args.centroid is None) == (args.mask is None):
        parser.error("give exactly one of --centroid or --mask")

    from tabletop_pose.dataset.pgm import read_pgm
    from tabletop_pose.pose.home import home_transform, load_home_table
    from tabletop_pose.pose.transform import centroid

    table = load_home_table(args.home_table)
    point = args.centroid if args.centroid is not None else centroid(read_pgm(args.mask))
    transform = home_transform(args.object, args.angle_class, point, table)
    logger.info(transform.format_rows())
    logger.info(transform.to_json())
    return EXIT_OK


def _cmd_locate(args: argparse.Namespace) -> int:
    """Handle the 'locate' command."""
    from tabletop_pose.dataset.pgm import read_pgm, read_unit_image
    from tabletop_pose.pose.home import load_home_table
    from tabletop_pose.pose.locate import load_angle_models, locate
    from tabletop_pose.train.checkpoint import load_checkpoint

    table = load_home_table(args.home_table)
    recognizer = load_checkpoint(args.recognizer)
    angle_models = load_angle_models(args.angle_dir)
    mask = read_pgm(args.mask) if args.mask is not None else None
    location = locate(read_unit_image(args.image), recognizer, angle_models, table, mask=mask)

    logger.info(f"object: {location.object.value} ({location.object_probability:.6f})")
    logger.info(f"angle: {location.angle_label} ({location.angle_probability:.6f})")
    logger.info(f"centroid: {location.centroid[0]!r},{location.centroid[1]!r}")
    logger.info(location.transform.format_rows())
    logger.info(location.to_json())
    return EXIT_OK


def _run(command: Callable[[], int]) -> int:
    """Run a command, mapping failures to exit codes."""
    try:
        return command()
    except _USAGE_ERRORS as e:
        logger.error(f"error: {e}")
        return EXIT_USAGE
    except _RUNTIME_ERRORS as e:
        logger.error(f"error: {type(e).__name__}: {e}")
        return EXIT_RUNTIME


def main(argv: list[str] | None = None) -> None:
    """Console script entry point (`tabletop-pose`)."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)

    commands: dict[str, Callable[[], int]] = {
        "preprocess": lambda: _cmd_preprocess(args),
        "synth": lambda: _cmd_synth(args),
        "train": lambda: _cmd_train(args, parser),
        "eval": lambda: _cmd_eval(args, parser),
        "predict": lambda: _cmd_predict(args),
        "viz": lambda: _cmd_viz(args),
        "pose": lambda: _cmd_pose(args, parser),
        "locate": lambda: _cmd_locate(args),
    }
    if args.cmd not in commands:
        parser.print_help()
        raise SystemExit(EXIT_OK)
    raise SystemExit(_run(commands[args.cmd]))
