"""Command-line pipeline: split, extract, train, eval, bench, pipeline.

Every stage reads and writes plain files in the output directory so stages are
independently runnable and resumable. Outputs are byte-deterministic for a
fixed config and seed; extraction parallelism never changes the bytes.

Config precedence: CLI flags override config-file values override defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import evaluation
from .errors import FmerError, IoError, ValidationError
from .feature_io import read_features_fmef, write_features_csv, write_features_fmef
from .features import extract_area, zscore_apply, zscore_fit
from .ingest import load_manifest, load_sequence, relabel
from .landmarks import AREA_ALIASES, area_name, parse_area, parse_landmarks
from .models import (
    HyperGrid,
    LabeledDataset,
    ModelKind,
    SplitSpec,
    deserialize_model,
    grid_search,
    predict_batch,
    score_matrix,
    serialize_model,
    stratified_split,
    train,
)

_DEFAULTS = {
    "manifest": None,
    "landmarks_dir": None,
    "area": "whole",
    "division": 5,
    "model": "rf",
    "grid": None,
    "seed": 0,
    "test_fraction": 0.2,
    "out": "out",
    "jobs": None,
    "repeats": 1,
    "zscore": False,
}


@dataclass
class RunConfig:
    manifest: Path
    landmarks_dir: Path | None
    area: str
    division: int
    model: str
    grid: HyperGrid
    seed: int
    test_fraction: float
    out: Path
    jobs: int
    repeats: int
    zscore: bool

    @property
    def area_kinds(self):
        return parse_area(self.area)

    @property
    def model_kind(self) -> ModelKind:
        return ModelKind(self.model)


def build_config(args: argparse.Namespace) -> RunConfig:
    values = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config file {config_path}: {exc}") from exc
        unknown = set(raw) - set(_DEFAULTS)
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        values.update(raw)
    for key in _DEFAULTS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            values[key] = flag_value
    if values["manifest"] is None:
        raise ValidationError("--manifest is required (flag or config file)")
    if not (0.0 < float(values["test_fraction"]) < 1.0):
        raise ValidationError(f"test_fraction must be in (0, 1), got {values['test_fraction']}")
    if int(values["division"]) not in (5, 10):
        raise ValidationError(f"division must be 5 or 10, got {values['division']}")
    parse_area(str(values["area"]))
    ModelKind(str(values["model"]))
    grid = HyperGrid.from_json(values["grid"]) if values["grid"] else HyperGrid()
    jobs = values["jobs"]
    if jobs is None:
        jobs = os.cpu_count() or 1
    if int(jobs) < 1:
        raise ValidationError(f"--jobs must be >= 1, got {jobs}")
    if int(values["repeats"]) < 1:
        raise ValidationError(f"--repeats must be >= 1, got {values['repeats']}")
    return RunConfig(
        manifest=Path(values["manifest"]),
        landmarks_dir=Path(values["landmarks_dir"]) if values["landmarks_dir"] else None,
        area=str(values["area"]),
        division=int(values["division"]),
        model=str(values["model"]),
        grid=grid,
        seed=int(values["seed"]),
        test_fraction=float(values["test_fraction"]),
        out=Path(values["out"]),
        jobs=int(jobs),
        repeats=int(values["repeats"]),
        zscore=bool(values["zscore"]),
    )


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _label_dataset(manifest: Path) -> LabeledDataset:
    entries = load_manifest(manifest)
    return LabeledDataset(
        features=np.zeros((len(entries), 1)),
        labels=[relabel(e.raw_label) for e in entries],
        clip_ids=[e.clip_id for e in entries],
    )


def cmd_split(cfg: RunConfig, out: Path | None = None, seed: int | None = None) -> Path:
    out = out or cfg.out
    seed = cfg.seed if seed is None else seed
    out.mkdir(parents=True, exist_ok=True)
    ds = _label_dataset(cfg.manifest)
    train_ds, test_ds = stratified_split(ds, SplitSpec(test_fraction=cfg.test_fraction, seed=seed))
    path = out / "splits.json"
    _write_json(
        path,
        {
            "seed": seed,
            "test_fraction": cfg.test_fraction,
            "train": train_ds.clip_ids,
            "test": test_ds.clip_ids,
        },
    )
    return path


def _extract_one(entry, landmarks_dir: Path, area, division: int) -> np.ndarray:
    seq = load_sequence(entry)
    lm = parse_landmarks(landmarks_dir / f"{entry.clip_id}.landmarks.txt", seq.frame_dims)
    return extract_area(seq, lm, area, division).values


def cmd_extract(cfg: RunConfig) -> tuple[Path, Path]:
    if cfg.landmarks_dir is None:
        raise ValidationError("--landmarks-dir is required for extraction")
    cfg.out.mkdir(parents=True, exist_ok=True)
    entries = load_manifest(cfg.manifest)
    area = cfg.area_kinds
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        rows = list(
            pool.map(lambda e: _extract_one(e, cfg.landmarks_dir, area, cfg.division), entries)
        )
    matrix = np.stack(rows)
    labels = [relabel(e.raw_label) for e in entries]
    clip_ids = [e.clip_id for e in entries]
    csv_path = cfg.out / "features.csv"
    fmef_path = cfg.out / "features.fmef"
    write_features_csv(csv_path, clip_ids, labels, matrix)
    write_features_fmef(fmef_path, clip_ids, labels, matrix, area, cfg.division)
    return csv_path, fmef_path


def _load_features(out: Path) -> LabeledDataset:
    fmef_path = out / "features.fmef"
    if not fmef_path.is_file():
        raise IoError(f"feature file not found: {fmef_path} (run extract first)")
    clip_ids, labels, matrix, _ = read_features_fmef(fmef_path)
    return LabeledDataset(features=matrix, labels=labels, clip_ids=clip_ids)


def _select(ds: LabeledDataset, clip_ids: list[str]) -> LabeledDataset:
    index = {cid: i for i, cid in enumerate(ds.clip_ids)}
    missing = [cid for cid in clip_ids if cid not in index]
    if missing:
        raise ValidationError(f"clips in split but not in features: {missing[:5]}")
    return ds.subset([index[cid] for cid in clip_ids])


def cmd_train(cfg: RunConfig, out: Path | None = None, seed: int | None = None) -> Path:
    out = out or cfg.out
    seed = cfg.seed if seed is None else seed
    splits_path = out / "splits.json"
    if not splits_path.is_file():
        raise IoError(f"splits file not found: {splits_path} (run split first)")
    splits = json.loads(splits_path.read_text(encoding="utf-8"))
    ds = _load_features(cfg.out)
    train_ds = _select(ds, splits["train"])
    if cfg.zscore:
        mean, std = zscore_fit(train_ds.features)
        _write_json(out / "standardizer.json", {"mean": mean.tolist(), "std": std.tolist()})
        train_ds = LabeledDataset(
            features=zscore_apply(train_ds.features, mean, std),
            labels=train_ds.labels,
            clip_ids=train_ds.clip_ids,
        )
    kind = cfg.model_kind
    chosen = grid_search(kind, train_ds, cfg.grid, folds=3, seed=seed)
    model = train(kind, train_ds, chosen, seed)
    model_path = out / "model.json"
    serialize_model(model, model_path)
    return model_path


def cmd_eval(cfg: RunConfig, out: Path | None = None, seed: int | None = None) -> Path:
    out = out or cfg.out
    seed = cfg.seed if seed is None else seed
    model_path = out / "model.json"
    if not model_path.is_file():
        raise IoError(f"model file not found: {model_path} (run train first)")
    splits_path = out / "splits.json"
    if not splits_path.is_file():
        raise IoError(f"splits file not found: {splits_path}")
    model = deserialize_model(model_path)
    splits = json.loads(splits_path.read_text(encoding="utf-8"))
    ds = _load_features(cfg.out)
    test_ds = _select(ds, splits["test"])
    features = test_ds.features
    standardizer_path = out / "standardizer.json"
    if standardizer_path.is_file():
        params = json.loads(standardizer_path.read_text(encoding="utf-8"))
        features = zscore_apply(features, np.array(params["mean"]), np.array(params["std"]))
    preds = predict_batch(model, features)
    scores = score_matrix(model, features)
    report = evaluation.evaluate(
        preds,
        test_ds.labels,
        scores,
        model_kind=cfg.model,
        area=cfg.area,
        division=cfg.division,
        seed=seed,
    )
    evaluation.emit_plots(report, out)
    return out / "summary.json"


def cmd_bench(cfg: RunConfig) -> Path:
    if cfg.landmarks_dir is None:
        raise ValidationError("--landmarks-dir is required for benchmarking")
    cfg.out.mkdir(parents=True, exist_ok=True)
    record = evaluation.bench_cc(
        cfg.manifest, cfg.landmarks_dir, cfg.area_kinds, cfg.division, repeats=cfg.repeats
    )
    path = cfg.out / "bench.json"
    _write_json(
        path,
        {
            "area": area_name(record.area),
            "division": record.division,
            "mean_seconds_per_sample": record.mean_seconds_per_sample,
            "samples": record.samples,
            "repeats": record.repeats,
        },
    )
    return path


def cmd_pipeline(cfg: RunConfig) -> Path:
    cmd_extract(cfg)
    if cfg.repeats == 1:
        cmd_split(cfg)
        cmd_train(cfg)
        return cmd_eval(cfg)
    accuracies = []
    macro_aucs = []
    for i in range(cfg.repeats):
        repeat_out = cfg.out / f"repeat_{i}"
        repeat_out.mkdir(parents=True, exist_ok=True)
        cmd_split(cfg, out=repeat_out, seed=cfg.seed + i)
        cmd_train(cfg, out=repeat_out, seed=cfg.seed + i)
        summary_path = cmd_eval(cfg, out=repeat_out, seed=cfg.seed + i)
        summary = json.loads(summary_path.read_text(encoding="utf-8"))
        accuracies.append(summary["accuracy"])
        macro_aucs.append(summary["macro_auc"])
    aggregate = cfg.out / "repeats_summary.json"
    _write_json(
        aggregate,
        {
            "repeats": cfg.repeats,
            "seeds": list(range(cfg.seed, cfg.seed + cfg.repeats)),
            "accuracies": accuracies,
            "mean_accuracy": float(np.mean(accuracies)),
            "macro_aucs": macro_aucs,
            "mean_macro_auc": float(np.mean(macro_aucs)),
        },
    )
    return aggregate


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file mirroring the run options")
    parser.add_argument("--manifest", help="dataset manifest CSV")
    parser.add_argument("--landmarks-dir", dest="landmarks_dir", help="directory of <clip_id>.landmarks.txt files")
    parser.add_argument("--area", choices=sorted(AREA_ALIASES), help="facial area to extract")
    parser.add_argument("--division", type=int, choices=(5, 10), help="block grid factor")
    parser.add_argument("--model", choices=[k.value for k in ModelKind], help="classifier kind")
    parser.add_argument("--seed", type=int, help="run seed (default 0)")
    parser.add_argument("--test-fraction", dest="test_fraction", type=float, help="held-out fraction (default 0.2)")
    parser.add_argument("--grid", help="hyperparameter grid JSON file")
    parser.add_argument("--out", help="output directory (default ./out)")
    parser.add_argument("--jobs", type=int, help="extraction workers (default: logical cores)")
    parser.add_argument("--repeats", type=int, help="bench timing repeats / pipeline split repeats")
    parser.add_argument(
        "--zscore",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="dataset-level z-score standardization before linear models",
    )


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmer",
        description="Micro-expression recognition pipeline: landmark ROIs, LBP-TOP features, classical classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "split": "write stratified train/test clip ids to splits.json",
        "extract": "extract LBP-TOP features for every clip (features.csv + features.fmef)",
        "train": "grid-search and fit the chosen model on the train split (model.json)",
        "eval": "evaluate the fitted model on the test split (summary.json, ROC/confusion CSVs)",
        "bench": "time feature extraction per sample (bench.json), single-threaded",
        "pipeline": "run split, extract, train and eval in sequence",
    }
    for name, help_text in commands.items():
        sub_parser = sub.add_parser(name, help=help_text)
        _add_shared_flags(sub_parser)
    return parser


_COMMANDS = {
    "split": cmd_split,
    "extract": cmd_extract,
    "train": cmd_train,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "pipeline": cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "bench":
            cfg = replace(cfg, jobs=1)  # honest single-threaded timings
        _COMMANDS[args.command](cfg)
    except FmerError as exc:
        message = " ".join(str(exc).split())
        print(f"error:{exc.category}:{message}", file=sys.stderr)
        return 2
    except OSError as exc:
        message = " ".join(str(exc).split())
        print(f"error:IoError:{message}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
