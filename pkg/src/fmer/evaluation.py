"""Metrics and reporting: accuracy, confusion matrix, one-vs-all ROC/AUC,
feature-extraction cost benchmarks, and plot-data emission."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInput, IoError, ValidationError
from .features import extract_area
from .ingest import CLASS_ORDER, CoarseLabel, load_manifest, load_sequence
from .landmarks import RoiKind, parse_area, parse_landmarks

NUM_CLASSES = len(CLASS_ORDER)


@dataclass(frozen=True)
class ConfusionMatrix:
    """4x4 counts; rows are true classes, columns predictions, in CLASS_ORDER."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (NUM_CLASSES, NUM_CLASSES) or np.any(counts < 0):
            raise ValidationError(f"confusion matrix must be {NUM_CLASSES}x{NUM_CLASSES} non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total


@dataclass(frozen=True)
class RocCurve:
    label: CoarseLabel
    points: list[tuple[float, float]]  # (FPR, TPR), staircase from (0,0) to (1,1)
    thresholds: list[float]
    auc: float
    defined: bool = True


@dataclass
class EvalReport:
    accuracy: float
    confusion: ConfusionMatrix
    curves: list[RocCurve]
    macro_auc: float
    model_kind: str = ""
    area: str = ""
    division: int = 0
    seed: int = 0
    cc_seconds: float | None = None


@dataclass(frozen=True)
class BenchRecord:
    area: tuple[RoiKind, ...]
    division: int
    mean_seconds_per_sample: float
    samples: int
    repeats: int


def _check_lengths(preds, truths) -> None:
    if len(preds) != len(truths):
        raise ValidationError(f"preds ({len(preds)}) and truths ({len(truths)}) differ in length")
    if len(preds) == 0:
        raise EmptyInput("no samples to evaluate")


def accuracy(preds: list[CoarseLabel], truths: list[CoarseLabel]) -> float:
    _check_lengths(preds, truths)
    return sum(p is t for p, t in zip(preds, truths)) / len(preds)


def confusion(preds: list[CoarseLabel], truths: list[CoarseLabel]) -> ConfusionMatrix:
    _check_lengths(preds, truths)
    counts = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    for pred, truth in zip(preds, truths):
        counts[CLASS_ORDER.index(truth), CLASS_ORDER.index(pred)] += 1
    return ConfusionMatrix(counts)


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties replaced by their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _binary_auc(scores: np.ndarray, positives: np.ndarray) -> float:
    """Rank-statistic AUC with mid-ranks for ties (Mann-Whitney)."""
    num_pos = int(positives.sum())
    num_neg = positives.size - num_pos
    ranks = _midranks(scores)
    pos_rank_sum = float(ranks[positives].sum())
    return (pos_rank_sum - num_pos * (num_pos + 1) / 2.0) / (num_pos * num_neg)


def _binary_curve(scores: np.ndarray, positives: np.ndarray) -> tuple[list[tuple[float, float]], list[float]]:
    """ROC staircase swept over the distinct scores plus +/-inf endpoints.

    A sample is predicted positive when its score is >= the threshold; tied
    scores advance the curve diagonally in one step.
    """
    num_pos = int(positives.sum())
    num_neg = positives.size - num_pos
    order = np.argsort(-scores, kind="stable")
    points = [(0.0, 0.0)]
    thresholds = [float("inf")]
    tp = fp = 0
    i = 0
    while i < scores.size:
        threshold = scores[order[i]]
        j = i
        while j < scores.size and scores[order[j]] == threshold:
            if positives[order[j]]:
                tp += 1
            else:
                fp += 1
            j += 1
        points.append((fp / num_neg, tp / num_pos))
        thresholds.append(float(threshold))
        i = j
    points.append((1.0, 1.0))
    thresholds.append(float("-inf"))
    return points, thresholds


def roc_ovr(scores: np.ndarray, truths: list[CoarseLabel]) -> tuple[list[RocCurve], float]:
    """One-vs-all ROC curve and AUC per class, plus the macro (unweighted) AUC.

    Classes missing positives or negatives are flagged undefined and excluded
    from the macro mean.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[1] != NUM_CLASSES:
        raise ValidationError(f"scores must be (N, {NUM_CLASSES}), got {scores.shape}")
    if scores.shape[0] != len(truths):
        raise ValidationError("scores and truths differ in length")
    if scores.shape[0] < 2:
        raise EmptyInput("need at least 2 samples for ROC analysis")
    curves = []
    defined_aucs = []
    for class_idx, label in enumerate(CLASS_ORDER):
        positives = np.array([t is label for t in truths])
        num_pos = int(positives.sum())
        if num_pos == 0 or num_pos == positives.size:
            curves.append(RocCurve(label=label, points=[], thresholds=[], auc=float("nan"), defined=False))
            continue
        column = scores[:, class_idx]
        points, thresholds = _binary_curve(column, positives)
        auc = _binary_auc(column, positives)
        curves.append(RocCurve(label=label, points=points, thresholds=thresholds, auc=auc))
        defined_aucs.append(auc)
    if not defined_aucs:
        raise EmptyInput("no class had both positives and negatives")
    return curves, float(np.mean(defined_aucs))


def bench_cc(
    manifest_path,
    landmarks_dir,
    area: tuple[RoiKind, ...] | str,
    d: int,
    repeats: int = 3,
) -> BenchRecord:
    """Mean wall-clock extract_area seconds per sample, single-threaded.

    Timing covers the full call (ROI cropping, LBP-TOP, normalization) but not
    frame/landmark loading, which happens once up front.
    """
    area = parse_area(area)
    if repeats < 1:
        raise ValidationError("repeats must be >= 1")
    entries = load_manifest(manifest_path)
    if not entries:
        raise EmptyInput("manifest has no clips to benchmark")
    landmarks_dir = Path(landmarks_dir)
    loaded = []
    for entry in entries:
        seq = load_sequence(entry)
        lm = parse_landmarks(landmarks_dir / f"{entry.clip_id}.landmarks.txt", seq.frame_dims)
        loaded.append((seq, lm))
    elapsed = 0.0
    for _ in range(repeats):
        for seq, lm in loaded:
            start = time.perf_counter()
            extract_area(seq, lm, area, d)
            elapsed += time.perf_counter() - start
    return BenchRecord(
        area=area,
        division=d,
        mean_seconds_per_sample=elapsed / (repeats * len(loaded)),
        samples=len(loaded),
        repeats=repeats,
    )


def _float_or_none(value):
    if value is None:
        return None
    value = float(value)
    return None if np.isnan(value) else value


def report_summary(report: EvalReport) -> dict:
    return {
        "accuracy": report.accuracy,
        "macro_auc": report.macro_auc,
        "per_class_auc": {c.label.value: _float_or_none(c.auc) for c in report.curves},
        "confusion": report.confusion.counts.tolist(),
        "model": report.model_kind,
        "area": report.area,
        "division": report.division,
        "seed": report.seed,
        "cc_seconds": report.cc_seconds,
    }


def _roc_svg(curves: list[RocCurve], size: int = 360, pad: int = 30) -> str:
    """Minimal deterministic SVG of the defined ROC staircases."""
    palette = ("#1b6ca8", "#c23b22", "#2e8540", "#8a6d3b")
    span = size - 2 * pad
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="{pad}" y="{pad}" width="{span}" height="{span}" fill="none" stroke="#444"/>',
        f'<line x1="{pad}" y1="{size - pad}" x2="{size - pad}" y2="{pad}" '
        'stroke="#bbb" stroke-dasharray="4 3"/>',
    ]
    for idx, curve in enumerate(curves):
        if not curve.defined:
            continue
        coords = " ".join(
            f"{pad + fpr * span:.2f},{size - pad - tpr * span:.2f}" for fpr, tpr in curve.points
        )
        color = palette[idx % len(palette)]
        lines.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        lines.append(
            f'<text x="{pad + 6}" y="{pad + 14 + 14 * idx}" font-size="11" fill="{color}">'
            f"{curve.label.value} AUC={curve.auc:.3f}</text>"
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_plots(report: EvalReport, out_dir) -> list[Path]:
    """Write roc_<class>.csv, confusion.csv, summary.json and roc.svg.

    Output bytes are a pure function of the report, so reruns are identical.
    """
    if not str(out_dir):
        raise IoError("output directory path is empty")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for curve in report.curves:
            path = out_dir / f"roc_{curve.label.value.lower()}.csv"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("threshold,fpr,tpr\n")
                if curve.defined:
                    for threshold, (fpr, tpr) in zip(curve.thresholds, curve.points):
                        fh.write(f"{repr(threshold)},{repr(fpr)},{repr(tpr)}\n")
            written.append(path)
        confusion_path = out_dir / "confusion.csv"
        with open(confusion_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("true_class," + ",".join(label.value for label in CLASS_ORDER) + "\n")
            for label, row in zip(CLASS_ORDER, report.confusion.counts):
                fh.write(label.value + "," + ",".join(str(int(v)) for v in row) + "\n")
        written.append(confusion_path)
        summary_path = out_dir / "summary.json"
        summary_path.write_text(
            json.dumps(report_summary(report), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        written.append(summary_path)
        svg_path = out_dir / "roc.svg"
        svg_path.write_text(_roc_svg(report.curves), encoding="utf-8")
        written.append(svg_path)
        return written
    except OSError as exc:
        raise IoError(f"cannot write report files under {out_dir}: {exc}") from exc


def evaluate(
    preds: list[CoarseLabel],
    truths: list[CoarseLabel],
    scores: np.ndarray,
    model_kind: str = "",
    area: str = "",
    division: int = 0,
    seed: int = 0,
    cc_seconds: float | None = None,
) -> EvalReport:
    """Bundle accuracy, confusion and ROC analysis into one report."""
    curves, macro_auc = roc_ovr(scores, truths)
    matrix = confusion(preds, truths)
    return EvalReport(
        accuracy=matrix.accuracy,
        confusion=matrix,
        curves=curves,
        macro_auc=macro_auc,
        model_kind=model_kind,
        area=area,
        division=division,
        seed=seed,
        cc_seconds=cc_seconds,
    )
