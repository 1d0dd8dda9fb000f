"""Classifier training, prediction, stratified splitting and grid search.

All randomness flows from one integer run seed through numpy's PCG64
generator; sub-seeds for classes, trees and folds are derived with
SeedSequence so results are reproducible across platforms and independent of
scheduling.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import ClassTooSmall, DegenerateData, DimensionMismatch, ParseError, ValidationError
from ..ingest import CLASS_ORDER, CoarseLabel

NUM_CLASSES = len(CLASS_ORDER)


class ModelKind(enum.Enum):
    LSVM = "lsvm"
    LR = "lr"
    RF = "rf"
    KNN = "knn"


def label_codes(labels: list[CoarseLabel]) -> np.ndarray:
    return np.array([CLASS_ORDER.index(label) for label in labels], dtype=np.int64)


def child_seed(seed: int, *key: int) -> int:
    """Deterministic sub-seed for a named parallel unit (class, tree, fold...)."""
    return int(np.random.SeedSequence([int(seed), *map(int, key)]).generate_state(1)[0])


@dataclass
class LabeledDataset:
    features: np.ndarray
    labels: list[CoarseLabel]
    clip_ids: list[str]

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise ValidationError(f"features must be a non-empty (N, D) matrix, got {self.features.shape}")
        if len(self.labels) != self.features.shape[0] or len(self.clip_ids) != self.features.shape[0]:
            raise ValidationError("labels and clip_ids must align with feature rows")

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            features=self.features[idx],
            labels=[self.labels[i] for i in idx],
            clip_ids=[self.clip_ids[i] for i in idx],
        )


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.test_fraction < 1.0):
            raise ValidationError(f"test_fraction must be in (0, 1), got {self.test_fraction}")


@dataclass(frozen=True)
class HyperGrid:
    """Per-model hyperparameter candidates, searched in listed order."""

    knn_k: tuple[int, ...] = (1, 3, 5, 7, 9)
    rf_trees: tuple[int, ...] = (25, 50, 100)
    rf_max_depth: tuple[int, ...] = (10, 14, 20)
    lsvm_strength: tuple[float, ...] = (0.01, 0.1, 1.0, 10.0)
    lr_ridge: tuple[float, ...] = (0.01, 0.1, 1.0)

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if not getattr(self, name):
                raise ValidationError(f"grid list {name} must be non-empty")

    @classmethod
    def from_json(cls, path) -> "HyperGrid":
        import json
        from pathlib import Path

        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ParseError(f"{path}: unknown grid keys {sorted(unknown)}")
        return cls(**{k: tuple(v) for k, v in raw.items()})

    def points(self, kind: ModelKind) -> list[dict]:
        if kind is ModelKind.KNN:
            return [{"k": int(k)} for k in self.knn_k]
        if kind is ModelKind.RF:
            return [
                {"trees": int(t), "max_depth": int(m)}
                for t in self.rf_trees
                for m in self.rf_max_depth
            ]
        if kind is ModelKind.LSVM:
            return [{"strength": float(s)} for s in self.lsvm_strength]
        return [{"ridge": float(r)} for r in self.lr_ridge]


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def stratified_split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded per-class split: round(count * fraction) samples (at least 1,
    at most count - 1 so train keeps every class) go to test."""
    codes = label_codes(ds.labels)
    rng = np.random.default_rng(spec.seed)
    test_idx: list[np.ndarray] = []
    train_idx: list[np.ndarray] = []
    for class_idx in range(NUM_CLASSES):
        members = np.flatnonzero(codes == class_idx)
        if members.size == 0:
            continue
        if members.size < 2:
            raise ClassTooSmall(
                f"class {CLASS_ORDER[class_idx].value} has {members.size} sample(s); need >= 2 to split"
            )
        take = _round_half_up(members.size * spec.test_fraction)
        take = min(max(take, 1), members.size - 1)
        shuffled = rng.permutation(members)
        test_idx.append(shuffled[:take])
        train_idx.append(shuffled[take:])
    test = np.sort(np.concatenate(test_idx))
    train = np.sort(np.concatenate(train_idx))
    return ds.subset(train), ds.subset(test)


def stratified_folds(codes: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Fold id per sample: within each class, seeded shuffle then round-robin."""
    if folds < 2:
        raise ValidationError(f"folds must be >= 2, got {folds}")
    rng = np.random.default_rng(child_seed(seed, 0xF01D))
    assignment = np.empty(codes.shape[0], dtype=np.int64)
    for class_idx in range(NUM_CLASSES):
        members = np.flatnonzero(codes == class_idx)
        if members.size == 0:
            continue
        if members.size < folds:
            raise ClassTooSmall(
                f"class {CLASS_ORDER[class_idx].value} has {members.size} sample(s); need >= {folds} folds"
            )
        shuffled = rng.permutation(members)
        assignment[shuffled] = np.arange(shuffled.size) % folds
    return assignment


def train(kind: ModelKind, train_ds: LabeledDataset, hyper: dict, seed: int):
    """Fit one model kind with chosen hyperparameters; deterministic given seed."""
    if train_ds.num_samples < NUM_CLASSES:
        raise ValidationError(
            f"need at least {NUM_CLASSES} training samples, got {train_ds.num_samples}"
        )
    if len(set(train_ds.labels)) < 2:
        raise DegenerateData("all training labels are identical")
    codes = label_codes(train_ds.labels)
    if kind is ModelKind.LSVM:
        from .linear import train_linear_svm

        return train_linear_svm(train_ds.features, codes, hyper, seed)
    if kind is ModelKind.LR:
        from .linear import train_logistic_regression

        return train_logistic_regression(train_ds.features, codes, hyper, seed)
    if kind is ModelKind.RF:
        from .forest import train_random_forest

        return train_random_forest(train_ds.features, codes, hyper, seed)
    if kind is ModelKind.KNN:
        from .knn import train_knn

        return train_knn(train_ds.features, codes, hyper, seed)
    raise ValidationError(f"unknown model kind {kind!r}")


def score_matrix(model, features: np.ndarray) -> np.ndarray:
    """Per-class scores for a batch of rows, shape (N, 4)."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if features.shape[1] != model.num_features:
        raise DimensionMismatch(
            f"feature rows have length {features.shape[1]}, model expects {model.num_features}"
        )
    return model.score_matrix(features)


def predict_scores(model, features: np.ndarray) -> np.ndarray:
    """Per-class scores for one feature row, in CLASS_ORDER."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1:
        raise DimensionMismatch(f"predict_scores expects one row, got shape {features.shape}")
    return score_matrix(model, features[None, :])[0]


def predict_batch(model, features: np.ndarray) -> list[CoarseLabel]:
    scores = score_matrix(model, features)
    # argmax takes the first maximum, which is exactly the class-order tie-break
    return [CLASS_ORDER[i] for i in np.argmax(scores, axis=1)]


def predict(model, features: np.ndarray) -> CoarseLabel:
    return CLASS_ORDER[int(np.argmax(predict_scores(model, features)))]


def grid_search(
    kind: ModelKind,
    train_ds: LabeledDataset,
    grid: HyperGrid | None = None,
    folds: int = 3,
    seed: int = 0,
) -> dict:
    """Stratified k-fold search maximizing mean fold accuracy.

    Ties go to the earlier grid point. The chosen hyperparameter dict is
    returned; callers refit on the full training set with it.
    """
    grid = grid or HyperGrid()
    codes = label_codes(train_ds.labels)
    assignment = stratified_folds(codes, folds, seed)
    points = grid.points(kind)
    best_point = None
    best_accuracy = -1.0
    for point_idx, point in enumerate(points):
        fold_accuracies = []
        for fold in range(folds):
            holdout = np.flatnonzero(assignment == fold)
            kept = np.flatnonzero(assignment != fold)
            model = train(kind, train_ds.subset(kept), point, child_seed(seed, point_idx, fold))
            preds = predict_batch(model, train_ds.features[holdout])
            truth = [train_ds.labels[i] for i in holdout]
            fold_accuracies.append(
                sum(p is t for p, t in zip(preds, truth)) / len(truth)
            )
        mean_accuracy = float(np.mean(fold_accuracies))
        if mean_accuracy > best_accuracy:
            best_accuracy = mean_accuracy
            best_point = point
    return dict(best_point)


from .io import deserialize_model, serialize_model  # noqa: E402  (re-export)

__all__ = [
    "HyperGrid",
    "LabeledDataset",
    "ModelKind",
    "SplitSpec",
    "child_seed",
    "deserialize_model",
    "grid_search",
    "label_codes",
    "predict",
    "predict_batch",
    "predict_scores",
    "score_matrix",
    "serialize_model",
    "stratified_folds",
    "stratified_split",
    "train",
]
