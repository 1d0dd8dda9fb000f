"""K-nearest-neighbor on Euclidean distance with neighbor-vote scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import NUM_CLASSES, ModelKind


@dataclass
class KnnModel:
    train_features: np.ndarray
    train_codes: np.ndarray
    hyperparameters: dict
    seed: int
    kind: ModelKind = ModelKind.KNN

    @property
    def num_features(self) -> int:
        return self.train_features.shape[1]

    def score_matrix(self, features: np.ndarray) -> np.ndarray:
        k = min(int(self.hyperparameters["k"]), self.train_features.shape[0])
        # squared distances via the expansion; ties in distance resolve to the
        # earlier training row (stable argsort)
        sq = (
            np.sum(features**2, axis=1)[:, None]
            - 2.0 * features @ self.train_features.T
            + np.sum(self.train_features**2, axis=1)[None, :]
        )
        nearest = np.argsort(sq, axis=1, kind="stable")[:, :k]
        scores = np.zeros((features.shape[0], NUM_CLASSES))
        for row_idx in range(features.shape[0]):
            votes = np.bincount(self.train_codes[nearest[row_idx]], minlength=NUM_CLASSES)
            scores[row_idx] = votes / k
        return scores


def train_knn(features: np.ndarray, codes: np.ndarray, hyper: dict, seed: int) -> KnnModel:
    k = int(hyper["k"])
    if k < 1:
        raise ValueError("k must be at least 1")
    return KnnModel(
        train_features=features.copy(),
        train_codes=codes.copy(),
        hyperparameters=dict(hyper),
        seed=seed,
    )
