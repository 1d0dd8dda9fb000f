"""Random forest of CART trees: Gini impurity, bootstrap sampling, sqrt(D)
features per split, hard per-tree voting.

Left branch takes feature values <= threshold; thresholds are midpoints
between consecutive distinct sorted values. Every tree draws its bootstrap
indices and per-split feature subsets from its own seeded generator, so the
forest is a pure function of (data, hyperparameters, seed).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import NUM_CLASSES, ModelKind, child_seed

MIN_SAMPLES_SPLIT = 2


@dataclass
class TreeNode:
    counts: np.ndarray  # training class counts reaching this node
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass
class RandomForestModel:
    trees: list[TreeNode]
    num_features: int
    hyperparameters: dict
    seed: int
    kind: ModelKind = ModelKind.RF

    def score_matrix(self, features: np.ndarray) -> np.ndarray:
        votes = np.zeros((features.shape[0], NUM_CLASSES))
        for tree in self.trees:
            for row_idx in range(features.shape[0]):
                leaf = _descend(tree, features[row_idx])
                votes[row_idx, int(np.argmax(leaf.counts))] += 1.0
        return votes / len(self.trees)

    def max_depth(self) -> int:
        return max(tree.depth() for tree in self.trees)


def _descend(node: TreeNode, row: np.ndarray) -> TreeNode:
    while not node.is_leaf:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node


def _best_split(
    features: np.ndarray,
    codes: np.ndarray,
    sample_idx: np.ndarray,
    feature_idx: np.ndarray,
) -> Optional[tuple[int, float]]:
    """Minimum weighted-Gini split over the candidate features, or None.

    Vectorized over all candidates at once; ties resolve to the earlier
    feature in the drawn order, then the lower threshold.
    """
    sub = features[np.ix_(sample_idx, feature_idx)]
    n = sub.shape[0]
    order = np.argsort(sub, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(sub, order, axis=0)
    onehot = np.zeros((n, NUM_CLASSES))
    onehot[np.arange(n), codes[sample_idx]] = 1.0
    # cumulative class counts of the left side after each sorted position
    left_counts = np.cumsum(onehot[order], axis=0)[:-1]  # (n-1, m, 4)
    total = left_counts[-1] + onehot[order[-1]]  # (m, 4)
    left_n = np.arange(1, n, dtype=np.float64)[:, None]
    right_n = n - left_n
    right_counts = total[None, :, :] - left_counts
    gini_left = 1.0 - np.sum((left_counts / left_n[:, :, None]) ** 2, axis=2)
    gini_right = 1.0 - np.sum((right_counts / right_n[:, :, None]) ** 2, axis=2)
    weighted = (left_n * gini_left + right_n * gini_right) / n  # (n-1, m)
    # only positions where the sorted value strictly increases are valid cuts
    valid = sorted_vals[1:] > sorted_vals[:-1]
    if not np.any(valid):
        return None
    weighted = np.where(valid, weighted, np.inf).T  # (m, n-1): feature-major ties
    flat_best = int(np.argmin(weighted))
    feat_pos, cut_pos = divmod(flat_best, weighted.shape[1])
    parent_counts = total[feat_pos]
    parent_gini = 1.0 - float(np.sum((parent_counts / n) ** 2))
    if weighted[feat_pos, cut_pos] >= parent_gini:
        return None
    threshold = 0.5 * (sorted_vals[cut_pos, feat_pos] + sorted_vals[cut_pos + 1, feat_pos])
    return int(feature_idx[feat_pos]), float(threshold)


def _grow(
    features: np.ndarray,
    codes: np.ndarray,
    sample_idx: np.ndarray,
    depth: int,
    max_depth: int,
    num_split_features: int,
    rng: np.random.Generator,
) -> TreeNode:
    counts = np.bincount(codes[sample_idx], minlength=NUM_CLASSES).astype(np.float64)
    node = TreeNode(counts=counts)
    if (
        depth >= max_depth
        or sample_idx.size < MIN_SAMPLES_SPLIT
        or np.count_nonzero(counts) <= 1
    ):
        return node
    feature_idx = rng.choice(features.shape[1], size=num_split_features, replace=False)
    split = _best_split(features, codes, sample_idx, feature_idx)
    if split is None:
        return node
    node.feature, node.threshold = split
    mask = features[sample_idx, node.feature] <= node.threshold
    node.left = _grow(features, codes, sample_idx[mask], depth + 1, max_depth, num_split_features, rng)
    node.right = _grow(features, codes, sample_idx[~mask], depth + 1, max_depth, num_split_features, rng)
    return node


def train_random_forest(features: np.ndarray, codes: np.ndarray, hyper: dict, seed: int) -> RandomForestModel:
    num_trees = int(hyper["trees"])
    max_depth = int(hyper["max_depth"])
    if num_trees < 1 or max_depth < 1:
        raise ValueError("trees and max_depth must be positive")
    num_samples, num_features = features.shape
    num_split_features = max(1, int(np.sqrt(num_features)))
    trees = []
    for tree_idx in range(num_trees):
        rng = np.random.default_rng(child_seed(seed, tree_idx))
        bootstrap = rng.integers(0, num_samples, size=num_samples)
        trees.append(
            _grow(features, codes, bootstrap, 0, max_depth, num_split_features, rng)
        )
    return RandomForestModel(
        trees=trees, num_features=num_features, hyperparameters=dict(hyper), seed=seed
    )
