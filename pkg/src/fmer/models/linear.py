"""Linear classifiers: one-vs-rest hinge-loss SVM and multinomial ridge
logistic regression.

The SVM trains each binary problem with seeded stochastic subgradient descent
on the L2-regularized hinge objective (step 1/(lambda*t), fixed epoch budget,
bias unregularized). Logistic regression minimizes the ridge-penalized softmax
loss with batch gradient descent (Armijo backtracking for the step size) until
the gradient norm falls below 1e-6 or 5000 iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import NUM_CLASSES, ModelKind, child_seed

LSVM_EPOCHS = 30
LR_TOLERANCE = 1e-6
LR_MAX_ITER = 5000


@dataclass
class LinearSvmModel:
    weights: np.ndarray  # (4, D)
    biases: np.ndarray  # (4,)
    hyperparameters: dict
    seed: int
    kind: ModelKind = ModelKind.LSVM

    @property
    def num_features(self) -> int:
        return self.weights.shape[1]

    def score_matrix(self, features: np.ndarray) -> np.ndarray:
        # raw one-vs-rest margins, unbounded
        return features @ self.weights.T + self.biases


@dataclass
class LogisticRegressionModel:
    weights: np.ndarray  # (4, D)
    biases: np.ndarray  # (4,)
    hyperparameters: dict
    seed: int
    kind: ModelKind = ModelKind.LR

    @property
    def num_features(self) -> int:
        return self.weights.shape[1]

    def score_matrix(self, features: np.ndarray) -> np.ndarray:
        return softmax(features @ self.weights.T + self.biases)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    expl = np.exp(shifted)
    return expl / expl.sum(axis=1, keepdims=True)


def train_linear_svm(features: np.ndarray, codes: np.ndarray, hyper: dict, seed: int) -> LinearSvmModel:
    strength = float(hyper["strength"])
    if strength <= 0:
        raise ValueError("regularization strength must be positive")
    num_samples, num_features = features.shape
    weights = np.zeros((NUM_CLASSES, num_features))
    biases = np.zeros(NUM_CLASSES)
    for class_idx in range(NUM_CLASSES):
        rng = np.random.default_rng(child_seed(seed, class_idx))
        target = np.where(codes == class_idx, 1.0, -1.0)
        w = np.zeros(num_features)
        b = 0.0
        t = 0
        for _ in range(LSVM_EPOCHS):
            for i in rng.permutation(num_samples):
                t += 1
                eta = 1.0 / (strength * t)
                row = features[i]
                margin = target[i] * (w @ row + b)
                w *= 1.0 - eta * strength
                if margin < 1.0:
                    w += eta * target[i] * row
                    b += eta * target[i]
        weights[class_idx] = w
        biases[class_idx] = b
    return LinearSvmModel(weights=weights, biases=biases, hyperparameters=dict(hyper), seed=seed)


def lr_loss(
    weights: np.ndarray,
    biases: np.ndarray,
    features: np.ndarray,
    codes: np.ndarray,
    ridge: float,
) -> float:
    logits = features @ weights.T + biases
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted[np.arange(features.shape[0]), codes] - log_norm
    return float(-log_probs.mean() + 0.5 * ridge * np.sum(weights * weights))


def lr_gradient(
    weights: np.ndarray,
    biases: np.ndarray,
    features: np.ndarray,
    codes: np.ndarray,
    ridge: float,
) -> tuple[np.ndarray, np.ndarray]:
    num_samples = features.shape[0]
    probs = softmax(features @ weights.T + biases)
    probs[np.arange(num_samples), codes] -= 1.0
    grad_w = probs.T @ features / num_samples + ridge * weights
    grad_b = probs.mean(axis=0)
    return grad_w, grad_b


def train_logistic_regression(
    features: np.ndarray,
    codes: np.ndarray,
    hyper: dict,
    seed: int,
    tolerance: float = LR_TOLERANCE,
    max_iter: int = LR_MAX_ITER,
) -> LogisticRegressionModel:
    ridge = float(hyper["ridge"])
    if ridge < 0:
        raise ValueError("ridge strength must be non-negative")
    num_features = features.shape[1]
    weights = np.zeros((NUM_CLASSES, num_features))
    biases = np.zeros(NUM_CLASSES)
    step = 1.0
    loss = lr_loss(weights, biases, features, codes, ridge)
    for _ in range(max_iter):
        grad_w, grad_b = lr_gradient(weights, biases, features, codes, ridge)
        grad_sq = float(np.sum(grad_w * grad_w) + np.sum(grad_b * grad_b))
        if np.sqrt(grad_sq) <= tolerance:
            break
        # Armijo backtracking keeps plain gradient steps stable at any scale
        while step > 1e-14:
            new_w = weights - step * grad_w
            new_b = biases - step * grad_b
            new_loss = lr_loss(new_w, new_b, features, codes, ridge)
            if new_loss <= loss - 1e-4 * step * grad_sq:
                break
            step *= 0.5
        weights, biases, loss = new_w, new_b, new_loss
        step = min(step * 2.0, 64.0)
    return LogisticRegressionModel(weights=weights, biases=biases, hyperparameters=dict(hyper), seed=seed)
