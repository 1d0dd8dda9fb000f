"""Model serialization: one JSON document per fitted model.

Layout: ``{kind, class_order, hyperparameters, seed, parameters}``. Forest
trees are nested ``{feature, threshold, left, right}`` nodes with leaf
class-count arrays; floats round-trip exactly (repr serialization).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ParseError
from ..ingest import CLASS_ORDER
from . import ModelKind
from .forest import RandomForestModel, TreeNode
from .knn import KnnModel
from .linear import LinearSvmModel, LogisticRegressionModel


def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"counts": [int(c) for c in node.counts]}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(data: dict) -> TreeNode:
    if "counts" in data:
        return TreeNode(counts=np.array(data["counts"], dtype=np.float64))
    return TreeNode(
        counts=np.zeros(len(CLASS_ORDER)),
        feature=int(data["feature"]),
        threshold=float(data["threshold"]),
        left=_node_from_dict(data["left"]),
        right=_node_from_dict(data["right"]),
    )


def model_to_dict(model) -> dict:
    if isinstance(model, (LinearSvmModel, LogisticRegressionModel)):
        parameters = {
            "weights": model.weights.tolist(),
            "biases": model.biases.tolist(),
        }
    elif isinstance(model, RandomForestModel):
        parameters = {
            "num_features": model.num_features,
            "trees": [_node_to_dict(t) for t in model.trees],
        }
    elif isinstance(model, KnnModel):
        parameters = {
            "features": model.train_features.tolist(),
            "label_codes": model.train_codes.tolist(),
        }
    else:
        raise ParseError(f"cannot serialize model of type {type(model).__name__}")
    return {
        "kind": model.kind.value,
        "class_order": [label.value for label in CLASS_ORDER],
        "hyperparameters": model.hyperparameters,
        "seed": model.seed,
        "parameters": parameters,
    }


def model_from_dict(data: dict):
    try:
        kind = ModelKind(data["kind"])
        expected_order = [label.value for label in CLASS_ORDER]
        if data["class_order"] != expected_order:
            raise ParseError(f"unsupported class order {data['class_order']}")
        hyper = dict(data["hyperparameters"])
        seed = int(data["seed"])
        parameters = data["parameters"]
    except (KeyError, ValueError) as exc:
        raise ParseError(f"malformed model document: {exc}") from exc
    if kind in (ModelKind.LSVM, ModelKind.LR):
        weights = np.array(parameters["weights"], dtype=np.float64)
        biases = np.array(parameters["biases"], dtype=np.float64)
        cls = LinearSvmModel if kind is ModelKind.LSVM else LogisticRegressionModel
        return cls(weights=weights, biases=biases, hyperparameters=hyper, seed=seed)
    if kind is ModelKind.RF:
        return RandomForestModel(
            trees=[_node_from_dict(t) for t in parameters["trees"]],
            num_features=int(parameters["num_features"]),
            hyperparameters=hyper,
            seed=seed,
        )
    return KnnModel(
        train_features=np.array(parameters["features"], dtype=np.float64),
        train_codes=np.array(parameters["label_codes"], dtype=np.int64),
        hyperparameters=hyper,
        seed=seed,
    )


def serialize_model(model, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def deserialize_model(path: str | Path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    return model_from_dict(data)
