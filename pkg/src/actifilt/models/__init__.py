"""Classifier zoo behind one train/predict interface.

Six model kinds (decision tree, random forest, gradient-boosted trees,
k-nearest-neighbors, Gaussian naive Bayes, linear SVC) with deterministic
training and tie-breaking.  Trained models serialize to a self-describing,
versioned JSON file; a reloaded model reproduces identical predictions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from typing import Union

import numpy as np

from ..errors import (
    InvalidConfig,
    NonFiniteFeature,
    ShapeMismatch,
    SingleClass,
    Unsupported,
)
from .simple import (
    GaussianNBPayload,
    KnnPayload,
    LinearSVCPayload,
    fit_gaussian_nb,
    fit_knn,
    fit_linear_svc,
)
from .trees import (
    DecisionTreePayload,
    FlatTree,
    GradientBoostedPayload,
    RandomForestPayload,
    fit_decision_tree,
    fit_gradient_boosting,
    fit_random_forest,
    log_loss,
    softmax,
)

MODEL_FORMAT = "actifilt-model"
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class DecisionTreeSpec:
    max_depth: int | None = None  # None: grow until pure
    min_samples_split: int = 2
    name = "dt"
    display = "DT"

    def __post_init__(self) -> None:
        if self.max_depth is not None and self.max_depth < 1:
            raise InvalidConfig(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise InvalidConfig(
                f"min_samples_split must be >= 2, got {self.min_samples_split}"
            )


@dataclass(frozen=True)
class RandomForestSpec:
    n_trees: int = 100
    max_features: int | None = None  # None: ceil(sqrt(d))
    bootstrap: bool = True
    name = "rf"
    display = "RF"

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise InvalidConfig(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_features is not None and self.max_features < 1:
            raise InvalidConfig(f"max_features must be >= 1, got {self.max_features}")


@dataclass(frozen=True)
class GradientBoostedTreesSpec:
    rounds: int = 100
    depth: int = 3
    learning_rate: float = 0.1
    name = "gbt"
    display = "GBT (XGB slot)"

    def __post_init__(self) -> None:
        if self.rounds < 1 or self.depth < 1 or self.learning_rate <= 0:
            raise InvalidConfig("GBT hyperparameters must be positive")


@dataclass(frozen=True)
class KnnSpec:
    k: int = 5
    name = "knn"
    display = "KNN"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidConfig(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class GaussianNBSpec:
    var_smoothing: float = 1e-9
    name = "nb"
    display = "NB"

    def __post_init__(self) -> None:
        if self.var_smoothing <= 0:
            raise InvalidConfig(f"var_smoothing must be positive, got {self.var_smoothing}")


@dataclass(frozen=True)
class LinearSVCSpec:
    l2_lambda: float = 1e-4
    epochs: int = 200
    name = "svc"
    display = "Linear SVC"

    def __post_init__(self) -> None:
        if self.l2_lambda <= 0 or self.epochs < 1:
            raise InvalidConfig("SVC hyperparameters must be positive")


ModelKind = Union[
    DecisionTreeSpec,
    RandomForestSpec,
    GradientBoostedTreesSpec,
    KnnSpec,
    GaussianNBSpec,
    LinearSVCSpec,
]

MODEL_CLASSES = {
    cls.name: cls
    for cls in (
        DecisionTreeSpec,
        RandomForestSpec,
        GradientBoostedTreesSpec,
        KnnSpec,
        GaussianNBSpec,
        LinearSVCSpec,
    )
}

ALL_MODEL_NAMES = tuple(MODEL_CLASSES)


def parse_model_spec(spec: str) -> ModelKind:
    """Parse ``name`` or ``name:key=value,...`` into a model spec."""
    text = spec.strip().lower()
    name, _, params = text.partition(":")
    cls = MODEL_CLASSES.get(name)
    if cls is None:
        raise InvalidConfig(f"unknown model {name!r}; expected one of {sorted(MODEL_CLASSES)}")
    kwargs = {}
    if params:
        valid = {f.name: f for f in fields(cls)}
        for item in params.split(","):
            key, eq, value = item.partition("=")
            key = key.strip()
            if not eq or key not in valid:
                raise InvalidConfig(f"bad model parameter {item!r} for {name!r}")
            ftype = str(valid[key].type)
            if "bool" in ftype:
                kwargs[key] = value.strip() in ("1", "true", "yes")
            elif "int" in ftype:
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
    return cls(**kwargs)


@dataclass
class TrainedModel:
    kind: ModelKind
    classes: np.ndarray  # sorted original labels
    n_features: int
    seed: int
    payload: object

    def class_index_of(self, y: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.classes, y)
        bad = (idx >= len(self.classes)) | (self.classes[np.clip(idx, 0, len(self.classes) - 1)] != y)
        if np.any(bad):
            raise ShapeMismatch("labels outside the trained class set")
        return idx


def train(kind: ModelKind, X: np.ndarray, y: np.ndarray, seed: int = 0) -> TrainedModel:
    """Fit a model; deterministic given (kind, X, y, seed)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ShapeMismatch(f"X {X.shape} and y {y.shape} do not align")
    if len(X) < 2:
        raise ShapeMismatch("need at least 2 training rows")
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("training features must be finite")
    classes = np.unique(y)
    if len(classes) < 2:
        raise SingleClass("training labels contain a single class")
    y_idx = np.searchsorted(classes, y).astype(np.int64)
    n_classes = len(classes)

    if isinstance(kind, DecisionTreeSpec):
        payload = fit_decision_tree(X, y_idx, n_classes, kind.max_depth, kind.min_samples_split)
    elif isinstance(kind, RandomForestSpec):
        payload = fit_random_forest(
            X, y_idx, n_classes, kind.n_trees, kind.max_features, kind.bootstrap, seed
        )
    elif isinstance(kind, GradientBoostedTreesSpec):
        payload = fit_gradient_boosting(
            X, y_idx, n_classes, kind.rounds, kind.depth, kind.learning_rate
        )
    elif isinstance(kind, KnnSpec):
        k = min(kind.k, len(X))
        payload = fit_knn(X, y_idx, n_classes, k)
    elif isinstance(kind, GaussianNBSpec):
        payload = fit_gaussian_nb(X, y_idx, n_classes, kind.var_smoothing)
    elif isinstance(kind, LinearSVCSpec):
        payload = fit_linear_svc(X, y_idx, n_classes, kind.l2_lambda, kind.epochs, seed)
    else:
        raise InvalidConfig(f"unknown model kind {kind!r}")
    return TrainedModel(
        kind=kind, classes=classes, n_features=X.shape[1], seed=seed, payload=payload
    )


def _check_predict_input(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ShapeMismatch(
            f"model expects {model.n_features} features, got {X.shape}"
        )
    return X


def predict(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """One label per row; all tie-breaks resolve to the lowest class index."""
    X = _check_predict_input(model, X)
    return model.classes[model.payload.predict_class_idx(X)]


def predict_proba(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Per-class scores (rows sum to 1) where the model kind defines them."""
    X = _check_predict_input(model, X)
    p = model.payload
    if isinstance(p, RandomForestPayload):
        counts = p.vote_counts(X)
        return counts / counts.sum(axis=1, keepdims=True)
    if isinstance(p, GradientBoostedPayload):
        return softmax(p.decision_scores(X))
    if isinstance(p, GaussianNBPayload):
        return p.predict_proba(X)
    raise Unsupported(f"predict_proba is not defined for {model.kind.name}")


# --- persistence ----------------------------------------------------------------

def _tree_to_dict(tree: FlatTree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
    }


def _tree_from_dict(d: dict) -> FlatTree:
    return FlatTree(
        feature=np.array(d["feature"], dtype=np.int64),
        threshold=np.array(d["threshold"], dtype=np.float64),
        left=np.array(d["left"], dtype=np.int64),
        right=np.array(d["right"], dtype=np.int64),
        value=np.array(d["value"], dtype=np.float64),
    )


def _payload_to_dict(payload) -> dict:
    if isinstance(payload, DecisionTreePayload):
        return {"tree": _tree_to_dict(payload.tree)}
    if isinstance(payload, RandomForestPayload):
        return {
            "trees": [_tree_to_dict(t) for t in payload.trees],
            "feature_importances": payload.feature_importances.tolist(),
            "n_classes": payload.n_classes,
        }
    if isinstance(payload, GradientBoostedPayload):
        return {
            "trees": [[_tree_to_dict(t) for t in row] for row in payload.trees],
            "learning_rate": payload.learning_rate,
            "n_classes": payload.n_classes,
            "train_losses": payload.train_losses,
        }
    if isinstance(payload, KnnPayload):
        return {
            "X": payload.X.tolist(),
            "y_idx": payload.y_idx.tolist(),
            "k": payload.k,
            "n_classes": payload.n_classes,
        }
    if isinstance(payload, GaussianNBPayload):
        return {
            "theta": payload.theta.tolist(),
            "var": payload.var.tolist(),
            "log_prior": payload.log_prior.tolist(),
        }
    if isinstance(payload, LinearSVCPayload):
        return {"weights": payload.weights.tolist(), "biases": payload.biases.tolist()}
    raise InvalidConfig(f"cannot serialize payload {type(payload).__name__}")


def _payload_from_dict(name: str, d: dict):
    if name == "dt":
        return DecisionTreePayload(tree=_tree_from_dict(d["tree"]))
    if name == "rf":
        return RandomForestPayload(
            trees=[_tree_from_dict(t) for t in d["trees"]],
            feature_importances=np.array(d["feature_importances"]),
            n_classes=d["n_classes"],
        )
    if name == "gbt":
        return GradientBoostedPayload(
            trees=[[_tree_from_dict(t) for t in row] for row in d["trees"]],
            learning_rate=d["learning_rate"],
            n_classes=d["n_classes"],
            train_losses=list(d["train_losses"]),
        )
    if name == "knn":
        return KnnPayload(
            X=np.array(d["X"], dtype=np.float64).reshape(len(d["X"]), -1),
            y_idx=np.array(d["y_idx"], dtype=np.int64),
            k=d["k"],
            n_classes=d["n_classes"],
        )
    if name == "nb":
        return GaussianNBPayload(
            theta=np.array(d["theta"]),
            var=np.array(d["var"]),
            log_prior=np.array(d["log_prior"]),
        )
    if name == "svc":
        return LinearSVCPayload(
            weights=np.array(d["weights"]), biases=np.array(d["biases"])
        )
    raise InvalidConfig(f"unknown payload kind {name!r}")


def save_model(model: TrainedModel, path, extra_meta: dict | None = None) -> None:
    kind_params = {f.name: getattr(model.kind, f.name) for f in fields(model.kind)}
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "kind": {"name": model.kind.name, "params": kind_params},
        "classes": np.asarray(model.classes).tolist(),
        "n_features": model.n_features,
        "seed": model.seed,
        "payload": _payload_to_dict(model.payload),
    }
    if extra_meta:
        doc["meta"] = extra_meta
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, separators=(",", ":"), sort_keys=True)


def load_model(path) -> TrainedModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise InvalidConfig(f"{path}: not an {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise InvalidConfig(f"{path}: unsupported model format version {doc.get('version')}")
    name = doc["kind"]["name"]
    cls = MODEL_CLASSES[name]
    kind = cls(**doc["kind"]["params"])
    return TrainedModel(
        kind=kind,
        classes=np.array(doc["classes"]),
        n_features=doc["n_features"],
        seed=doc["seed"],
        payload=_payload_from_dict(name, doc["payload"]),
    )


def model_meta(path) -> dict:
    """The ``meta`` block of a saved model (empty dict when absent)."""
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh).get("meta", {})


__all__ = [
    "ALL_MODEL_NAMES",
    "DecisionTreeSpec",
    "GaussianNBSpec",
    "GradientBoostedTreesSpec",
    "KnnSpec",
    "LinearSVCSpec",
    "ModelKind",
    "RandomForestSpec",
    "TrainedModel",
    "load_model",
    "log_loss",
    "model_meta",
    "parse_model_spec",
    "predict",
    "predict_proba",
    "save_model",
    "train",
]
