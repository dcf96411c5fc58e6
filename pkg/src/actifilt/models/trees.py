"""CART decision trees, bagged forests, and softmax gradient boosting.

Trees live in flat arrays (feature, threshold, left, right, value); growth is
preorder with an explicit stack so node numbering is deterministic.  Leaf
class ties resolve to the lowest class index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import best_split_gini, best_split_sse, tree_apply

#: L2 regularization on boosted-tree leaf weights (Newton denominator).
GBT_LEAF_REGULARIZATION = 1.0


@dataclass
class FlatTree:
    feature: np.ndarray  # int64, -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # class index (classification) or leaf weight (regression)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return tree_apply(
            self.feature, self.threshold, self.left, self.right, self.value,
            np.ascontiguousarray(X, dtype=np.float64),
        )

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


class _TreeBuilder:
    def __init__(self) -> None:
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add_node(self, parent: int, is_left: bool) -> int:
        idx = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        if parent >= 0:
            if is_left:
                self.left[parent] = idx
            else:
                self.right[parent] = idx
        return idx

    def finish(self) -> FlatTree:
        return FlatTree(
            feature=np.array(self.feature, dtype=np.int64),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            value=np.array(self.value, dtype=np.float64),
        )


def _gini(counts: np.ndarray, m: int) -> float:
    return 1.0 - float((counts.astype(np.float64) ** 2).sum()) / (m * m)


def grow_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int | None,
    min_samples_split: int,
    max_features: int | None,
    rng: np.random.Generator | None,
    importances: np.ndarray | None = None,
) -> FlatTree:
    """Gini CART.  ``max_features``/``rng`` enable per-node feature sampling;
    ``importances`` (length d) accumulates impurity decreases in place."""
    n, d = X.shape
    builder = _TreeBuilder()
    stack = [(np.arange(n), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = builder.add_node(parent, is_left)
        m = len(idx)
        counts = np.bincount(y[idx], minlength=n_classes)
        builder.value[node] = float(np.argmax(counts))
        pure = counts.max() == m
        if pure or m < min_samples_split or (max_depth is not None and depth >= max_depth):
            continue
        if max_features is not None and max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feats = np.arange(d)
        Xsub = np.ascontiguousarray(X[np.ix_(idx, feats)])
        col, thr = best_split_gini(Xsub, y[idx], n_classes)
        if col < 0:
            continue
        feat = int(feats[col])
        go_left = X[idx, feat] <= thr
        left_idx, right_idx = idx[go_left], idx[~go_left]
        if importances is not None:
            lc = np.bincount(y[left_idx], minlength=n_classes)
            rc = counts - lc
            decrease = (
                m * _gini(counts, m)
                - len(left_idx) * _gini(lc, len(left_idx))
                - len(right_idx) * _gini(rc, len(right_idx))
            )
            importances[feat] += decrease / n
        builder.feature[node] = feat
        builder.threshold[node] = float(thr)
        stack.append((right_idx, depth + 1, node, False))
        stack.append((left_idx, depth + 1, node, True))
    return builder.finish()


def grow_regression_tree(
    X: np.ndarray,
    residual: np.ndarray,
    hessian: np.ndarray,
    max_depth: int,
) -> FlatTree:
    """Squared-error CART on residuals; leaf weights are damped Newton steps
    sum(residual) / (sum(hessian) + reg)."""
    n, d = X.shape
    builder = _TreeBuilder()
    stack = [(np.arange(n), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = builder.add_node(parent, is_left)
        m = len(idx)
        builder.value[node] = float(
            residual[idx].sum() / (hessian[idx].sum() + GBT_LEAF_REGULARIZATION)
        )
        if depth >= max_depth or m < 2:
            continue
        Xsub = np.ascontiguousarray(X[idx])
        col, thr = best_split_sse(Xsub, residual[idx])
        if col < 0:
            continue
        go_left = X[idx, col] <= thr
        builder.feature[node] = int(col)
        builder.threshold[node] = float(thr)
        stack.append((idx[~go_left], depth + 1, node, False))
        stack.append((idx[go_left], depth + 1, node, True))
    return builder.finish()


# --- fitted payloads -----------------------------------------------------------

@dataclass
class DecisionTreePayload:
    tree: FlatTree

    def predict_class_idx(self, X: np.ndarray) -> np.ndarray:
        return self.tree.apply(X).astype(np.int64)


@dataclass
class RandomForestPayload:
    trees: list[FlatTree]
    feature_importances: np.ndarray
    n_classes: int = 0

    def vote_counts(self, X: np.ndarray) -> np.ndarray:
        counts = np.zeros((len(X), self.n_classes), dtype=np.int64)
        rows = np.arange(len(X))
        for tree in self.trees:
            counts[rows, tree.apply(X).astype(np.int64)] += 1
        return counts

    def predict_class_idx(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.vote_counts(X), axis=1)


@dataclass
class GradientBoostedPayload:
    trees: list[list[FlatTree]]  # [round][class]
    learning_rate: float
    n_classes: int
    train_losses: list[float] = field(default_factory=list)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        F = np.zeros((len(X), self.n_classes))
        for round_trees in self.trees:
            for c, tree in enumerate(round_trees):
                F[:, c] += self.learning_rate * tree.apply(X)
        return F

    def predict_class_idx(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.decision_scores(X), axis=1)


def softmax(F: np.ndarray) -> np.ndarray:
    z = F - F.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def log_loss(F: np.ndarray, y_idx: np.ndarray) -> float:
    P = softmax(F)
    return float(-np.mean(np.log(np.maximum(P[np.arange(len(y_idx)), y_idx], 1e-300))))


def fit_decision_tree(X, y_idx, n_classes, max_depth, min_samples_split) -> DecisionTreePayload:
    tree = grow_classification_tree(
        X, y_idx, n_classes, max_depth, min_samples_split, None, None
    )
    return DecisionTreePayload(tree=tree)


def fit_random_forest(
    X, y_idx, n_classes, n_trees, max_features, bootstrap, seed
) -> RandomForestPayload:
    n, d = X.shape
    k = max_features if max_features is not None else int(np.ceil(np.sqrt(d)))
    k = min(k, d)
    importances = np.zeros(d)
    trees = []
    for child_seed in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child_seed)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(
            grow_classification_tree(
                X[idx], y_idx[idx], n_classes, None, 2, k, rng, importances
            )
        )
    total = importances.sum()
    if total > 0:
        importances = importances / total
    else:
        importances = np.full(d, 1.0 / d)
    return RandomForestPayload(
        trees=trees, feature_importances=importances, n_classes=n_classes
    )


def fit_gradient_boosting(
    X, y_idx, n_classes, rounds, depth, learning_rate
) -> GradientBoostedPayload:
    n = len(y_idx)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_idx] = 1.0
    F = np.zeros((n, n_classes))
    payload = GradientBoostedPayload(
        trees=[], learning_rate=learning_rate, n_classes=n_classes
    )
    Xc = np.ascontiguousarray(X, dtype=np.float64)
    for _ in range(rounds):
        P = softmax(F)
        round_trees = []
        for c in range(n_classes):
            residual = onehot[:, c] - P[:, c]
            hessian = P[:, c] * (1.0 - P[:, c])
            tree = grow_regression_tree(Xc, residual, hessian, depth)
            F[:, c] += learning_rate * tree.apply(Xc)
            round_trees.append(tree)
        payload.trees.append(round_trees)
        payload.train_losses.append(log_loss(F, y_idx))
    return payload
