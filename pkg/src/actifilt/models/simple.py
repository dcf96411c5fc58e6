"""K-nearest-neighbors, Gaussian naive Bayes, and the linear SVC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import pegasos_binary


@dataclass
class KnnPayload:
    X: np.ndarray
    y_idx: np.ndarray
    k: int
    n_classes: int

    def predict_class_idx(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X), dtype=np.int64)
        chunk = max(1, 2_000_000 // max(1, self.X.size))
        for lo in range(0, len(X), chunk):
            block = X[lo : lo + chunk]
            # explicit differences keep exact zeros for identical points
            d2 = ((block[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
            # stable sort: equal distances resolve to the lowest sample index
            nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            votes = self.y_idx[nearest]
            for row in range(len(block)):
                counts = np.bincount(votes[row], minlength=self.n_classes)
                out[lo + row] = int(np.argmax(counts))
        return out


@dataclass
class GaussianNBPayload:
    theta: np.ndarray  # (C, d) class means
    var: np.ndarray  # (C, d) smoothed class variances
    log_prior: np.ndarray  # (C,)

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        n_classes = len(self.theta)
        jll = np.empty((len(X), n_classes))
        for c in range(n_classes):
            gauss = -0.5 * (
                np.log(2.0 * np.pi * self.var[c]) + (X - self.theta[c]) ** 2 / self.var[c]
            ).sum(axis=1)
            jll[:, c] = self.log_prior[c] + gauss
        return jll

    def predict_class_idx(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.joint_log_likelihood(X), axis=1)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        z = jll - jll.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)


@dataclass
class LinearSVCPayload:
    weights: np.ndarray  # (C, d) one-vs-rest
    biases: np.ndarray  # (C,)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights.T + self.biases

    def predict_class_idx(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.decision_scores(X), axis=1)


def fit_gaussian_nb(X, y_idx, n_classes, var_smoothing) -> GaussianNBPayload:
    n, d = X.shape
    theta = np.empty((n_classes, d))
    var = np.empty((n_classes, d))
    counts = np.empty(n_classes)
    for c in range(n_classes):
        rows = X[y_idx == c]
        counts[c] = len(rows)
        theta[c] = rows.mean(axis=0)
        var[c] = rows.var(axis=0)
    epsilon = var_smoothing * float(X.var(axis=0).max())
    return GaussianNBPayload(
        theta=theta,
        var=var + max(epsilon, 1e-300),
        log_prior=np.log(counts / n),
    )


def fit_linear_svc(X, y_idx, n_classes, l2_lambda, epochs, seed) -> LinearSVCPayload:
    n, d = X.shape
    Xc = np.ascontiguousarray(X, dtype=np.float64)
    weights = np.empty((n_classes, d))
    biases = np.empty(n_classes)
    for c, child_seed in enumerate(np.random.SeedSequence(seed).spawn(n_classes)):
        rng = np.random.default_rng(child_seed)
        perms = np.empty((epochs, n), dtype=np.int64)
        for e in range(epochs):
            perms[e] = rng.permutation(n)
        yb = np.where(y_idx == c, 1.0, -1.0)
        weights[c], biases[c] = pegasos_binary(Xc, yb, l2_lambda, epochs, perms)
    return LinearSVCPayload(weights=weights, biases=biases)


def fit_knn(X, y_idx, n_classes, k) -> KnnPayload:
    return KnnPayload(
        X=np.asarray(X, dtype=np.float64).copy(),
        y_idx=np.asarray(y_idx, dtype=np.int64).copy(),
        k=k,
        n_classes=n_classes,
    )
