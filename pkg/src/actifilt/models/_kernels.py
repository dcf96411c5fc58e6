"""Numba kernels for tree growing, prediction, and the SVC inner loop.

Split search scans candidate features in ascending original-index order and
threshold positions in ascending value order, accepting only strict score
improvements, which realizes the lowest-feature-then-lowest-threshold tie
rule.  Thresholds are midpoints of consecutive distinct sorted values.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def best_split_gini(Xsub, y, n_classes):  # pragma: no cover - jitted
    """Best Gini split of columns in Xsub (m, k) for class codes y.

    Returns (col, threshold); col is -1 when no valid split exists.
    Maximizes sum(left_counts^2)/n_left + sum(right_counts^2)/n_right,
    equivalent to minimizing the weighted child Gini.
    """
    m, k = Xsub.shape
    total = np.zeros(n_classes, dtype=np.int64)
    for i in range(m):
        total[y[i]] += 1
    total_sq = 0.0
    for c in range(n_classes):
        total_sq += total[c] * total[c]

    best_col = -1
    best_thr = 0.0
    best_score = -1.0
    left = np.zeros(n_classes, dtype=np.int64)
    for col in range(k):
        order = np.argsort(Xsub[:, col])
        for c in range(n_classes):
            left[c] = 0
        sl = 0.0
        sr = total_sq
        for pos in range(m - 1):
            c = y[order[pos]]
            sl += 2.0 * left[c] + 1.0
            sr += 1.0 - 2.0 * (total[c] - left[c])
            left[c] += 1
            lo = Xsub[order[pos], col]
            hi = Xsub[order[pos + 1], col]
            if hi > lo:
                thr = 0.5 * (lo + hi)
                if lo < thr < hi:
                    nl = pos + 1
                    score = sl / nl + sr / (m - nl)
                    if score > best_score:
                        best_score = score
                        best_col = col
                        best_thr = thr
    return best_col, best_thr


@njit(cache=True)
def best_split_sse(Xsub, r):  # pragma: no cover - jitted
    """Best squared-error split for regression targets r.

    Maximizes sum_left^2/n_left + sum_right^2/n_right.
    """
    m, k = Xsub.shape
    total = 0.0
    for i in range(m):
        total += r[i]

    best_col = -1
    best_thr = 0.0
    best_score = -1.0e308
    for col in range(k):
        order = np.argsort(Xsub[:, col])
        s = 0.0
        for pos in range(m - 1):
            s += r[order[pos]]
            lo = Xsub[order[pos], col]
            hi = Xsub[order[pos + 1], col]
            if hi > lo:
                thr = 0.5 * (lo + hi)
                if lo < thr < hi:
                    nl = pos + 1
                    rest = total - s
                    score = s * s / nl + rest * rest / (m - nl)
                    if score > best_score:
                        best_score = score
                        best_col = col
                        best_thr = thr
    return best_col, best_thr


@njit(cache=True)
def tree_apply(feature, threshold, left, right, value, X):  # pragma: no cover
    """Evaluate a flat tree on rows of X; returns the leaf values."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@njit(cache=True)
def pegasos_binary(X, yb, lam, epochs, perms):  # pragma: no cover - jitted
    """Pegasos subgradient descent for one binary hinge-loss problem.

    yb in {-1, +1}; perms holds one seeded sample order per epoch.  The
    weight vector is projected onto the ball of radius 1/sqrt(lam) each
    step; the bias is unregularized.
    """
    n, d = X.shape
    w = np.zeros(d, dtype=np.float64)
    b = 0.0
    radius = 1.0 / np.sqrt(lam)
    t = 0
    for e in range(epochs):
        for j in range(n):
            i = perms[e, j]
            t += 1
            eta = 1.0 / (lam * t)
            acc = b
            for q in range(d):
                acc += w[q] * X[i, q]
            shrink = 1.0 - eta * lam
            for q in range(d):
                w[q] *= shrink
            if yb[i] * acc < 1.0:
                step = eta * yb[i]
                for q in range(d):
                    w[q] += step * X[i, q]
                b += step
            norm_sq = 0.0
            for q in range(d):
                norm_sq += w[q] * w[q]
            if norm_sq > radius * radius:
                factor = radius / np.sqrt(norm_sq)
                for q in range(d):
                    w[q] *= factor
    return w, b
