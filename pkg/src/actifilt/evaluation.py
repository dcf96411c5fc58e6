"""Splits, metrics, confusion matrices, and stratified cross-validation.

Averaged metrics are support-weighted, which makes weighted recall equal
accuracy by construction.  Zero denominators (a class never predicted or
never present) contribute 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ClassTooSmall, InvalidConfig, LengthMismatch

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class ConfusionMatrix:
    classes: tuple
    counts: np.ndarray  # counts[true][predicted]

    def __post_init__(self) -> None:
        c = np.asarray(self.counts)
        if c.shape != (len(self.classes), len(self.classes)) or np.any(c < 0):
            raise InvalidConfig("confusion counts must be (C, C) nonnegative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class PerClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class: dict
    confusion: ConfusionMatrix
    drop_rate_pct: float | None = None

    def metric(self, name: str) -> float:
        return getattr(self, name)

    def csv_rows(self) -> list[tuple[str, str]]:
        rows = [(m, repr(self.metric(m))) for m in METRIC_NAMES]
        if self.drop_rate_pct is not None:
            rows.append(("drop_rate_pct", repr(self.drop_rate_pct)))
        return rows


def compute_metrics(y_true, y_pred, classes) -> EvalReport:
    """Accuracy, support-weighted precision/recall/F1, per-class table,
    and the confusion matrix."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"y_true has {len(y_true)} rows, y_pred {len(y_pred)}")
    if len(y_true) == 0:
        raise LengthMismatch("cannot score zero rows")
    classes = list(classes)
    index = {c: i for i, c in enumerate(classes)}
    try:
        ti = np.array([index[v] for v in y_true.tolist()])
        pi = np.array([index[v] for v in y_pred.tolist()])
    except KeyError as exc:
        raise InvalidConfig(f"label {exc.args[0]!r} not in class list") from None
    n_classes = len(classes)
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (ti, pi), 1)

    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)
    tp = np.diag(counts).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(support > 0, tp / support, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2.0 * precision * recall / denom, 0.0)
    total = len(y_true)
    weights = support / total
    per_class = {
        c: PerClassMetrics(
            precision=float(precision[i]),
            recall=float(recall[i]),
            f1=float(f1[i]),
            support=int(support[i]),
        )
        for i, c in enumerate(classes)
    }
    return EvalReport(
        accuracy=float(tp.sum() / total),
        precision=float((weights * precision).sum()),
        recall=float((weights * recall).sum()),
        f1=float((weights * f1).sum()),
        per_class=per_class,
        confusion=ConfusionMatrix(classes=tuple(classes), counts=counts),
    )


def split_holdout(
    labels: np.ndarray,
    train_fraction: float = 0.7,
    stratified: bool = True,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint, exhaustive train/test split; returns sorted index arrays.

    Stratified mode keeps each class's train share within one row of the
    requested fraction and needs >= 2 rows per class.
    """
    labels = np.asarray(labels)
    if not 0.0 < train_fraction < 1.0:
        raise InvalidConfig(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(len(labels))
        n_train = min(max(round(train_fraction * len(labels)), 1), len(labels) - 1)
        return np.sort(perm[:n_train]), np.sort(perm[n_train:])
    train_parts, test_parts = [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if len(idx) < 2:
            raise ClassTooSmall(f"class {c!r} has {len(idx)} row(s); stratified split needs >= 2")
        perm = idx[rng.permutation(len(idx))]
        n_train = min(max(round(train_fraction * len(idx)), 1), len(idx) - 1)
        train_parts.append(perm[:n_train])
        test_parts.append(perm[n_train:])
    return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(test_parts))


def stratified_kfold(labels: np.ndarray, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """k disjoint exhaustive folds; per-class fold counts differ by <= 1."""
    labels = np.asarray(labels)
    if k < 2:
        raise InvalidConfig(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if len(idx) < k:
            raise ClassTooSmall(f"class {c!r} has {len(idx)} rows; {k}-fold needs >= {k}")
        perm = idx[rng.permutation(len(idx))]
        for j, row in enumerate(perm):
            folds[j % k].append(int(row))
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


@dataclass(frozen=True)
class CvSummary:
    fold_reports: tuple
    means: dict = field(default_factory=dict)
    stds: dict = field(default_factory=dict)

    @classmethod
    def from_reports(cls, reports) -> "CvSummary":
        reports = tuple(reports)
        means, stds = {}, {}
        for m in METRIC_NAMES:
            vals = np.array([r.metric(m) for r in reports])
            means[m] = float(vals.mean())
            stds[m] = float(vals.std())  # population std
        return cls(fold_reports=reports, means=means, stds=stds)

    def csv_rows(self) -> list[tuple[str, str]]:
        rows = []
        for m in METRIC_NAMES:
            rows.append((f"{m}_mean", repr(self.means[m])))
            rows.append((f"{m}_std", repr(self.stds[m])))
        for i, rep in enumerate(self.fold_reports):
            for m in METRIC_NAMES:
                rows.append((f"fold{i}_{m}", repr(rep.metric(m))))
        return rows


def cross_validate(
    kind,
    matrix,
    k: int = 10,
    seed: int = 0,
    scale: bool = True,
    selected_indices=None,
    rfe_per_fold: bool = False,
    rfe_target: int = 50,
) -> CvSummary:
    """Stratified k-fold cross-validation of one model kind.

    The min-max scaler is re-fit on each fold's training part.  Feature
    selection defaults to a single pre-computed index set (``selected_indices``);
    ``rfe_per_fold=True`` re-runs RFE inside every fold instead.
    """
    from .features import apply_minmax, fit_minmax, rfe_select
    from .models import train as train_model, predict as predict_model

    folds = stratified_kfold(matrix.labels, k=k, seed=seed)
    fold_seeds = np.random.SeedSequence(seed).generate_state(k, dtype=np.uint32)
    classes = sorted(np.unique(matrix.labels).tolist())
    reports = []
    for i, test_idx in enumerate(folds):
        train_idx = np.sort(np.setdiff1d(np.arange(len(matrix)), test_idx))
        X_train, y_train = matrix.values[train_idx], matrix.labels[train_idx]
        X_test, y_test = matrix.values[test_idx], matrix.labels[test_idx]
        if rfe_per_fold:
            sel = rfe_select(X_train, y_train, target_count=rfe_target, seed=int(fold_seeds[i]))
        else:
            sel = selected_indices
        if sel is not None:
            X_train, X_test = X_train[:, sel], X_test[:, sel]
        if scale:
            params = fit_minmax(X_train)
            X_train = apply_minmax(X_train, params)
            X_test = apply_minmax(X_test, params)
        model = train_model(kind, X_train, y_train, seed=int(fold_seeds[i]))
        reports.append(compute_metrics(y_test, predict_model(model, X_test), classes))
    return CvSummary.from_reports(reports)
