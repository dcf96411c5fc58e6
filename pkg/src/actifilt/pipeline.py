"""End-to-end run composition and the serializable run configuration.

A RunConfig captures everything that determines a run; its flattened
key=value form feeds both the config-file format and the config hash that
every artifact embeds, so identical configs reproduce identical bytes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .data_model import ImuRecording, LabelTrack
from .errors import InvalidConfig
from .evaluation import EvalReport, compute_metrics, split_holdout
from .features import (
    FeatureMatrix,
    ScalerParams,
    WindowSpec,
    apply_minmax,
    featurize,
    fit_minmax,
    rfe_select,
)
from .models import ModelKind, TrainedModel, parse_model_spec, predict, train
from .outliers import OutlierConfig, OutlierReport, clean
from .routing import FilterCombination, apply_combination, parse_combination, plan_segments


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    sample_rate_hz: float = 50.0
    window: WindowSpec = field(default_factory=WindowSpec)
    outlier: OutlierConfig = field(default_factory=OutlierConfig)
    combination: FilterCombination | None = None
    model_spec: str = "rf"
    train_fraction: float = 0.7
    stratified: bool = True
    select_count: int = 50  # 0 disables feature selection
    cv_folds: int = 10

    def flatten(self) -> dict[str, str]:
        combo = self.combination.spec_string() if self.combination else "uniform:raw"
        return {
            "seed": str(self.seed),
            "sample_rate_hz": repr(float(self.sample_rate_hz)),
            "window_length_s": repr(float(self.window.length_s)),
            "window_overlap": repr(float(self.window.overlap_fraction)),
            "window_purity": repr(float(self.window.purity_threshold)),
            "outlier_method": self.outlier.method,
            "outlier_iqr_k": repr(float(self.outlier.iqr_k)),
            "outlier_hampel_half_window": str(self.outlier.hampel_half_window),
            "outlier_hampel_n_sigmas": repr(float(self.outlier.hampel_n_sigmas)),
            "filter_mode": combo,
            "model": self.model_spec,
            "train_fraction": repr(float(self.train_fraction)),
            "stratified": str(self.stratified).lower(),
            "select_count": str(self.select_count),
            "cv_folds": str(self.cv_folds),
        }

    def config_hash(self) -> str:
        text = "\n".join(f"{k}={v}" for k, v in sorted(self.flatten().items()))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    def comments(self) -> list[str]:
        flat = ";".join(f"{k}={v}" for k, v in sorted(self.flatten().items()))
        return [f"config_hash={self.config_hash()}", f"config={flat}"]

    @property
    def model_kind(self) -> ModelKind:
        return parse_model_spec(self.model_spec)

    @property
    def filter_combination(self) -> FilterCombination:
        return self.combination if self.combination else parse_combination("uniform:raw")


@dataclass
class PipelineResult:
    report: EvalReport
    outlier_report: OutlierReport
    features: FeatureMatrix
    selected_indices: np.ndarray | None
    scaler: ScalerParams
    model: TrainedModel
    train_idx: np.ndarray
    test_idx: np.ndarray


def preprocess(rec: ImuRecording, track: LabelTrack, cfg: RunConfig):
    """Outlier cleaning followed by uniform or behavior-routed filtering."""
    cleaned, outlier_report = clean(rec, cfg.outlier)
    plan = plan_segments(cleaned, track)
    filtered = apply_combination(cleaned, plan, cfg.filter_combination, cfg.sample_rate_hz)
    return filtered, outlier_report


def run_pipeline(rec: ImuRecording, track: LabelTrack, cfg: RunConfig) -> PipelineResult:
    """The full chain: clean, route/filter, window, featurize, select, scale,
    train, and score on a stratified holdout."""
    if not 0.0 < cfg.train_fraction < 1.0:
        raise InvalidConfig("run_pipeline needs 0 < train_fraction < 1")
    filtered, outlier_report = preprocess(rec, track, cfg)
    matrix = featurize(filtered, track, cfg.window)
    train_idx, test_idx = split_holdout(
        matrix.labels, cfg.train_fraction, cfg.stratified, cfg.seed
    )
    X_train, y_train = matrix.values[train_idx], matrix.labels[train_idx]
    X_test, y_test = matrix.values[test_idx], matrix.labels[test_idx]
    selected = None
    if cfg.select_count:
        selected = rfe_select(X_train, y_train, cfg.select_count, cfg.seed)
        X_train, X_test = X_train[:, selected], X_test[:, selected]
    scaler = fit_minmax(X_train)
    model = train(cfg.model_kind, apply_minmax(X_train, scaler), y_train, cfg.seed)
    y_pred = predict(model, apply_minmax(X_test, scaler))
    classes = sorted(np.unique(matrix.labels).tolist())
    report = compute_metrics(y_test, y_pred, classes)
    report = EvalReport(
        accuracy=report.accuracy,
        precision=report.precision,
        recall=report.recall,
        f1=report.f1,
        per_class=report.per_class,
        confusion=report.confusion,
        drop_rate_pct=outlier_report.drop_rate_pct,
    )
    return PipelineResult(
        report=report,
        outlier_report=outlier_report,
        features=matrix,
        selected_indices=selected,
        scaler=scaler,
        model=model,
        train_idx=train_idx,
        test_idx=test_idx,
    )


def compare_grid(
    rec: ImuRecording,
    track: LabelTrack,
    filter_specs: list[str],
    model_specs: list[str],
    cfg: RunConfig,
) -> tuple[list[list[float]], dict[str, dict[str, float]]]:
    """Accuracy grid (filters x models) plus per-filter average metrics.

    Row order follows ``filter_specs``; the last column of each row is the
    across-model average accuracy.
    """
    if not filter_specs or not model_specs:
        raise InvalidConfig("compare needs at least one filter and one model")
    grid: list[list[float]] = []
    averages: dict[str, dict[str, float]] = {}
    for fspec in filter_specs:
        combo = parse_combination(fspec)
        row = []
        reports = []
        for mspec in model_specs:
            run_cfg = RunConfig(
                seed=cfg.seed,
                sample_rate_hz=cfg.sample_rate_hz,
                window=cfg.window,
                outlier=cfg.outlier,
                combination=combo,
                model_spec=mspec,
                train_fraction=cfg.train_fraction,
                stratified=cfg.stratified,
                select_count=cfg.select_count,
                cv_folds=cfg.cv_folds,
            )
            result = run_pipeline(rec, track, run_cfg)
            row.append(result.report.accuracy)
            reports.append(result.report)
        grid.append(row)
        averages[fspec] = {
            "precision": float(np.mean([r.precision for r in reports])),
            "recall": float(np.mean([r.recall for r in reports])),
            "f1": float(np.mean([r.f1 for r in reports])),
        }
    return grid, averages
