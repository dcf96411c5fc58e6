"""Windowing, the 104-feature extractor, RFE selection, and [0,1] scaling.

Each analysis window yields 60 time-domain statistics (10 per channel),
30 spectral measures (5 per channel, computed on the mean-removed and
Hann-windowed samples, one-sided spectrum without the DC bin) and 14
aggregate magnitudes, in a fixed documented order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .data_model import (
    Behavior,
    CHANNEL_NAMES,
    CLASSIFIED_BEHAVIORS,
    ImuRecording,
    LabelTrack,
    behaviors_at,
)
from .errors import (
    EmptyMatrix,
    InvalidConfig,
    MalformedHeader,
    RecordingShorterThanWindow,
    SingleClass,
    TooFewFeatures,
    WindowTooShort,
)

#: Variance below this counts as zero for skewness/kurtosis.
ZERO_VARIANCE_EPSILON = 1e-12
#: Total spectral power below this zeroes the spectral features.
ZERO_POWER_EPSILON = 1e-12

_TIME_STATS = ("min", "max", "mean", "median", "var", "p25", "p75", "rms", "skew", "kurt")
_SPECTRAL_STATS = ("spec_entropy", "spec_centroid", "spec_energy", "dom_freq", "spec_spread")
_AGGREGATE_NAMES = (
    "sma_accel",
    "sma_gyro",
    "ax_abs_sum",
    "ay_abs_sum",
    "az_abs_sum",
    "gx_abs_sum",
    "gy_abs_sum",
    "gz_abs_sum",
    "mag_mean_accel",
    "mag_mean_gyro",
    "energy_accel",
    "energy_gyro",
    "sma_all",
    "mag_mean_all",
)

FEATURE_COUNT = 104


def feature_names() -> tuple[str, ...]:
    """The 104 feature names in extraction order (stable across runs)."""
    names = [f"{ch}_{st}" for ch in CHANNEL_NAMES for st in _TIME_STATS]
    names += [f"{ch}_{st}" for ch in CHANNEL_NAMES for st in _SPECTRAL_STATS]
    names += list(_AGGREGATE_NAMES)
    return tuple(names)


FEATURE_NAMES = feature_names()
assert len(FEATURE_NAMES) == FEATURE_COUNT


@dataclass(frozen=True)
class WindowSpec:
    length_s: float = 1.5
    overlap_fraction: float = 0.0
    purity_threshold: float = 0.8

    def __post_init__(self) -> None:
        if self.length_s <= 0:
            raise InvalidConfig(f"length_s must be positive, got {self.length_s}")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise InvalidConfig(
                f"overlap_fraction must be in [0, 1), got {self.overlap_fraction}"
            )
        if not 0.0 < self.purity_threshold <= 1.0:
            raise InvalidConfig(
                f"purity_threshold must be in (0, 1], got {self.purity_threshold}"
            )

    def samples(self, fs_hz: float) -> int:
        exact = self.length_s * fs_hz
        w = round(exact)
        if w < 1 or abs(exact - w) > 1e-9:
            raise InvalidConfig(
                f"window length {self.length_s}s x {fs_hz}Hz is not a whole sample count"
            )
        return w


@dataclass(frozen=True)
class WindowBatch:
    """Stacked windows: blocks (k, w, 6), labels, and start timestamps."""

    blocks: np.ndarray
    labels: np.ndarray  # Behavior codes, int64
    start_ms: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)


def make_windows(rec: ImuRecording, track: LabelTrack, spec: WindowSpec) -> WindowBatch:
    """Cut the recording into labeled fixed-size windows.

    A window's label is the majority behavior over its samples; windows whose
    purity falls below the threshold, or whose majority is Unknown or
    Drinking, are dropped.
    """
    w = spec.samples(rec.sample_rate_hz)
    n = len(rec)
    if n < w:
        raise RecordingShorterThanWindow(f"recording has {n} samples, window needs {w}")
    stride = max(1, round(w * (1.0 - spec.overlap_fraction)))
    codes = behaviors_at(track, rec.t_ms)
    starts = np.arange(0, n - w + 1, stride)
    kept_blocks = []
    kept_labels = []
    kept_start_ms = []
    drop = {int(Behavior.UNKNOWN), int(Behavior.DRINKING)}
    for s in starts:
        window_codes = codes[s : s + w]
        counts = np.bincount(window_codes, minlength=len(Behavior))
        majority = int(np.argmax(counts))
        purity = counts[majority] / w
        if purity < spec.purity_threshold or majority in drop:
            continue
        kept_blocks.append(rec.channels[s : s + w])
        kept_labels.append(majority)
        kept_start_ms.append(rec.t_ms[s])
    if kept_blocks:
        blocks = np.stack(kept_blocks)
    else:
        blocks = np.empty((0, w, len(CHANNEL_NAMES)))
    return WindowBatch(
        blocks=blocks,
        labels=np.array(kept_labels, dtype=np.int64),
        start_ms=np.array(kept_start_ms, dtype=np.float64),
    )


def extract_features_batch(blocks: np.ndarray, fs_hz: float) -> np.ndarray:
    """Vectorized feature extraction: (k, w, 6) blocks -> (k, 104) matrix."""
    x = np.asarray(blocks, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != len(CHANNEL_NAMES):
        raise InvalidConfig(f"blocks must be (k, w, 6), got {x.shape}")
    k, w, _ = x.shape
    if w < 8:
        raise WindowTooShort(f"windows need >= 8 samples, got {w}")

    # time domain, 10 per channel
    mins = x.min(axis=1)
    maxs = x.max(axis=1)
    means = x.mean(axis=1)
    medians = np.median(x, axis=1)
    var = x.var(axis=1)
    p25 = np.percentile(x, 25.0, axis=1)
    p75 = np.percentile(x, 75.0, axis=1)
    rms = np.sqrt(np.mean(x**2, axis=1))
    centered = x - means[:, None, :]
    m3 = np.mean(centered**3, axis=1)
    m4 = np.mean(centered**4, axis=1)
    nonzero = var > ZERO_VARIANCE_EPSILON
    skew = np.zeros_like(var)
    kurt = np.zeros_like(var)
    skew[nonzero] = m3[nonzero] / var[nonzero] ** 1.5
    kurt[nonzero] = m4[nonzero] / var[nonzero] ** 2 - 3.0
    time_feats = np.stack(
        [mins, maxs, means, medians, var, p25, p75, rms, skew, kurt], axis=2
    )  # (k, 6, 10)

    # frequency domain, 5 per channel, DC excluded
    hann = np.hanning(w)
    spectrum = np.fft.rfft(centered * hann[None, :, None], axis=1)
    power = np.abs(spectrum[:, 1:, :]) ** 2  # (k, bins, 6)
    freqs = np.fft.rfftfreq(w, d=1.0 / fs_hz)[1:]
    n_bins = len(freqs)
    total = power.sum(axis=1)  # (k, 6)
    live = total > ZERO_POWER_EPSILON
    safe_total = np.where(live, total, 1.0)
    p = power / safe_total[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0.0, p * np.log(p), 0.0)
    entropy = np.where(live, -plogp.sum(axis=1) / math.log(n_bins), 0.0)
    centroid = np.where(live, (freqs[None, :, None] * p).sum(axis=1), 0.0)
    energy = total
    dom = freqs[np.argmax(power, axis=1)]
    dom = np.where(live, dom, 0.0)
    spread_sq = ((freqs[None, :, None] - centroid[:, None, :]) ** 2 * p).sum(axis=1)
    spread = np.where(live, np.sqrt(np.maximum(spread_sq, 0.0)), 0.0)
    spec_feats = np.stack([entropy, centroid, energy, dom, spread], axis=2)  # (k, 6, 5)

    # aggregates, 14
    absx = np.abs(x)
    sma_accel = absx[:, :, 0:3].sum(axis=2).mean(axis=1)
    sma_gyro = absx[:, :, 3:6].sum(axis=2).mean(axis=1)
    abs_sums = absx.sum(axis=1)  # (k, 6)
    mag_accel = np.sqrt((x[:, :, 0:3] ** 2).sum(axis=2)).mean(axis=1)
    mag_gyro = np.sqrt((x[:, :, 3:6] ** 2).sum(axis=2)).mean(axis=1)
    energy_accel = (x[:, :, 0:3] ** 2).sum(axis=(1, 2)) / w
    energy_gyro = (x[:, :, 3:6] ** 2).sum(axis=(1, 2)) / w
    sma_all = absx.sum(axis=2).mean(axis=1)
    mag_all = np.sqrt((x**2).sum(axis=2)).mean(axis=1)

    out = np.concatenate(
        [
            time_feats.reshape(k, -1),
            spec_feats.reshape(k, -1),
            sma_accel[:, None],
            sma_gyro[:, None],
            abs_sums,
            mag_accel[:, None],
            mag_gyro[:, None],
            energy_accel[:, None],
            energy_gyro[:, None],
            sma_all[:, None],
            mag_all[:, None],
        ],
        axis=1,
    )
    assert out.shape == (k, FEATURE_COUNT)
    return out


def extract_features(window: np.ndarray, fs_hz: float) -> np.ndarray:
    """Feature vector of one (w, 6) window; always exactly 104 values."""
    return extract_features_batch(np.asarray(window)[None, :, :], fs_hz)[0]


@dataclass(frozen=True)
class FeatureMatrix:
    """Feature rows with behavior labels and window start times."""

    values: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) Behavior codes
    start_ms: np.ndarray
    names: tuple[str, ...]
    selected_indices: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise InvalidConfig("feature names must match matrix width")
        if not (len(self.values) == len(self.labels) == len(self.start_ms)):
            raise InvalidConfig("rows, labels and start times must align")
        if self.selected_indices is not None:
            sel = np.asarray(self.selected_indices)
            if len(np.unique(sel)) != len(sel) or sel.min() < 0 or sel.max() >= self.width:
                raise InvalidConfig("selected_indices must be unique and in range")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def take_rows(self, idx: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(
            values=self.values[idx],
            labels=self.labels[idx],
            start_ms=self.start_ms[idx],
            names=self.names,
            selected_indices=self.selected_indices,
        )

    def take_features(self, idx: np.ndarray) -> "FeatureMatrix":
        idx = np.asarray(idx, dtype=np.int64)
        return FeatureMatrix(
            values=self.values[:, idx],
            labels=self.labels,
            start_ms=self.start_ms,
            names=tuple(self.names[i] for i in idx),
            selected_indices=None,
        )


def featurize(rec: ImuRecording, track: LabelTrack, spec: WindowSpec) -> FeatureMatrix:
    """Window the recording and extract the full 104-column matrix."""
    batch = make_windows(rec, track, spec)
    if len(batch) == 0:
        values = np.empty((0, FEATURE_COUNT))
    else:
        values = extract_features_batch(batch.blocks, rec.sample_rate_hz)
    return FeatureMatrix(
        values=values, labels=batch.labels, start_ms=batch.start_ms, names=FEATURE_NAMES
    )


# --- feature selection ---------------------------------------------------------

RFE_STEP_FRACTION = 0.10


def rfe_select(
    X: np.ndarray, y: np.ndarray, target_count: int = 50, seed: int = 0
) -> np.ndarray:
    """Recursive feature elimination with a seeded random forest ranker.

    Each round drops the max(1, ceil(10% of remaining)) lowest-importance
    features (never overshooting the target).  Returns sorted indices into
    the original columns; deterministic given the seed.
    """
    from .models import RandomForestSpec, train

    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    d = X.shape[1]
    if target_count > d:
        raise TooFewFeatures(f"cannot select {target_count} from {d} features")
    if len(np.unique(y)) < 2:
        raise SingleClass("RFE needs at least two classes")
    remaining = np.arange(d)
    round_seeds = np.random.SeedSequence(seed).generate_state(128, dtype=np.uint32)
    rnd = 0
    while len(remaining) > target_count:
        model = train(RandomForestSpec(), X[:, remaining], y, seed=int(round_seeds[rnd]))
        importances = model.payload.feature_importances
        n_drop = min(
            max(1, math.ceil(RFE_STEP_FRACTION * len(remaining))),
            len(remaining) - target_count,
        )
        order = np.argsort(importances, kind="stable")  # ties: lowest index drops first
        keep = np.ones(len(remaining), dtype=bool)
        keep[order[:n_drop]] = False
        remaining = remaining[keep]
        rnd += 1
    return np.sort(remaining)


# --- scaling -------------------------------------------------------------------

@dataclass(frozen=True)
class ScalerParams:
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self) -> None:
        if np.any(self.maxs < self.mins):
            raise InvalidConfig("scaler max must be >= min per feature")


def fit_minmax(X: np.ndarray) -> ScalerParams:
    X = np.asarray(X, dtype=np.float64)
    if len(X) == 0:
        raise EmptyMatrix("cannot fit a scaler on an empty matrix")
    return ScalerParams(mins=X.min(axis=0), maxs=X.max(axis=0))


def apply_minmax(X: np.ndarray, params: ScalerParams) -> np.ndarray:
    """(x - min) / (max - min); constant features map to 0.  No clipping, so
    out-of-range test values land outside [0, 1]."""
    X = np.asarray(X, dtype=np.float64)
    span = params.maxs - params.mins
    safe = np.where(span > 0, span, 1.0)
    out = (X - params.mins) / safe
    out[:, span == 0] = 0.0
    return out


# --- CSV persistence -----------------------------------------------------------

def write_feature_matrix(matrix: FeatureMatrix, path, comments: list[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        fh.write(",".join(matrix.names) + ",label,window_start_ms\n")
        for i in range(len(matrix)):
            cells = [repr(float(v)) for v in matrix.values[i]]
            cells.append(Behavior(int(matrix.labels[i])).label)
            cells.append(repr(float(matrix.start_ms[i])))
            fh.write(",".join(cells) + "\n")


def read_feature_matrix(path) -> FeatureMatrix:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = None
        values, labels, starts = [], [], []
        for row in reader:
            if not row:
                continue
            if header is None:
                if row[0].lstrip().startswith("#"):
                    continue
                header = [c.strip() for c in row]
                if header[-2:] != ["label", "window_start_ms"]:
                    raise MalformedHeader(
                        f"{path}: feature CSV must end with label,window_start_ms"
                    )
                continue
            values.append([float(v) for v in row[:-2]])
            labels.append(int(Behavior.from_name(row[-2])))
            starts.append(float(row[-1]))
    if header is None:
        raise EmptyMatrix(f"{path}: no header found")
    d = len(header) - 2
    return FeatureMatrix(
        values=np.array(values, dtype=np.float64).reshape(len(values), d),
        labels=np.array(labels, dtype=np.int64),
        start_ms=np.array(starts, dtype=np.float64),
        names=tuple(header[:-2]),
    )


def write_selected_indices(indices: np.ndarray, names, path, comments=None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        fh.write("feature_index,feature_name\n")
        for i in indices:
            fh.write(f"{int(i)},{names[int(i)]}\n")


def read_selected_indices(path) -> np.ndarray:
    header, rows = _read_simple_csv(path)
    if header[:1] != ["feature_index"]:
        raise MalformedHeader(f"{path}: expected feature_index column")
    return np.array([int(r[0]) for r in rows], dtype=np.int64)


def write_scaler(params: ScalerParams, names, path, comments=None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        fh.write("feature_name,min,max\n")
        for name, lo, hi in zip(names, params.mins, params.maxs):
            fh.write(f"{name},{lo!r},{hi!r}\n")


def read_scaler(path) -> ScalerParams:
    header, rows = _read_simple_csv(path)
    if header != ["feature_name", "min", "max"]:
        raise MalformedHeader(f"{path}: expected feature_name,min,max header")
    return ScalerParams(
        mins=np.array([float(r[1]) for r in rows]),
        maxs=np.array([float(r[2]) for r in rows]),
    )


def _read_simple_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = None
        rows = []
        for row in reader:
            if not row:
                continue
            if header is None:
                if row[0].lstrip().startswith("#"):
                    continue
                header = [c.strip() for c in row]
                continue
            rows.append(row)
    if header is None:
        raise EmptyMatrix(f"{path}: empty file")
    return header, rows
