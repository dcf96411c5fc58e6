"""Per-channel outlier detection, imputation, and drop-rate reporting.

Outliers are flagged (IQR fences over the whole channel, or a rolling Hampel
test), marked missing, and filled by linear interpolation so the uniform
sample grid survives.  The drop rate counts samples with at least one
flagged channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .data_model import CHANNEL_NAMES, ImuRecording
from .errors import AllMissing, InvalidConfig, SeriesTooShort

#: Consistency factor making the MAD estimate sigma for Gaussian data.
MAD_SCALE = 1.4826

#: Deviation tolerated on zero-MAD (locally constant) windows.
ZERO_MAD_EPSILON = 1e-9

OUTLIER_METHODS = ("iqr", "hampel", "none")


@dataclass(frozen=True)
class OutlierConfig:
    method: str = "hampel"
    iqr_k: float = 1.5
    hampel_half_window: int = 12
    hampel_n_sigmas: float = 3.0

    def __post_init__(self) -> None:
        if self.method not in OUTLIER_METHODS:
            raise InvalidConfig(
                f"method must be one of {OUTLIER_METHODS}, got {self.method!r}"
            )
        if self.iqr_k <= 0:
            raise InvalidConfig(f"iqr_k must be positive, got {self.iqr_k}")
        if self.hampel_half_window < 1:
            raise InvalidConfig(
                f"hampel_half_window must be >= 1, got {self.hampel_half_window}"
            )
        if self.hampel_n_sigmas <= 0:
            raise InvalidConfig(
                f"hampel_n_sigmas must be positive, got {self.hampel_n_sigmas}"
            )


@dataclass(frozen=True)
class OutlierReport:
    flagged_per_channel: dict[str, int]
    total_samples: int
    drop_rate_pct: float

    def csv_rows(self) -> list[tuple[str, str]]:
        rows = [("total_samples", str(self.total_samples))]
        rows += [
            (f"flagged_{ch}", str(self.flagged_per_channel[ch])) for ch in CHANNEL_NAMES
        ]
        rows.append(("drop_rate_pct", repr(self.drop_rate_pct)))
        return rows


def detect_iqr(channel: np.ndarray, k: float = 1.5) -> np.ndarray:
    """Flag values outside [Q1 - k*IQR, Q3 + k*IQR] over the whole channel.

    Quartiles use linearly interpolated percentiles.  NaN values are ignored
    when computing the fences and never flagged.
    """
    if k <= 0:
        raise InvalidConfig(f"k must be positive, got {k}")
    x = np.asarray(channel, dtype=np.float64)
    if len(x) < 4:
        raise SeriesTooShort(f"IQR detection needs >= 4 samples, got {len(x)}")
    known = np.isfinite(x)
    if not known.any():
        raise AllMissing("channel has no finite values")
    q1, q3 = np.percentile(x[known], [25.0, 75.0])
    iqr = q3 - q1
    with np.errstate(invalid="ignore"):
        return (x < q1 - k * iqr) | (x > q3 + k * iqr)


def detect_hampel(
    channel: np.ndarray, half_window: int = 12, n_sigmas: float = 3.0
) -> np.ndarray:
    """Rolling-median outlier test with edge-truncated windows.

    For each position the window spans +-half_window samples (shorter at the
    edges); the point is flagged when it deviates from the window median by
    more than n_sigmas scaled MADs.  Zero-MAD windows flag only deviations
    above ZERO_MAD_EPSILON.
    """
    if half_window < 1:
        raise InvalidConfig(f"half_window must be >= 1, got {half_window}")
    if n_sigmas <= 0:
        raise InvalidConfig(f"n_sigmas must be positive, got {n_sigmas}")
    x = np.asarray(channel, dtype=np.float64)
    n = len(x)
    if n < 2 * half_window + 1:
        raise SeriesTooShort(
            f"Hampel needs >= {2 * half_window + 1} samples, got {n}"
        )
    has_nan = bool(np.isnan(x).any())
    med_fn = np.nanmedian if has_nan else np.median

    medians = np.empty(n)
    mads = np.empty(n)
    width = 2 * half_window + 1
    windows = sliding_window_view(x, width)
    medians[half_window : n - half_window] = med_fn(windows, axis=1)
    mads[half_window : n - half_window] = med_fn(
        np.abs(windows - medians[half_window : n - half_window, None]), axis=1
    )
    for i in list(range(half_window)) + list(range(n - half_window, n)):
        w = x[max(0, i - half_window) : i + half_window + 1]
        m = med_fn(w)
        medians[i] = m
        mads[i] = med_fn(np.abs(w - m))

    scale = MAD_SCALE * mads
    dev = np.abs(x - medians)
    with np.errstate(invalid="ignore"):
        flags = dev > n_sigmas * scale
        flags[scale == 0.0] = dev[scale == 0.0] > ZERO_MAD_EPSILON
    flags[~np.isfinite(dev)] = False
    return flags


def impute_linear(channel: np.ndarray) -> np.ndarray:
    """Fill missing values by straight lines between known neighbors.

    Leading/trailing gaps extend the nearest known value.  Index positions
    serve as the abscissa.
    """
    x = np.asarray(channel, dtype=np.float64)
    known = np.isfinite(x)
    if not known.any():
        raise AllMissing("cannot impute a channel with no known values")
    if known.all():
        return x.copy()
    idx = np.arange(len(x))
    return np.interp(idx, idx[known], x[known])


def clean(rec: ImuRecording, cfg: OutlierConfig) -> tuple[ImuRecording, OutlierReport]:
    """Detect outliers per channel, mark them missing, impute, and report.

    Timestamps and length are unchanged; the result has no missing values.
    """
    n = len(rec)
    out = np.empty_like(rec.channels)
    flags = np.zeros((n, len(CHANNEL_NAMES)), dtype=bool)
    for j, name in enumerate(CHANNEL_NAMES):
        x = rec.channels[:, j]
        if cfg.method == "iqr":
            flags[:, j] = detect_iqr(x, cfg.iqr_k)
        elif cfg.method == "hampel":
            flags[:, j] = detect_hampel(x, cfg.hampel_half_window, cfg.hampel_n_sigmas)
        marked = x.copy()
        marked[flags[:, j]] = np.nan
        out[:, j] = impute_linear(marked)
    sample_flagged = flags.any(axis=1)
    report = OutlierReport(
        flagged_per_channel={
            name: int(flags[:, j].sum()) for j, name in enumerate(CHANNEL_NAMES)
        },
        total_samples=n,
        drop_rate_pct=100.0 * float(sample_flagged.sum()) / n,
    )
    return rec.with_channels(out), report
