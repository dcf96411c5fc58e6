"""The six channel filters and their parameter records.

Every filter is a pure transform on one real-valued series: length is
preserved and constants are fixpoints (the high-pass filter maps constants
to zero instead).  Filter specs parse from compact strings such as
``"lpf:cutoff=5,order=4"`` for CLI and config use.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal

from .errors import (
    CutoffOutOfRange,
    EvenWindow,
    InvalidConfig,
    InvalidWindowOrder,
    SeriesTooShort,
)
from .tv import tv_denoise
from .wavelet import noise_sigma_mad, wavelet_denoise


@dataclass(frozen=True)
class RawFilter:
    """Identity: the unfiltered baseline."""

    name = "raw"


@dataclass(frozen=True)
class WaveletFilter:
    """db4 soft-threshold denoising; ``threshold=None`` -> universal."""

    level: int = 4
    threshold: float | None = None
    name = "wavelet"

    def __post_init__(self) -> None:
        if self.level < 1:
            raise InvalidConfig(f"wavelet level must be >= 1, got {self.level}")
        if self.threshold is not None and self.threshold < 0:
            raise InvalidConfig(f"wavelet threshold must be >= 0, got {self.threshold}")


@dataclass(frozen=True)
class TvdFilter:
    """Total variation denoising; ``lam=None`` ties lambda to the noise level."""

    lam: float | None = None
    name = "tvd"

    def __post_init__(self) -> None:
        if self.lam is not None and self.lam < 0:
            raise InvalidConfig(f"tvd lambda must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class MedianFilter:
    window: int = 5
    name = "median"

    def __post_init__(self) -> None:
        if self.window % 2 == 0:
            raise EvenWindow(f"median window must be odd, got {self.window}")
        if self.window < 3:
            raise InvalidConfig(f"median window must be >= 3, got {self.window}")


@dataclass(frozen=True)
class LowpassFilter:
    cutoff_hz: float = 5.0
    order: int = 4
    name = "lpf"

    def __post_init__(self) -> None:
        _check_butter(self.cutoff_hz, self.order)


@dataclass(frozen=True)
class HighpassFilter:
    cutoff_hz: float = 0.5
    order: int = 4
    name = "hpf"

    def __post_init__(self) -> None:
        _check_butter(self.cutoff_hz, self.order)


@dataclass(frozen=True)
class SavgolFilter:
    window: int = 11
    polyorder: int = 3
    name = "savgol"

    def __post_init__(self) -> None:
        if self.window % 2 == 0 or self.window < self.polyorder + 2:
            raise InvalidWindowOrder(
                f"savgol window must be odd and >= polyorder+2, got "
                f"window={self.window} polyorder={self.polyorder}"
            )
        if self.polyorder < 0:
            raise InvalidWindowOrder(f"polyorder must be >= 0, got {self.polyorder}")


FilterKind = Union[
    RawFilter, WaveletFilter, TvdFilter, MedianFilter, LowpassFilter, HighpassFilter, SavgolFilter
]


def _check_butter(cutoff_hz: float, order: int) -> None:
    if cutoff_hz <= 0:
        raise CutoffOutOfRange(f"cutoff must be positive, got {cutoff_hz}")
    if order < 2 or order % 2 != 0:
        raise InvalidConfig(f"butterworth order must be even and >= 2, got {order}")


def median_filter(x: np.ndarray, window: int) -> np.ndarray:
    """Centered running median with replicate padding at the edges."""
    if window % 2 == 0:
        raise EvenWindow(f"median window must be odd, got {window}")
    if window < 3:
        raise InvalidConfig(f"median window must be >= 3, got {window}")
    x = np.asarray(x, dtype=np.float64)
    half = window // 2
    padded = np.pad(x, half, mode="edge")
    return np.median(sliding_window_view(padded, window), axis=1)


def butterworth_zero_phase(
    x: np.ndarray, cutoff_hz: float, fs_hz: float, order: int, mode: str
) -> np.ndarray:
    """Forward-backward Butterworth filtering (zero phase).

    Second-order-section cascade from the bilinear transform with frequency
    pre-warping; each pass starts from the step steady state so constants map
    exactly to the DC gain.  Reflective padding of 3*order samples absorbs
    the remaining edge transients.
    """
    if mode not in ("low", "high"):
        raise InvalidConfig(f"mode must be 'low' or 'high', got {mode!r}")
    _check_butter(cutoff_hz, order)
    if cutoff_hz >= fs_hz / 2:
        raise CutoffOutOfRange(
            f"cutoff {cutoff_hz} Hz must be below Nyquist {fs_hz / 2} Hz"
        )
    x = np.asarray(x, dtype=np.float64)
    pad = 3 * order
    if len(x) <= pad:
        raise SeriesTooShort(f"need more than {pad} samples for order {order}, got {len(x)}")
    sos = signal.butter(order, cutoff_hz, btype=mode, fs=fs_hz, output="sos")
    ext = np.concatenate([x[pad:0:-1], x, x[-2 : -pad - 2 : -1]])
    zi = signal.sosfilt_zi(sos)
    fwd, _ = signal.sosfilt(sos, ext, zi=zi * ext[0])
    rev, _ = signal.sosfilt(sos, fwd[::-1], zi=zi * fwd[-1])
    return rev[::-1][pad : pad + len(x)]


def savitzky_golay(x: np.ndarray, window: int, polyorder: int) -> np.ndarray:
    """Least-squares polynomial smoothing.

    Edges are handled by evaluating the polynomial fit of the terminal
    window, which keeps the filter exact on polynomials up to ``polyorder``
    over the whole series.
    """
    if window % 2 == 0 or window < polyorder + 2:
        raise InvalidWindowOrder(
            f"window must be odd and >= polyorder+2, got window={window} polyorder={polyorder}"
        )
    x = np.asarray(x, dtype=np.float64)
    if len(x) < window:
        raise SeriesTooShort(f"need at least {window} samples, got {len(x)}")
    return signal.savgol_filter(x, window, polyorder, mode="interp")


def min_length(kind: FilterKind) -> int:
    """Shortest series the filter accepts; shorter segments pass through."""
    if isinstance(kind, RawFilter):
        return 0
    if isinstance(kind, WaveletFilter):
        return 2
    if isinstance(kind, TvdFilter):
        return 2 if kind.lam is None else 1
    if isinstance(kind, MedianFilter):
        return 1
    if isinstance(kind, (LowpassFilter, HighpassFilter)):
        return 3 * kind.order + 1
    if isinstance(kind, SavgolFilter):
        return kind.window
    raise InvalidConfig(f"unknown filter kind {kind!r}")


def apply_filter(x: np.ndarray, kind: FilterKind, fs_hz: float) -> np.ndarray:
    """Dispatch one series through the configured filter."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(kind, RawFilter):
        return x.copy()
    if isinstance(kind, WaveletFilter):
        return wavelet_denoise(x, level=kind.level, threshold=kind.threshold)
    if isinstance(kind, TvdFilter):
        lam = kind.lam if kind.lam is not None else 0.5 * noise_sigma_mad(x)
        return tv_denoise(x, lam)
    if isinstance(kind, MedianFilter):
        return median_filter(x, kind.window)
    if isinstance(kind, LowpassFilter):
        return butterworth_zero_phase(x, kind.cutoff_hz, fs_hz, kind.order, "low")
    if isinstance(kind, HighpassFilter):
        return butterworth_zero_phase(x, kind.cutoff_hz, fs_hz, kind.order, "high")
    if isinstance(kind, SavgolFilter):
        return savitzky_golay(x, kind.window, kind.polyorder)
    raise InvalidConfig(f"unknown filter kind {kind!r}")


# --- spec strings -------------------------------------------------------------

_FILTER_CLASSES = {
    "raw": RawFilter,
    "wavelet": WaveletFilter,
    "tvd": TvdFilter,
    "median": MedianFilter,
    "lpf": LowpassFilter,
    "hpf": HighpassFilter,
    "savgol": SavgolFilter,
}

_PARAM_ALIASES = {
    "lpf": {"cutoff": "cutoff_hz"},
    "hpf": {"cutoff": "cutoff_hz"},
    "tvd": {"lambda": "lam"},
}


def parse_filter_spec(spec: str) -> FilterKind:
    """Parse ``name`` or ``name:key=value,...`` into a filter instance."""
    text = spec.strip().lower()
    name, _, params = text.partition(":")
    cls = _FILTER_CLASSES.get(name)
    if cls is None:
        raise InvalidConfig(
            f"unknown filter {name!r}; expected one of {sorted(_FILTER_CLASSES)}"
        )
    kwargs = {}
    if params:
        aliases = _PARAM_ALIASES.get(name, {})
        valid = {f.name for f in fields(cls)}
        for item in params.split(","):
            key, eq, value = item.partition("=")
            key = aliases.get(key.strip(), key.strip())
            if not eq or key not in valid:
                raise InvalidConfig(f"bad filter parameter {item!r} for {name!r}")
            field_type = next(f.type for f in fields(cls) if f.name == key)
            if "int" in str(field_type):
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
    return cls(**kwargs)


def filter_spec_string(kind: FilterKind) -> str:
    """Inverse of :func:`parse_filter_spec` (defaults are spelled out)."""
    parts = []
    for f in fields(kind):
        v = getattr(kind, f.name)
        if v is None:
            continue
        parts.append(f"{f.name}={v:g}" if isinstance(v, float) else f"{f.name}={v}")
    return kind.name if not parts else f"{kind.name}:{','.join(parts)}"
