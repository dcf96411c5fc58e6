"""Daubechies-4 discrete wavelet transform and soft-threshold denoising.

Self-contained orthonormal DWT on 1-D signals with symmetric (half-sample)
boundary extension.  Enough boundary coefficients are retained per level that
the inverse transform reconstructs the input exactly, so a zero threshold is
a perfect round trip.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidConfig, SeriesTooShort

# Daubechies-4 scaling (reconstruction low-pass) filter, sum = sqrt(2).
REC_LO = np.array(
    [
        0.23037781330885523,
        0.7148465705525415,
        0.6308807679295904,
        -0.02798376941698385,
        -0.18703481171888114,
        0.030841381835986965,
        0.032883011666982945,
        -0.010597401784997278,
    ]
)
_L = len(REC_LO)
# Quadrature mirror: wavelet filter w[n] = (-1)^n * g[L-1-n].
REC_HI = np.array([(-1.0) ** n * REC_LO[_L - 1 - n] for n in range(_L)])
# First retained coefficient index (see _dwt_step).
_K_MIN = -((_L - 1) // 2)


def _extended(x: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Values of the symmetric (edge-repeating) extension on [lo, hi)."""
    pattern = np.concatenate([x, x[::-1]])
    idx = np.arange(lo, hi) % (2 * len(x))
    return pattern[idx]


def _dwt_step(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One analysis step: approximation and detail coefficients.

    Coefficient k is the inner product of the extended signal with the filter
    shifted to 2k; k runs over [_K_MIN, (n-1)//2] so every coefficient needed
    to reconstruct samples [0, n) is kept.
    """
    n = len(x)
    k_max = (n - 1) // 2
    ext = _extended(x, 2 * _K_MIN, 2 * k_max + _L)
    windows = sliding_window_view(ext, _L)[::2]
    return windows @ REC_LO, windows @ REC_HI


def _idwt_step(approx: np.ndarray, detail: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`_dwt_step` for a signal of original length ``n``."""
    up_a = np.zeros(2 * len(approx))
    up_d = np.zeros(2 * len(detail))
    up_a[::2] = approx
    up_d[::2] = detail
    rec = np.convolve(up_a, REC_LO) + np.convolve(up_d, REC_HI)
    offset = -2 * _K_MIN
    return rec[offset : offset + n]


def max_level(n: int) -> int:
    """Deepest useful decomposition level for a length-``n`` signal."""
    if n < _L:
        return 0
    return int(math.floor(math.log2(n / (_L - 1))))


def wavedec(x: np.ndarray, level: int) -> tuple[np.ndarray, list[np.ndarray], list[int]]:
    """Multi-level analysis.

    Returns (approximation, details, lengths) where details[0] is the finest
    level and lengths[i] is the input length of analysis step i (needed by
    :func:`waverec`).
    """
    approx = np.asarray(x, dtype=np.float64)
    details: list[np.ndarray] = []
    lengths: list[int] = []
    for _ in range(level):
        lengths.append(len(approx))
        approx, d = _dwt_step(approx)
        details.append(d)
    return approx, details, lengths


def waverec(approx: np.ndarray, details: list[np.ndarray], lengths: list[int]) -> np.ndarray:
    """Inverse of :func:`wavedec`."""
    x = approx
    for d, n in zip(reversed(details), reversed(lengths)):
        x = _idwt_step(x, d, n)
    return x


def soft_threshold(c: np.ndarray, t: float) -> np.ndarray:
    return np.sign(c) * np.maximum(np.abs(c) - t, 0.0)


def noise_sigma_mad(x: np.ndarray) -> float:
    """Robust noise level estimate: median |finest detail| / 0.6745."""
    if len(x) < 2:
        raise SeriesTooShort(f"need at least 2 samples, got {len(x)}")
    _, d1 = _dwt_step(np.asarray(x, dtype=np.float64))
    return float(np.median(np.abs(d1)) / 0.6745)


def universal_threshold(x: np.ndarray) -> float:
    """sigma_hat * sqrt(2 ln n) with sigma_hat from the finest details."""
    return noise_sigma_mad(x) * math.sqrt(2.0 * math.log(len(x)))


def wavelet_denoise(x: np.ndarray, level: int = 4, threshold: float | None = None) -> np.ndarray:
    """Soft-threshold DWT denoising.

    ``threshold=None`` selects the universal threshold from the finest detail
    coefficients; an explicit value (e.g. 0.0 for a pure round trip) is used
    as-is on every detail level.  The requested level is clamped to what the
    series length supports, never below 1.
    """
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 2:
        raise SeriesTooShort(f"wavelet denoise needs >= 2 samples, got {len(x)}")
    if level < 1:
        raise InvalidConfig(f"level must be >= 1, got {level}")
    if threshold is not None and threshold < 0:
        raise InvalidConfig(f"threshold must be nonnegative, got {threshold}")
    lvl = max(1, min(level, max_level(len(x))))
    approx, details, lengths = wavedec(x, lvl)
    if threshold is None:
        sigma = float(np.median(np.abs(details[0])) / 0.6745)
        threshold = sigma * math.sqrt(2.0 * math.log(len(x)))
    shrunk = [soft_threshold(d, threshold) for d in details]
    return waverec(approx, shrunk, lengths)
