"""Domain types and CSV ingestion for 6-axis motion data.

A recording is a fixed-rate stream of six channels (3-axis accelerometer in g,
3-axis gyroscope in deg/s) with millisecond timestamps.  Labels arrive as
half-open behavior intervals ``[start_ms, end_ms)`` on the same clock.
Missing channel values are represented as NaN throughout.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple

import numpy as np

from .errors import (
    EmptyFile,
    ExcessiveJitter,
    InvalidConfig,
    MalformedHeader,
    MalformedRow,
    OverlappingIntervals,
    UnknownBehaviorName,
    UnsortedTimestamps,
)

CHANNEL_NAMES = ("ax", "ay", "az", "gx", "gy", "gz")
RECORDING_HEADER = ("t_ms",) + CHANNEL_NAMES
LABEL_HEADER = ("start_ms", "end_ms", "behavior")

#: Relative tolerance on sample spacing around the nominal period.
JITTER_TOLERANCE = 0.20


class Behavior(enum.IntEnum):
    """The seven annotated behavior classes."""

    EATING = 0
    LYING = 1
    WALKING = 2
    STANDING = 3
    INTERACTING = 4
    DRINKING = 5
    UNKNOWN = 6

    @classmethod
    def from_name(cls, name: str) -> "Behavior":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise UnknownBehaviorName(f"unknown behavior name: {name!r}") from None

    @property
    def label(self) -> str:
        return self.name.capitalize()


class ActivityGroup(enum.IntEnum):
    """Two-way grouping of behaviors by movement dynamics."""

    ACTIVE = 0
    INACTIVE = 1


ACTIVE_BEHAVIORS = frozenset(
    {Behavior.EATING, Behavior.WALKING, Behavior.INTERACTING, Behavior.DRINKING}
)

#: Behaviors used for classification; Drinking and Unknown windows are dropped.
CLASSIFIED_BEHAVIORS = (
    Behavior.EATING,
    Behavior.LYING,
    Behavior.WALKING,
    Behavior.STANDING,
    Behavior.INTERACTING,
)


def group_of(behavior: Behavior) -> ActivityGroup:
    """Map a behavior to its activity group.

    Unknown routes to Inactive: gaps get the conservative smoothing path.
    """
    if behavior in ACTIVE_BEHAVIORS:
        return ActivityGroup.ACTIVE
    return ActivityGroup.INACTIVE


class ImuSample(NamedTuple):
    t_ms: float
    ax: float
    ay: float
    az: float
    gx: float
    gy: float
    gz: float


@dataclass(frozen=True)
class ImuRecording:
    """Ordered 6-channel samples at a fixed nominal rate.

    ``channels`` is an (n, 6) float64 array in CHANNEL_NAMES order; NaN marks
    a missing value.  Instances are immutable: arrays are copied on
    construction and flagged read-only.
    """

    t_ms: np.ndarray
    channels: np.ndarray
    sample_rate_hz: float
    subject_id: str = ""
    session_id: str = ""

    def __post_init__(self) -> None:
        if self.sample_rate_hz <= 0:
            raise InvalidConfig(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        t = np.asarray(self.t_ms, dtype=np.float64).copy()
        ch = np.asarray(self.channels, dtype=np.float64).copy()
        if ch.ndim != 2 or ch.shape[1] != len(CHANNEL_NAMES):
            raise InvalidConfig(f"channels must be (n, 6), got {ch.shape}")
        if len(t) != len(ch):
            raise InvalidConfig("t_ms and channels disagree on sample count")
        if len(t) > 1:
            dt = np.diff(t)
            if np.any(dt <= 0):
                i = int(np.argmax(dt <= 0))
                raise UnsortedTimestamps(
                    f"timestamps not strictly increasing at row {i + 1} "
                    f"(t={t[i]} -> {t[i + 1]})"
                )
            period = 1000.0 / self.sample_rate_hz
            bad = (dt < (1 - JITTER_TOLERANCE) * period) | (dt > (1 + JITTER_TOLERANCE) * period)
            if np.any(bad):
                i = int(np.argmax(bad))
                raise ExcessiveJitter(
                    f"sample spacing {dt[i]:.3f} ms at row {i + 1} outside "
                    f"±{JITTER_TOLERANCE:.0%} of nominal {period:.3f} ms"
                )
        # Non-finite values other than NaN also count as missing.
        ch[~np.isfinite(ch)] = np.nan
        t.setflags(write=False)
        ch.setflags(write=False)
        object.__setattr__(self, "t_ms", t)
        object.__setattr__(self, "channels", ch)

    def __len__(self) -> int:
        return len(self.t_ms)

    @property
    def n_samples(self) -> int:
        return len(self.t_ms)

    @property
    def period_ms(self) -> float:
        return 1000.0 / self.sample_rate_hz

    def channel(self, name: str) -> np.ndarray:
        return self.channels[:, CHANNEL_NAMES.index(name)]

    def sample(self, i: int) -> ImuSample:
        return ImuSample(float(self.t_ms[i]), *(float(v) for v in self.channels[i]))

    @property
    def samples(self) -> Iterator[ImuSample]:
        for i in range(len(self)):
            yield self.sample(i)

    def has_missing(self) -> bool:
        return bool(np.isnan(self.channels).any())

    def with_channels(self, channels: np.ndarray) -> "ImuRecording":
        """New recording with replaced channel data, same clock and metadata."""
        return replace(self, channels=channels)


@dataclass(frozen=True)
class LabelTrack:
    """Sorted, non-overlapping behavior intervals (half-open, ms)."""

    starts_ms: np.ndarray
    ends_ms: np.ndarray
    behaviors: tuple[Behavior, ...] = field(default=())

    def __post_init__(self) -> None:
        starts = np.asarray(self.starts_ms, dtype=np.float64).copy()
        ends = np.asarray(self.ends_ms, dtype=np.float64).copy()
        behs = tuple(Behavior(b) for b in self.behaviors)
        if not (len(starts) == len(ends) == len(behs)):
            raise InvalidConfig("starts, ends and behaviors must have equal length")
        order = np.argsort(starts, kind="stable")
        starts, ends = starts[order], ends[order]
        behs = tuple(behs[i] for i in order)
        if np.any(starts >= ends):
            i = int(np.argmax(starts >= ends))
            raise OverlappingIntervals(
                f"interval {i} has start_ms {starts[i]} >= end_ms {ends[i]}"
            )
        if len(starts) > 1 and np.any(starts[1:] < ends[:-1]):
            i = int(np.argmax(starts[1:] < ends[:-1]))
            raise OverlappingIntervals(
                f"interval starting at {starts[i + 1]} overlaps previous "
                f"interval ending at {ends[i]}"
            )
        starts.setflags(write=False)
        ends.setflags(write=False)
        object.__setattr__(self, "starts_ms", starts)
        object.__setattr__(self, "ends_ms", ends)
        object.__setattr__(self, "behaviors", behs)

    def __len__(self) -> int:
        return len(self.starts_ms)

    @property
    def intervals(self) -> list[tuple[float, float, Behavior]]:
        return [
            (float(s), float(e), b)
            for s, e, b in zip(self.starts_ms, self.ends_ms, self.behaviors)
        ]


def behaviors_at(track: LabelTrack, t_ms: np.ndarray) -> np.ndarray:
    """Vectorized behavior lookup; uncovered timestamps map to Unknown."""
    t = np.asarray(t_ms, dtype=np.float64)
    out = np.full(t.shape, int(Behavior.UNKNOWN), dtype=np.int64)
    if len(track) == 0:
        return out
    idx = np.searchsorted(track.starts_ms, t, side="right") - 1
    valid = idx >= 0
    codes = np.fromiter((int(b) for b in track.behaviors), dtype=np.int64, count=len(track))
    covered = valid & (t < track.ends_ms[np.clip(idx, 0, len(track) - 1)])
    out[covered] = codes[idx[covered]]
    return out


def behavior_at(track: LabelTrack, t_ms: float) -> Behavior:
    """Behavior of the interval covering ``t_ms`` (half-open), else Unknown."""
    return Behavior(int(behaviors_at(track, np.array([t_ms]))[0]))


# --- CSV I/O ------------------------------------------------------------------

def _read_csv_rows(path) -> tuple[list[str], list[list[str]]]:
    """Read a CSV, skipping leading ``#`` comment lines; returns header+rows."""
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
        raise EmptyFile(f"{path}: no header found")
    return header, rows


def _parse_cell(text: str) -> float:
    """Channel cell -> float; empty or non-numeric cells become NaN."""
    s = text.strip()
    if not s:
        return math.nan
    try:
        return float(s)
    except ValueError:
        return math.nan


def load_recording(path, sample_rate_hz: float) -> ImuRecording:
    """Parse a recording CSV (header ``t_ms,ax,ay,az,gx,gy,gz``).

    Non-numeric channel cells become missing marks (NaN).  Raises
    MalformedHeader, EmptyFile, MalformedRow, UnsortedTimestamps or
    ExcessiveJitter on bad input.
    """
    header, rows = _read_csv_rows(path)
    if tuple(header) != RECORDING_HEADER:
        raise MalformedHeader(
            f"{path}: expected header {','.join(RECORDING_HEADER)}, got {','.join(header)}"
        )
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    n = len(rows)
    t = np.empty(n, dtype=np.float64)
    ch = np.empty((n, 6), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != 7:
            raise MalformedRow(f"{path}: row {i + 1} has {len(row)} cells, expected 7")
        try:
            t[i] = float(row[0])
        except ValueError:
            raise MalformedRow(f"{path}: row {i + 1} has non-numeric t_ms {row[0]!r}") from None
        for j in range(6):
            ch[i, j] = _parse_cell(row[j + 1])
    return ImuRecording(t_ms=t, channels=ch, sample_rate_hz=sample_rate_hz)


def _fmt(v: float) -> str:
    """Shortest exact decimal form; NaN writes as the documented sentinel."""
    if math.isnan(v):
        return "NaN"
    return repr(float(v))


def write_recording(rec: ImuRecording, path, comments: list[str] | None = None) -> None:
    """Write a recording CSV; optional ``comments`` become leading # lines."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        fh.write(",".join(RECORDING_HEADER) + "\n")
        for i in range(len(rec)):
            cells = [_fmt(rec.t_ms[i])] + [_fmt(v) for v in rec.channels[i]]
            fh.write(",".join(cells) + "\n")


def load_labels(path) -> LabelTrack:
    """Parse a label CSV (header ``start_ms,end_ms,behavior``)."""
    header, rows = _read_csv_rows(path)
    if tuple(header) != LABEL_HEADER:
        raise MalformedHeader(
            f"{path}: expected header {','.join(LABEL_HEADER)}, got {','.join(header)}"
        )
    starts, ends, behs = [], [], []
    for i, row in enumerate(rows):
        if len(row) != 3:
            raise MalformedRow(f"{path}: row {i + 1} has {len(row)} cells, expected 3")
        try:
            starts.append(float(row[0]))
            ends.append(float(row[1]))
        except ValueError:
            raise MalformedRow(f"{path}: row {i + 1} has non-numeric bounds") from None
        behs.append(Behavior.from_name(row[2]))
    return LabelTrack(
        starts_ms=np.array(starts, dtype=np.float64),
        ends_ms=np.array(ends, dtype=np.float64),
        behaviors=tuple(behs),
    )


def write_labels(track: LabelTrack, path, comments: list[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        fh.write(",".join(LABEL_HEADER) + "\n")
        for s, e, b in track.intervals:
            fh.write(f"{_fmt(s)},{_fmt(e)},{b.label}\n")
