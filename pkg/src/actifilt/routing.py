"""Uniform vs. behavior-routed filtering of a labeled recording.

The router maps every sample to its activity group, merges consecutive equal
groups into maximal runs, and filters each run independently per channel.
Runs never see each other's data: boundary padding inside a filter reflects
within the run only, so edits in one run leave all other runs bit-identical.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data_model import ActivityGroup, ImuRecording, LabelTrack, behaviors_at, group_of, Behavior
from .errors import InvalidConfig, MissingValues
from .filters import (
    FilterKind,
    LowpassFilter,
    MedianFilter,
    TvdFilter,
    WaveletFilter,
    apply_filter,
    filter_spec_string,
    min_length,
    parse_filter_spec,
)

log = logging.getLogger(__name__)

UNIFORM = "uniform"
BEHAVIOR_SPECIFIC = "behavior"


@dataclass(frozen=True)
class FilterCombination:
    """Either one uniform filter, or an (active, inactive) filter pair."""

    mode: str
    active: FilterKind
    inactive: FilterKind | None = None

    def __post_init__(self) -> None:
        if self.mode == UNIFORM:
            if self.inactive is not None:
                raise InvalidConfig("uniform mode takes a single filter")
        elif self.mode == BEHAVIOR_SPECIFIC:
            if self.inactive is None:
                raise InvalidConfig("behavior-specific mode needs an inactive filter")
        else:
            raise InvalidConfig(f"unknown combination mode {self.mode!r}")

    @classmethod
    def uniform(cls, kind: FilterKind) -> "FilterCombination":
        return cls(mode=UNIFORM, active=kind)

    @classmethod
    def behavior_specific(cls, active: FilterKind, inactive: FilterKind) -> "FilterCombination":
        return cls(mode=BEHAVIOR_SPECIFIC, active=active, inactive=inactive)

    @property
    def is_uniform(self) -> bool:
        return self.mode == UNIFORM

    @property
    def is_effectively_uniform(self) -> bool:
        """True also for behavior-specific pairs with identical filters."""
        return self.is_uniform or self.active == self.inactive

    def spec_string(self) -> str:
        if self.is_uniform:
            return f"uniform:{filter_spec_string(self.active)}"
        return (
            f"behavior:{filter_spec_string(self.active)}"
            f":{filter_spec_string(self.inactive)}"
        )


#: Pre-registered behavior-specific presets (active filter named first).
PRESET_COMBINATIONS = {
    "wavelet+median": FilterCombination.behavior_specific(WaveletFilter(), MedianFilter()),
    "wavelet+lpf": FilterCombination.behavior_specific(WaveletFilter(), LowpassFilter()),
    "tvd+lpf": FilterCombination.behavior_specific(TvdFilter(), LowpassFilter()),
    "tvd+median": FilterCombination.behavior_specific(TvdFilter(), MedianFilter()),
}


def parse_combination(spec: str) -> FilterCombination:
    """Parse ``uniform:<filter>``, ``behavior:<active>:<inactive>``, a preset
    name, or a bare filter spec (treated as uniform)."""
    text = spec.strip()
    low = text.lower()
    if low in PRESET_COMBINATIONS:
        return PRESET_COMBINATIONS[low]
    mode, _, rest = low.partition(":")
    if mode == UNIFORM:
        return FilterCombination.uniform(parse_filter_spec(rest))
    if mode == BEHAVIOR_SPECIFIC:
        groups = _split_filter_specs(rest)
        if len(groups) != 2:
            raise InvalidConfig(
                f"behavior mode needs exactly 2 filter specs, got {len(groups)} in {spec!r}"
            )
        return FilterCombination.behavior_specific(
            parse_filter_spec(groups[0]), parse_filter_spec(groups[1])
        )
    return FilterCombination.uniform(parse_filter_spec(low))


def _split_filter_specs(text: str) -> list[str]:
    """Split ``a:k=v:b:k=v`` into filter specs; param tokens contain '='."""
    groups: list[str] = []
    for token in text.split(":"):
        if "=" in token and groups:
            groups[-1] += ":" + token
        else:
            groups.append(token)
    return [g for g in groups if g]


@dataclass(frozen=True)
class SegmentPlan:
    """Maximal same-group runs partitioning [0, n) as (start, end, group)."""

    runs: tuple[tuple[int, int, ActivityGroup], ...]

    def __post_init__(self) -> None:
        prev_end = 0
        prev_group = None
        for start, end, grp in self.runs:
            if start != prev_end or end <= start:
                raise InvalidConfig("runs must partition [0, n) contiguously")
            if prev_group is not None and grp == prev_group:
                raise InvalidConfig("adjacent runs must have different groups")
            prev_end, prev_group = end, grp

    @property
    def n_samples(self) -> int:
        return self.runs[-1][1] if self.runs else 0


def plan_segments(rec: ImuRecording, track: LabelTrack) -> SegmentPlan:
    """Group each sample by its labeled behavior and merge into runs."""
    codes = behaviors_at(track, rec.t_ms)
    groups = np.fromiter(
        (int(group_of(Behavior(int(c)))) for c in codes), dtype=np.int64, count=len(codes)
    )
    if len(groups) == 0:
        return SegmentPlan(runs=())
    change = np.flatnonzero(np.diff(groups)) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [len(groups)]])
    runs = tuple(
        (int(s), int(e), ActivityGroup(int(groups[s]))) for s, e in zip(starts, ends)
    )
    return SegmentPlan(runs=runs)


def apply_combination(
    rec: ImuRecording,
    plan: SegmentPlan,
    combo: FilterCombination,
    fs_hz: float | None = None,
) -> ImuRecording:
    """Filter the recording uniformly or per activity run.

    Requires a clean recording (no missing values).  Runs shorter than a
    filter's minimum length pass through unfiltered (counted and logged).
    """
    if rec.has_missing():
        raise MissingValues("apply_combination requires a recording without missing values")
    fs = fs_hz if fs_hz is not None else rec.sample_rate_hz
    out = np.empty_like(rec.channels)
    skipped = 0
    if combo.is_uniform:
        for j in range(rec.channels.shape[1]):
            x = rec.channels[:, j]
            if len(x) < min_length(combo.active):
                out[:, j] = x
                skipped += 1
            else:
                out[:, j] = apply_filter(x, combo.active, fs)
    else:
        if plan.n_samples != len(rec):
            raise InvalidConfig("segment plan does not cover the recording")
        by_group = {
            ActivityGroup.ACTIVE: combo.active,
            ActivityGroup.INACTIVE: combo.inactive,
        }
        for start, end, grp in plan.runs:
            kind = by_group[grp]
            for j in range(rec.channels.shape[1]):
                x = rec.channels[start:end, j]
                if len(x) < min_length(kind):
                    out[start:end, j] = x
                    skipped += 1
                else:
                    out[start:end, j] = apply_filter(x, kind, fs)
    if skipped:
        log.warning("%d run-channel segments shorter than filter minimum passed through", skipped)
    return rec.with_channels(out)
