"""Format-independent episode, channel, and annotation types.

Every dataset adapter produces :class:`Episode` objects; the annotation and
metrics layers operate on :class:`EpisodeAnnotation` / :class:`LabelTimeline`.
All times are 64-bit floating seconds relative to the episode start (epoch
subtraction happens inside the adapters).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

# Reserved label for unannotated spans. Distinct from every user class and
# never accepted as a segment label.
GAP_LABEL = "∅"


class OverlapError(ValueError):
    """Raised when two committed segments overlap in time."""


@dataclass(frozen=True)
class CameraStream:
    """One camera view: sorted frame timestamps plus an adapter-opaque locator."""

    name: str
    frame_timestamps: np.ndarray
    source_ref: object = None

    def __post_init__(self):
        ts = np.asarray(self.frame_timestamps, dtype=np.float64)
        object.__setattr__(self, "frame_timestamps", ts)
        if ts.ndim != 1:
            raise ValueError(f"camera {self.name!r}: timestamps must be 1-D")
        if ts.size > 1 and np.any(np.diff(ts) < 0):
            raise ValueError(f"camera {self.name!r}: timestamps must be non-decreasing")

    @property
    def frame_count(self) -> int:
        return int(self.frame_timestamps.size)


@dataclass(frozen=True)
class TimeSeriesChannel:
    """Named multi-dimensional signal with per-sample timestamps."""

    name: str
    timestamps: np.ndarray            # (N,) seconds
    values: np.ndarray                # (N, dims)
    unit: str = ""
    dim_labels: tuple[str, ...] = ()

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        if ts.ndim != 1:
            raise ValueError(f"channel {self.name!r}: timestamps must be 1-D")
        if vals.shape[0] != ts.size:
            raise ValueError(
                f"channel {self.name!r}: {vals.shape[0]} value rows vs "
                f"{ts.size} timestamps"
            )
        if ts.size > 1 and np.any(np.diff(ts) < 0):
            raise ValueError(f"channel {self.name!r}: timestamps must be non-decreasing")
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"channel {self.name!r}: non-finite values")
        if not self.dim_labels:
            object.__setattr__(
                self, "dim_labels", tuple(str(i) for i in range(vals.shape[1]))
            )
        if len(self.dim_labels) != vals.shape[1]:
            raise ValueError(
                f"channel {self.name!r}: {len(self.dim_labels)} dim labels for "
                f"{vals.shape[1]} dims"
            )

    @property
    def dims(self) -> int:
        return int(self.values.shape[1])

    @property
    def sample_count(self) -> int:
        return int(self.timestamps.size)


@dataclass(frozen=True)
class Episode:
    """Unified in-memory view of one demonstration."""

    id: str
    duration: float
    cameras: tuple[CameraStream, ...] = ()
    channels: tuple[TimeSeriesChannel, ...] = ()
    description: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "cameras", tuple(self.cameras))
        object.__setattr__(self, "channels", tuple(self.channels))
        if not self.cameras and not self.channels:
            raise ValueError(f"episode {self.id!r}: needs at least one camera or channel")
        names = [c.name for c in self.cameras] + [c.name for c in self.channels]
        if len(set(names)) != len(names):
            raise ValueError(f"episode {self.id!r}: duplicate stream names")
        if self.duration < 0:
            raise ValueError(f"episode {self.id!r}: negative duration")

    def camera(self, name: str) -> CameraStream:
        for cam in self.cameras:
            if cam.name == name:
                return cam
        raise KeyError(f"episode {self.id!r} has no camera {name!r}")

    def channel(self, name: str) -> TimeSeriesChannel:
        for ch in self.channels:
            if ch.name == name:
                return ch
        raise KeyError(f"episode {self.id!r} has no channel {name!r}")


def episode_duration(streams_last_timestamps) -> float:
    """Duration = max last timestamp over all non-empty streams (0 if none)."""
    last = [float(t) for t in streams_last_timestamps if t is not None]
    return max(last) if last else 0.0


@dataclass(frozen=True)
class AnnotationSegment:
    """One action: half-open [start, end) span, class label, outcome flag."""

    start: float
    end: float
    label: str
    success: bool = True


@dataclass(frozen=True)
class EpisodeAnnotation:
    """All segments one annotator committed for one episode."""

    episode_id: str
    annotator_id: str
    segments: tuple[AnnotationSegment, ...] = ()

    def __post_init__(self):
        segs = tuple(sorted(self.segments, key=lambda s: (s.start, s.end)))
        object.__setattr__(self, "segments", segs)
        pair = find_overlap(segs)
        if pair is not None:
            a, b = pair
            raise OverlapError(
                f"episode {self.episode_id!r}: segment ({a.start}, {a.end}, {a.label!r}) "
                f"overlaps ({b.start}, {b.end}, {b.label!r})"
            )


def find_overlap(
    segments: tuple[AnnotationSegment, ...],
) -> tuple[AnnotationSegment, AnnotationSegment] | None:
    """First overlapping pair among start-sorted segments, or None.

    Touching boundaries (prev.end == next.start) do not overlap.
    """
    ordered = sorted(segments, key=lambda s: (s.start, s.end))
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.start < prev.end:
            return prev, cur
    return None


def validate_segment(
    seg: AnnotationSegment,
    duration: float,
    label_set: tuple[str, ...] | list[str] | None = None,
) -> list[str]:
    """Report-style validation: returns a list of violations, empty when valid.

    Never raises; callers decide whether a non-empty report is fatal.
    """
    violations = []
    if seg.start < 0:
        violations.append(f"negative start ({seg.start})")
    if seg.start == seg.end:
        violations.append(f"empty interval (start == end == {seg.start})")
    elif seg.start > seg.end:
        violations.append(f"start {seg.start} after end {seg.end}")
    if seg.end > duration:
        violations.append(f"end {seg.end} exceeds duration {duration}")
    if not seg.label or seg.label == GAP_LABEL:
        violations.append("empty or reserved label")
    elif label_set is not None and seg.label not in label_set:
        violations.append(f"unknown label {seg.label!r}")
    return violations


@dataclass(frozen=True)
class LabelTimeline:
    """Piecewise-constant label function over [0, T].

    ``breakpoints`` has one more entry than ``labels``; interval i is
    [breakpoints[i], breakpoints[i+1]), half-open except the last, which
    includes T. Unannotated spans carry :data:`GAP_LABEL`.
    """

    total_duration: float
    breakpoints: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        bp = self.breakpoints
        if len(bp) < 2 or len(self.labels) != len(bp) - 1:
            raise ValueError("breakpoints/labels length mismatch")
        if bp[0] != 0.0 or bp[-1] != self.total_duration:
            raise ValueError("breakpoints must span [0, T]")
        if any(b >= c for b, c in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")


def to_timeline(ann: EpisodeAnnotation, duration: float) -> LabelTimeline:
    """Expand segments into a gap-filling timeline covering [0, duration]."""
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    segs = ann.segments
    for i, seg in enumerate(segs):
        report = validate_segment(seg, duration)
        if report:
            raise ValueError(f"segment {i} invalid: {'; '.join(report)}")
    pair = find_overlap(segs)
    if pair is not None:
        a, b = pair
        raise OverlapError(
            f"segments ({a.start}, {a.end}) and ({b.start}, {b.end}) overlap"
        )

    boundaries = {0.0, float(duration)}
    for seg in segs:
        boundaries.add(float(seg.start))
        boundaries.add(float(seg.end))
    breakpoints = tuple(sorted(boundaries))

    labels = []
    seg_idx = 0
    for lo, hi in zip(breakpoints, breakpoints[1:]):
        while seg_idx < len(segs) and segs[seg_idx].end <= lo:
            seg_idx += 1
        if seg_idx < len(segs) and segs[seg_idx].start <= lo and hi <= segs[seg_idx].end:
            labels.append(segs[seg_idx].label)
        else:
            labels.append(GAP_LABEL)
    return LabelTimeline(float(duration), breakpoints, tuple(labels))


def label_at(tl: LabelTimeline, t: float) -> str:
    """Label of the interval containing t; intervals are [b_i, b_{i+1}) with
    the final interval closed at T."""
    if t < 0 or t > tl.total_duration:
        raise ValueError(f"t={t} outside [0, {tl.total_duration}]")
    idx = bisect_right(tl.breakpoints, t) - 1
    return tl.labels[min(idx, len(tl.labels) - 1)]


def timeline_to_segments(tl: LabelTimeline) -> list[tuple[float, float, str]]:
    """Inverse of :func:`to_timeline` up to the success flag: merge adjacent
    equal-label intervals and drop gap spans."""
    merged: list[tuple[float, float, str]] = []
    for i, label in enumerate(tl.labels):
        lo, hi = tl.breakpoints[i], tl.breakpoints[i + 1]
        if merged and merged[-1][2] == label and merged[-1][1] == lo:
            merged[-1] = (merged[-1][0], hi, label)
        else:
            merged.append((lo, hi, label))
    return [(s, e, lab) for s, e, lab in merged if lab != GAP_LABEL]
