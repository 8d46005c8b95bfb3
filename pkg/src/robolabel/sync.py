"""Time synchronization across streams with differing sample rates.

Seeking maps a query time onto every stream via nearest-neighbor matching
over the per-stream timestamp arrays (binary search, ties toward the earlier
index, out-of-range queries clamped). Also provides playback stepping at the
two configured speeds and min-max window downsampling for plotting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Episode, TimeSeriesChannel


def nearest_index(timestamps: np.ndarray, t: float) -> int:
    """Index of the sample closest to t.

    Ties break toward the smaller index; t outside the array range clamps to
    the first/last sample. Equal timestamps resolve to the first occurrence,
    matching a linear-scan argmin over |timestamps - t|.
    """
    ts = np.asarray(timestamps)
    n = ts.size
    if n == 0:
        raise ValueError("empty timestamp array")
    right = int(np.searchsorted(ts, t, side="left"))
    if right == 0:
        return 0
    if right == n:
        # Clamp, but step back over duplicates of the last value.
        return int(np.searchsorted(ts, ts[n - 1], side="left"))
    left = right - 1
    if t - ts[left] <= ts[right] - t:
        return int(np.searchsorted(ts, ts[left], side="left"))
    return right


@dataclass(frozen=True)
class TimeIndex:
    """Per-stream sorted timestamp arrays plus the global duration."""

    streams: dict[str, np.ndarray]
    duration: float

    @classmethod
    def for_episode(cls, episode: Episode) -> TimeIndex:
        streams: dict[str, np.ndarray] = {}
        for cam in episode.cameras:
            if cam.frame_count:
                streams[f"camera:{cam.name}"] = cam.frame_timestamps
        for ch in episode.channels:
            if ch.sample_count:
                streams[f"channel:{ch.name}"] = ch.timestamps
        return cls(streams, episode.duration)


@dataclass(frozen=True)
class SyncSnapshot:
    """Result of seeking all streams to one query time."""

    t: float
    indices: dict[str, int]
    matched_timestamps: dict[str, float]


def sync_snapshot(index: TimeIndex, t: float) -> SyncSnapshot:
    """Nearest sample of every stream at time t (clamped into [0, T])."""
    t = min(max(t, 0.0), index.duration)
    indices = {}
    matched = {}
    for name, ts in index.streams.items():
        i = nearest_index(ts, t)
        indices[name] = i
        matched[name] = float(ts[i])
    return SyncSnapshot(t, indices, matched)


def step(t: float, direction: int, step_size: float, duration: float) -> float:
    """One navigation step, clamped into [0, duration]."""
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    return min(max(t + direction * step_size, 0.0), duration)


@dataclass(frozen=True)
class WindowSeries:
    """Plot-ready slice of one channel: row times plus per-dimension values."""

    times: np.ndarray       # (M,)
    values: np.ndarray      # (M, dims)
    downsampled: bool


def downsample_window(
    channel: TimeSeriesChannel,
    t_from: float,
    t_to: float,
    max_points: int,
) -> WindowSeries:
    """Samples in [t_from, t_to], min-max decimated when over max_points.

    Decimation buckets the window and keeps each dimension's extreme rows per
    bucket, so spikes survive at any zoom level. The bucket count is scaled
    down by the dim count to keep the output within 2 * max_points rows.
    """
    if t_from >= t_to:
        raise ValueError(f"empty window [{t_from}, {t_to}]")
    if max_points < 2:
        raise ValueError("max_points must be >= 2")
    ts = channel.timestamps
    lo = int(np.searchsorted(ts, t_from, side="left"))
    hi = int(np.searchsorted(ts, t_to, side="right"))
    times = ts[lo:hi]
    values = channel.values[lo:hi]
    n = times.size
    if n <= max_points:
        return WindowSeries(times, values, downsampled=False)

    dims = channel.dims
    buckets = max(1, max_points // dims)
    edges = np.linspace(0, n, buckets + 1, dtype=np.int64)
    keep: set[int] = set()
    for b in range(buckets):
        s, e = int(edges[b]), int(edges[b + 1])
        if s >= e:
            continue
        block = values[s:e]
        for d in range(dims):
            keep.add(s + int(np.argmin(block[:, d])))
            keep.add(s + int(np.argmax(block[:, d])))
    order = np.array(sorted(keep), dtype=np.int64)
    return WindowSeries(times[order], values[order], downsampled=True)
