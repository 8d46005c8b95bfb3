"""Background chunk prefetching behind a transparent read API.

A source splits each stream into fixed-sample-count chunks. The prefetching
reader keeps a bounded resident set centered on the playhead: a read for a
resident chunk is served from memory, a miss falls back to direct I/O on the
calling thread (it never waits for the loader), and a background thread tops
up the window [center - behind, center + ahead] for every stream whenever the
playhead moves. Results are bit-identical to direct reads by construction:
both paths return the same source bytes, untouched.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from ..sync import nearest_index

DATA_CHUNK_SAMPLES = 256
FRAME_CHUNK_SAMPLES = 16
DEFAULT_AHEAD = 2
DEFAULT_BEHIND = 1


@dataclass(frozen=True)
class StreamSpec:
    """One chunked stream: timestamps give it a place on the episode clock."""

    name: str
    timestamps: np.ndarray
    chunk_size: int

    def __post_init__(self):
        if self.chunk_size <= 0:
            raise ValueError(f"stream {self.name!r}: chunk_size must be positive")

    @property
    def sample_count(self) -> int:
        return int(np.asarray(self.timestamps).size)

    @property
    def chunk_count(self) -> int:
        return -(-self.sample_count // self.chunk_size)


class ChunkSource:
    """Contract: enumerate streams, read one chunk. Reads may be slow; they
    must be safe from two threads."""

    def streams(self) -> list[StreamSpec]:
        raise NotImplementedError

    def read_chunk(self, stream: str, ordinal: int):
        raise NotImplementedError


class DirectReader:
    """The oracle path: every read goes straight to the source."""

    def __init__(self, source: ChunkSource):
        self.source = source
        self._specs = {s.name: s for s in source.streams()}

    def sample(self, stream: str, index: int):
        spec = self._specs[stream]
        if not 0 <= index < spec.sample_count:
            raise IndexError(f"stream {stream!r}: sample {index} of {spec.sample_count}")
        chunk = self.source.read_chunk(stream, index // spec.chunk_size)
        return chunk[index % spec.chunk_size]

    def read(self, stream: str, t: float):
        spec = self._specs[stream]
        return self.sample(stream, nearest_index(spec.timestamps, t))


@dataclass
class ReaderStats:
    hits: int = 0
    misses: int = 0
    served_resident: list[bool] = field(default_factory=list)


class PrefetchingReader:
    """Ring-buffer reader: bounded residency, farthest-first eviction."""

    def __init__(
        self,
        source: ChunkSource,
        capacity: int,
        ahead: int = DEFAULT_AHEAD,
        behind: int = DEFAULT_BEHIND,
    ):
        if ahead < 0 or behind < 0:
            raise ValueError("ahead and behind must be non-negative")
        if capacity < ahead + behind + 1:
            raise ValueError(
                f"capacity {capacity} cannot hold a window of {ahead + behind + 1} chunks"
            )
        self.source = source
        self.capacity = capacity
        self.ahead = ahead
        self.behind = behind
        self._specs = {s.name: s for s in source.streams()}
        self._resident: dict[tuple[str, int], object] = {}
        self._centers: dict[str, int] = {name: 0 for name in self._specs}
        self._generation = 0
        self._lock = threading.Lock()
        self._wakeup = threading.Condition(self._lock)
        self._stopped = False
        self.stats = ReaderStats()
        self._loader = threading.Thread(target=self._loader_loop, daemon=True)
        self._loader.start()

    # -- geometry ------------------------------------------------------------

    def _window(self, stream: str, center: int) -> range:
        last = self._specs[stream].chunk_count - 1
        if last < 0:
            return range(0)
        return range(max(0, center - self.behind), min(last, center + self.ahead) + 1)

    def _distance(self, key: tuple[str, int]) -> int:
        return abs(key[1] - self._centers[key[0]])

    def _prune_locked(self) -> None:
        for key in [k for k in self._resident if k[1] not in self._window(k[0], self._centers[k[0]])]:
            del self._resident[key]
        while len(self._resident) > self.capacity:
            del self._resident[max(self._resident, key=self._distance)]

    def _recenter_locked(self, t: float) -> None:
        moved = False
        for name, spec in self._specs.items():
            if spec.sample_count == 0:
                continue
            center = nearest_index(spec.timestamps, t) // spec.chunk_size
            if center != self._centers[name]:
                self._centers[name] = center
                moved = True
        if moved:
            self._generation += 1
            self._prune_locked()
            self._wakeup.notify_all()

    # -- read path -----------------------------------------------------------

    def sample(self, stream: str, index: int):
        spec = self._specs[stream]
        if not 0 <= index < spec.sample_count:
            raise IndexError(f"stream {stream!r}: sample {index} of {spec.sample_count}")
        if spec.sample_count:
            self.seek(float(spec.timestamps[index]))
        ordinal, offset = divmod(index, spec.chunk_size)
        key = (stream, ordinal)
        with self._lock:
            chunk = self._resident.get(key)
        hit = chunk is not None
        if not hit:
            # Blocking direct I/O beats waiting on the loader's queue.
            chunk = self.source.read_chunk(stream, ordinal)
            with self._lock:
                if ordinal in self._window(stream, self._centers[stream]):
                    self._resident[key] = chunk
                    self._prune_locked()
        with self._lock:
            if hit:
                self.stats.hits += 1
            else:
                self.stats.misses += 1
            self.stats.served_resident.append(hit)
        return chunk[offset]

    def read(self, stream: str, t: float):
        """Sample nearest to t; same tie rule as every other seek."""
        spec = self._specs[stream]
        if spec.sample_count == 0:
            raise IndexError(f"stream {stream!r} is empty")
        return self.sample(stream, nearest_index(spec.timestamps, t))

    def seek(self, t: float) -> None:
        """Move the playhead; the loader recenters every stream's window."""
        with self._lock:
            self._recenter_locked(t)

    # -- introspection (tests assert the invariants through these) ------------

    def resident_keys(self) -> list[tuple[str, int]]:
        with self._lock:
            return sorted(self._resident)

    def resident_count(self) -> int:
        with self._lock:
            return len(self._resident)

    # -- loader ----------------------------------------------------------------

    def _missing_by_priority(self) -> list[tuple[str, int]]:
        """Center chunks first, then ahead by distance, then behind."""
        order: list[tuple[int, int, str, int]] = []
        for name in self._specs:
            center = self._centers[name]
            for ordinal in self._window(name, center):
                if (name, ordinal) in self._resident:
                    continue
                delta = ordinal - center
                # forward distance sorts ahead of the same backward distance
                order.append((abs(delta), 0 if delta >= 0 else 1, name, ordinal))
        return [(name, ordinal) for _, _, name, ordinal in sorted(order)]

    def _loader_loop(self) -> None:
        # One pass per playhead generation: a chunk whose load failed stays
        # missing until the next seek instead of being retried in a hot loop.
        seen = -1
        while True:
            with self._lock:
                while not self._stopped and self._generation == seen:
                    self._wakeup.wait()
                if self._stopped:
                    return
                seen = self._generation
                todo = self._missing_by_priority()
            for stream, ordinal in todo:
                with self._lock:
                    if self._stopped:
                        return
                    if self._generation != seen:
                        break  # window moved; recompute priorities
                    if (stream, ordinal) in self._resident:
                        continue
                try:
                    chunk = self.source.read_chunk(stream, ordinal)
                except Exception:
                    continue  # degrade to direct reads; never corrupt results
                with self._lock:
                    if ordinal in self._window(stream, self._centers[stream]):
                        self._resident[(stream, ordinal)] = chunk
                        self._prune_locked()

    def close(self) -> None:
        with self._lock:
            self._stopped = True
            self._wakeup.notify_all()
        self._loader.join(timeout=5)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
