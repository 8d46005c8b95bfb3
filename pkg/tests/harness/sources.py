"""In-memory chunk sources for exercising the prefetching reader."""

from __future__ import annotations

import threading
import time

import numpy as np

from robolabel.datasets.prefetch import ChunkSource, StreamSpec


class ArraySource(ChunkSource):
    """In-memory source; optional per-read sleep simulates slow storage."""

    def __init__(self, streams: dict[str, np.ndarray], chunk_size=8, delay=0.0):
        self.data = streams
        self.chunk_size = chunk_size
        self.delay = delay
        self.reads: list[tuple[str, int]] = []
        self._lock = threading.Lock()

    def streams(self) -> list[StreamSpec]:
        return [
            StreamSpec(name, np.arange(len(vals), dtype=np.float64) * 0.1, self.chunk_size)
            for name, vals in sorted(self.data.items())
        ]

    def read_chunk(self, stream: str, ordinal: int):
        if self.delay:
            time.sleep(self.delay)
        with self._lock:
            self.reads.append((stream, ordinal))
        lo = ordinal * self.chunk_size
        return self.data[stream][lo : lo + self.chunk_size]
