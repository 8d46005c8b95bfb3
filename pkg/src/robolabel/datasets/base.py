"""Adapter contract shared by every dataset format, plus format detection.

Each format implements :class:`DatasetBase`: an index scan that touches only
metadata, per-episode hydration, and frame resolution from the opaque
``source_ref`` its own episodes carry. The registry maps format names to
(detector, adapter factory) so the service layer never sees storage details.
"""

from __future__ import annotations

import io
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from ..model import Episode
from ..sync import nearest_index

FORMATS = ("rlds", "video", "frames", "rosbag1", "rosbag2", "reassemble")

ROS1_MAGIC = b"#ROSBAG V2.0\n"
VIDEO_EXTENSIONS = {".mp4", ".avi", ".mkv"}
IMAGE_EXTENSIONS = {".jpg", ".jpeg", ".png"}
HDF5_EXTENSIONS = {".h5", ".hdf5"}


class DatasetError(Exception):
    """Base for dataset open/load failures."""


class FormatMismatchError(DatasetError):
    """Configured format disagrees with what detection found on disk."""


class UnknownEpisodeError(DatasetError, KeyError):
    def __init__(self, episode_id: str, available: Iterable[str]):
        ids = list(available)
        shown = ", ".join(ids[:8]) + ("..." if len(ids) > 8 else "")
        super().__init__(f"unknown episode {episode_id!r} (have: {shown or 'none'})")


class EpisodeDecodeError(DatasetError):
    """Episode payload failed to decode; message carries format diagnostics."""


@dataclass(frozen=True)
class ImageFrame:
    """Encoded image ready to serve."""

    media_type: str
    data: bytes


def sniff_image(data: bytes) -> ImageFrame:
    if data[:3] == b"\xff\xd8\xff":
        return ImageFrame("image/jpeg", data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return ImageFrame("image/png", data)
    raise EpisodeDecodeError("frame bytes are neither JPEG nor PNG")


def png_frame(array: np.ndarray) -> ImageFrame:
    """Re-encode a raw pixel array (H x W [x C], uint8) as PNG."""
    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(np.asarray(array, dtype=np.uint8)).save(buf, format="PNG")
    return ImageFrame("image/png", buf.getvalue())


@dataclass
class IndexEntry:
    """One episode in a dataset index; duration filled lazily when not cheap."""

    episode_id: str
    locator: object
    duration: float | None = None


class DatasetBase:
    """Template for format adapters: scan an index, hydrate episodes on demand.

    Subclasses implement ``_scan_index``, ``_load_episode`` and ``_read_frame``;
    the base class owns duration caching and a small episode cache so repeated
    UI access does not re-decode.
    """

    format_name: str = ""
    _CACHE_SIZE = 2

    def __init__(self, config):
        self.config = config
        self.root_path = Path(config.data_path)
        self.warnings: list[str] = []  # non-fatal notes (unmapped topics etc.)
        self._entries: list[IndexEntry] = []
        self._by_id: dict[str, IndexEntry] = {}
        self._cache: dict[str, Episode] = {}
        self._lock = threading.Lock()

    # -- subclass contract ---------------------------------------------------
    def _scan_index(self) -> list[IndexEntry]:
        raise NotImplementedError

    def _load_episode(self, entry: IndexEntry) -> Episode:
        raise NotImplementedError

    def _read_frame(self, episode: Episode, camera_name: str, index: int) -> ImageFrame:
        raise NotImplementedError

    def _evicted(self, episode_id: str, episode: Episode) -> None:
        """Hook: an episode left the cache; release any per-episode handles."""

    # -- template methods ----------------------------------------------------
    def open(self) -> DatasetBase:
        if not self.root_path.exists():
            raise DatasetError(f"data path does not exist: {self.root_path}")
        self._entries = self._scan_index()
        self._by_id = {e.episode_id: e for e in self._entries}
        if len(self._by_id) != len(self._entries):
            raise DatasetError("duplicate episode ids in index")
        return self

    @property
    def entries(self) -> list[IndexEntry]:
        return list(self._entries)

    def episode_ids(self) -> list[str]:
        return [e.episode_id for e in self._entries]

    def load_episode(self, episode_id: str) -> Episode:
        entry = self._by_id.get(episode_id)
        if entry is None:
            raise UnknownEpisodeError(episode_id, self._by_id)
        with self._lock:
            cached = self._cache.get(episode_id)
        if cached is not None:
            return cached
        episode = self._load_episode(entry)
        with self._lock:
            entry.duration = episode.duration
            self._cache[episode_id] = episode
            while len(self._cache) > self._CACHE_SIZE:
                victim = next(iter(self._cache))
                self._evicted(victim, self._cache.pop(victim))
        return episode

    def duration_of(self, episode_id: str) -> float | None:
        entry = self._by_id.get(episode_id)
        if entry is None:
            raise UnknownEpisodeError(episode_id, self._by_id)
        return entry.duration

    def frame_at(self, episode_id: str, camera_name: str, t: float) -> tuple[ImageFrame, int, float]:
        """Frame nearest to t: (encoded frame, frame index, matched timestamp)."""
        episode = self.load_episode(episode_id)
        camera = episode.camera(camera_name)
        if camera.frame_count == 0:
            raise EpisodeDecodeError(f"camera {camera_name!r} has no frames")
        if t < 0 or t > episode.duration:
            raise ValueError(f"t={t} outside [0, {episode.duration}]")
        index = nearest_index(camera.frame_timestamps, t)
        return self._read_frame(episode, camera_name, index), index, float(
            camera.frame_timestamps[index]
        )

    def close(self) -> None:
        pass


# ---------------------------------------------------------------------------
# Registry and detection

Detector = Callable[[Path], bool]


@dataclass(frozen=True)
class _Registration:
    format_name: str
    detector: Detector
    factory: Callable[..., DatasetBase]


_REGISTRY: dict[str, _Registration] = {}
# Detection order matters: metadata-bearing directory formats first, then
# extension-based single files, then generic media directories.
_DETECT_ORDER = ("rosbag2", "rlds", "rosbag1", "reassemble", "video", "frames")


def register_format(format_name: str, detector: Detector, factory: Callable[..., DatasetBase]) -> None:
    _REGISTRY[format_name] = _Registration(format_name, detector, factory)


def registered_formats() -> list[str]:
    return list(_REGISTRY)


def detect_format(path: str | Path) -> str:
    """Classify a path by content; returns a format name or 'unknown'.

    Pure function of directory/file content: listing order never matters.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"path does not exist: {path}")
    for name in _DETECT_ORDER:
        reg = _REGISTRY.get(name)
        if reg is not None and reg.detector(path):
            return name
    return "unknown"


def open_dataset(config) -> DatasetBase:
    """Build a handle with a fully scanned index; no bulk data is loaded."""
    declared = config.dataset_format
    reg = _REGISTRY.get(declared)
    if reg is None:
        raise DatasetError(f"no adapter registered for format {declared!r}")
    if not Path(config.data_path).exists():
        raise DatasetError(f"data path does not exist: {config.data_path}")
    detected = detect_format(config.data_path)
    if detected not in ("unknown", declared):
        raise FormatMismatchError(
            f"config declares {declared!r} but {config.data_path} looks like {detected!r}"
        )
    return reg.factory(config).open()


# -- shared detection helpers -------------------------------------------------

def has_magic(path: Path, magic: bytes) -> bool:
    try:
        with open(path, "rb") as f:
            return f.read(len(magic)) == magic
    except OSError:
        return False


def files_with_suffix(path: Path, suffixes: set[str]) -> list[Path]:
    return sorted(p for p in path.iterdir() if p.is_file() and p.suffix.lower() in suffixes)
