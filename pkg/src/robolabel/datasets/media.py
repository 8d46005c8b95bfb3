"""Video files and pre-extracted frame directories.

A "media leaf" is the unit both layouts share: a single video file, or a
directory of image files (one file per frame). Layout detection then only
reasons about leaves: a leaf is one episode-camera, a directory of leaves is
a flat dataset, and a directory of leaf-holding subdirectories names its
cameras after the subdirectories.

Video decoding sits behind a small seam; the core never touches codecs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .base import (
    DatasetBase,
    DatasetError,
    EpisodeDecodeError,
    IMAGE_EXTENSIONS,
    ImageFrame,
    IndexEntry,
    VIDEO_EXTENSIONS,
    png_frame,
    sniff_image,
)
from ..model import CameraStream, Episode

DEFAULT_CAMERA = "camera"


class LayoutAmbiguityError(DatasetError):
    pass


_NUM_RE = re.compile(r"(\d+)")


def natural_key(name: str) -> tuple:
    """frame_2 sorts before frame_10."""
    return tuple(int(part) if part.isdigit() else part for part in _NUM_RE.split(name))


def is_video_file(path: Path) -> bool:
    return path.is_file() and path.suffix.lower() in VIDEO_EXTENSIONS


def is_frames_dir(path: Path) -> bool:
    """A leaf frame directory: holds image files directly and no subdirectories."""
    if not path.is_dir():
        return False
    entries = list(path.iterdir())
    if any(e.is_dir() for e in entries):
        return False
    return any(e.suffix.lower() in IMAGE_EXTENSIONS for e in entries)


def is_media_leaf(path: Path) -> bool:
    return is_video_file(path) or is_frames_dir(path)


def leaf_id(path: Path) -> str:
    return path.stem if path.is_file() else path.name


@dataclass(frozen=True)
class MediaEntry:
    episode_id: str
    sources: dict[str, Path]  # camera name -> leaf


@dataclass(frozen=True)
class MediaLayout:
    kind: str  # single_file | flat_per_episode | multi_camera_subdirs
    episodes: tuple[MediaEntry, ...]


def detect_layout(path: str | Path) -> MediaLayout:
    """Classify by content only; listing order never changes the result.

    Non-media files are skipped. Mixing leaves with leaf-holding
    subdirectories in one directory is ambiguous and rejected.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"path does not exist: {path}")

    if is_media_leaf(path):
        return MediaLayout("single_file", (MediaEntry(leaf_id(path), {DEFAULT_CAMERA: path}),))
    if path.is_file():
        raise DatasetError(f"{path}: not a recognized media file")

    children = sorted(path.iterdir(), key=lambda p: natural_key(p.name))
    leaves = [c for c in children if is_media_leaf(c)]
    camera_dirs = [
        c
        for c in children
        if c.is_dir() and not is_frames_dir(c) and any(is_media_leaf(g) for g in c.iterdir())
    ]

    if leaves and camera_dirs:
        raise LayoutAmbiguityError(
            f"{path}: mixes media leaves ({leaves[0].name}, ...) with camera "
            f"subdirectories ({camera_dirs[0].name}, ...); point the config at one level"
        )
    if leaves:
        episodes = tuple(
            MediaEntry(leaf_id(leaf), {DEFAULT_CAMERA: leaf})
            for leaf in sorted(leaves, key=lambda p: leaf_id(p))
        )
        return MediaLayout("flat_per_episode", episodes)
    if camera_dirs:
        per_camera: dict[str, dict[str, Path]] = {}
        for cam_dir in camera_dirs:
            cam_leaves = [g for g in cam_dir.iterdir() if is_media_leaf(g)]
            per_camera[cam_dir.name] = {leaf_id(g): g for g in cam_leaves}
        id_sets = {cam: set(eps) for cam, eps in per_camera.items()}
        union = sorted(set().union(*id_sets.values()))
        for cam, ids in sorted(id_sets.items()):
            missing = sorted(set(union) - ids)
            if missing:
                raise DatasetError(
                    f"{path}: camera {cam!r} is missing episode(s) {', '.join(missing)}; "
                    "every episode must appear under every camera"
                )
        episodes = tuple(
            MediaEntry(eid, {cam: per_camera[cam][eid] for cam in sorted(per_camera)})
            for eid in union
        )
        return MediaLayout("multi_camera_subdirs", episodes)
    raise DatasetError(f"{path}: no media files found")


def media_kind(layout: MediaLayout) -> str:
    """'video' or 'frames'; a dataset mixing both is rejected."""
    kinds = set()
    for entry in layout.episodes:
        for leaf in entry.sources.values():
            kinds.add("video" if leaf.is_file() else "frames")
    if len(kinds) != 1:
        raise LayoutAmbiguityError("dataset mixes video files and frame directories")
    return kinds.pop()


# --- decoder seam -----------------------------------------------------------


class VideoDecoder:
    """Minimal contract: count frames, decode one frame by index."""

    def frame_count(self, path: Path) -> int:
        raise NotImplementedError

    def read_frame(self, path: Path, index: int) -> np.ndarray:
        raise NotImplementedError


class OpenCvDecoder(VideoDecoder):
    def _capture(self, path: Path):
        try:
            import cv2
        except ImportError:
            raise DatasetError(
                "video decoding needs the 'video' extra (opencv-python-headless)"
            ) from None
        cap = cv2.VideoCapture(str(path))
        if not cap.isOpened():
            raise EpisodeDecodeError(f"{path}: cannot open video")
        return cv2, cap

    def frame_count(self, path: Path) -> int:
        cv2, cap = self._capture(path)
        try:
            return int(cap.get(cv2.CAP_PROP_FRAME_COUNT))
        finally:
            cap.release()

    def read_frame(self, path: Path, index: int) -> np.ndarray:
        cv2, cap = self._capture(path)
        try:
            cap.set(cv2.CAP_PROP_POS_FRAMES, index)
            ok, frame = cap.read()
            if not ok:
                raise EpisodeDecodeError(f"{path}: cannot decode frame {index}")
            return frame[:, :, ::-1]  # BGR to RGB
        finally:
            cap.release()


_decoder: VideoDecoder = OpenCvDecoder()


def set_video_decoder(decoder: VideoDecoder) -> VideoDecoder:
    """Swap the video decoder (tests inject a synthetic one); returns the old."""
    global _decoder
    previous = _decoder
    _decoder = decoder
    return previous


def list_frame_files(leaf: Path) -> list[Path]:
    files = [p for p in leaf.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS]
    return sorted(files, key=lambda p: natural_key(p.name))


def leaf_frame_count(leaf: Path) -> int:
    if leaf.is_file():
        return _decoder.frame_count(leaf)
    return len(list_frame_files(leaf))


def media_episode(entry: MediaEntry, fps: float | None) -> Episode:
    """Cameras only; frame k happens at k / fps. Duration comes from the
    longest camera, shorter ones clamp to their last frame on seek."""
    if fps is None or fps <= 0:
        raise DatasetError(f"media datasets need video_fps > 0, got {fps}")
    cameras = []
    counts = []
    for cam_name in sorted(entry.sources):
        leaf = entry.sources[cam_name]
        count = leaf_frame_count(leaf)
        if count <= 0:
            raise EpisodeDecodeError(f"{leaf}: no frames")
        counts.append(count)
        timestamps = np.arange(count, dtype=np.float64) / fps
        cameras.append(CameraStream(cam_name, timestamps, source_ref=leaf))
    duration = (max(counts) - 1) / fps
    return Episode(id=entry.episode_id, duration=duration, cameras=tuple(cameras))


class MediaDataset(DatasetBase):
    expected_kind = ""

    def _scan_index(self) -> list[IndexEntry]:
        layout = detect_layout(self.root_path)
        kind = media_kind(layout)
        if self.expected_kind and kind != self.expected_kind:
            raise DatasetError(
                f"{self.root_path}: holds {kind} media but the config says "
                f"{self.expected_kind!r}"
            )
        return [IndexEntry(e.episode_id, e) for e in layout.episodes]

    def _load_episode(self, entry: IndexEntry) -> Episode:
        return media_episode(entry.locator, self.config.video_fps)

    def _read_frame(self, episode: Episode, camera: str, index: int) -> ImageFrame:
        leaf: Path = episode.camera(camera).source_ref
        if leaf.is_file():
            try:
                return png_frame(_decoder.read_frame(leaf, index))
            except EpisodeDecodeError:
                raise
            except Exception as exc:
                raise EpisodeDecodeError(f"{leaf}: frame {index}: {exc}") from exc
        files = list_frame_files(leaf)
        try:
            return sniff_image(files[index].read_bytes())
        except (OSError, DatasetError) as exc:
            raise EpisodeDecodeError(f"{files[index]}: frame {index}: {exc}") from exc


class VideoDataset(MediaDataset):
    format_name = "video"
    expected_kind = "video"


class FramesDataset(MediaDataset):
    format_name = "frames"
    expected_kind = "frames"


def _detect_media(path: Path, kind: str) -> bool:
    try:
        layout = detect_layout(path)
        return media_kind(layout) == kind
    except (DatasetError, FileNotFoundError):
        return False


def detect_video(path: Path) -> bool:
    return _detect_media(path, "video")


def detect_frames(path: Path) -> bool:
    return _detect_media(path, "frames")
