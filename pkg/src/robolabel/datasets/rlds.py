"""RLDS dataset adapter: TFDS shard layout with one Example per episode.

Episodes are step-indexed: every mapped feature is a per-step list (numeric
features flattened step-major), so one timestamp array serves all of them.
The feature-to-stream mapping comes from the tool config, not from TFDS
metadata; dataset_info.json is only used as a format marker.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..config import ToolConfig
from ..model import CameraStream, Episode, TimeSeriesChannel
from .base import (
    DatasetBase,
    DatasetError,
    EpisodeDecodeError,
    ImageFrame,
    IndexEntry,
    png_frame,
    sniff_image,
)
from .tfrecord import RecordLocation, TfRecordIndexer, decode_example, read_record_at

SHARD_RE = re.compile(r"\.tfrecord-(\d{5})-of-(\d{5})$")


class RldsFormatError(DatasetError):
    pass


def find_shards(root: Path, warnings: list[str] | None = None) -> list[Path]:
    """Locate *.tfrecord-NNNNN-of-MMMMM shards under a TFDS dataset dir."""
    if not (root / "dataset_info.json").is_file():
        raise RldsFormatError(f"{root}: missing dataset_info.json")
    shards = sorted(p for p in root.iterdir() if p.is_file() and SHARD_RE.search(p.name))
    if not shards:
        raise RldsFormatError(f"{root}: no .tfrecord-NNNNN-of-MMMMM shards found")
    declared = {int(SHARD_RE.search(p.name).group(2)) for p in shards}
    if warnings is not None and (len(declared) != 1 or declared.pop() != len(shards)):
        warnings.append(
            f"{root}: shard count {len(shards)} does not match the -of-MMMMM suffixes"
        )
    return shards


def build_episode_index(
    root: Path | str, warnings: list[str] | None = None
) -> list[tuple[Path, int, RecordLocation]]:
    """One (shard, ordinal, location) per record; payload bytes are never read."""
    root = Path(root)
    indexer = TfRecordIndexer()
    out: list[tuple[Path, int, RecordLocation]] = []
    for shard in find_shards(root, warnings):
        for ordinal, loc in enumerate(indexer.index(shard)):
            out.append((shard, ordinal, loc))
    return out


@dataclass(frozen=True)
class CameraMapping:
    feature_key: str
    name: str
    encoding: str | None = None  # "jpeg", "png", "raw:HxWxC", or sniff when None


@dataclass(frozen=True)
class ChannelMapping:
    feature_key: str
    name: str
    dims: int | None = None  # inferred from the step count when None


@dataclass(frozen=True)
class RldsMappingConfig:
    """Everything needed to turn one decoded Example into an Episode."""

    cameras: tuple[CameraMapping, ...] = ()
    channels: tuple[ChannelMapping, ...] = ()
    timestamp_key: str | None = None
    step_rate: float | None = None
    step_count_key: str | None = None
    description_key: str | None = None

    def __post_init__(self):
        if not self.cameras and not self.channels:
            raise RldsFormatError("mapping declares no cameras and no channels")
        if self.timestamp_key is None and self.step_rate is None:
            raise RldsFormatError("mapping needs timestamp_key or step_rate")

    @classmethod
    def from_tool_config(cls, config: ToolConfig) -> RldsMappingConfig:
        settings = config.rlds
        if settings is None:
            raise RldsFormatError(
                "rlds datasets need an 'rlds' config section (timing and encodings)"
            )
        cameras = tuple(
            CameraMapping(decl.source, decl.name, settings.image_encodings.get(decl.name))
            for decl in config.cameras
        )
        channels = tuple(
            ChannelMapping(decl.source, decl.name, settings.channel_dims.get(decl.name))
            for decl in config.channels
        )
        return cls(
            cameras=cameras,
            channels=channels,
            timestamp_key=settings.timestamp_key,
            step_rate=settings.step_rate,
            step_count_key=settings.step_count_key,
            description_key=settings.description_key,
        )


def parse_raw_encoding(encoding: str) -> tuple[int, int, int]:
    m = re.fullmatch(r"raw:(\d+)x(\d+)x(\d+)", encoding)
    if m is None:
        raise EpisodeDecodeError(
            f"unknown image encoding {encoding!r}; expected jpeg, png or raw:HxWxC"
        )
    return int(m.group(1)), int(m.group(2)), int(m.group(3))


def _feature(fm, key: str, episode_id: str):
    value = fm.get(key)
    if value is None:
        available = ", ".join(sorted(fm)) or "(none)"
        raise EpisodeDecodeError(
            f"episode '{episode_id}': feature {key!r} not present; available: {available}"
        )
    return value


def _numeric_values(value, key: str, episode_id: str) -> np.ndarray:
    if value.kind not in ("float", "int64"):
        raise EpisodeDecodeError(
            f"episode '{episode_id}': feature {key!r} holds {value.kind}, expected numbers"
        )
    return np.asarray(value.values, dtype=np.float64)


def rlds_episode(episode_id: str, payload: bytes, mapping: RldsMappingConfig) -> Episode:
    """Materialize one Example into flat arrays; nothing dataset-wide survives."""
    fm = decode_example(payload)

    # Pin down the step count: timestamp feature, explicit count feature,
    # first camera length, or a channel with declared dims, in that order.
    timestamps: np.ndarray | None = None
    if mapping.timestamp_key is not None:
        value = _feature(fm, mapping.timestamp_key, episode_id)
        timestamps = _numeric_values(value, mapping.timestamp_key, episode_id)
        steps = timestamps.size
    elif mapping.step_count_key is not None:
        value = _feature(fm, mapping.step_count_key, episode_id)
        counts = _numeric_values(value, mapping.step_count_key, episode_id)
        if counts.size != 1 or counts[0] < 0 or counts[0] != int(counts[0]):
            raise EpisodeDecodeError(
                f"episode '{episode_id}': feature {mapping.step_count_key!r} "
                "is not a scalar step count"
            )
        steps = int(counts[0])
    elif mapping.cameras:
        key = mapping.cameras[0].feature_key
        steps = len(_feature(fm, key, episode_id).values)
    else:
        for cm in mapping.channels:
            if cm.dims is not None:
                value = _feature(fm, cm.feature_key, episode_id)
                flat = len(value.values)
                if flat % cm.dims:
                    raise EpisodeDecodeError(
                        f"episode '{episode_id}': feature {cm.feature_key!r} has {flat} "
                        f"values, not divisible by declared dims {cm.dims}"
                    )
                steps = flat // cm.dims
                break
        else:
            raise EpisodeDecodeError(
                f"episode '{episode_id}': cannot determine the step count; configure "
                "a timestamp_key, step_count_key, camera, or channel dims"
            )

    if timestamps is None:
        timestamps = np.arange(steps, dtype=np.float64) / float(mapping.step_rate)
    elif steps:
        # Feature timestamps may be absolute; episode time starts at zero.
        timestamps = timestamps - timestamps[0]

    channels = []
    for cm in mapping.channels:
        value = _feature(fm, cm.feature_key, episode_id)
        flat = _numeric_values(value, cm.feature_key, episode_id)
        if steps == 0:
            if flat.size:
                raise EpisodeDecodeError(
                    f"episode '{episode_id}': feature {cm.feature_key!r} has values "
                    "but the step count is 0"
                )
            dims = cm.dims or 1
        elif flat.size % steps:
            raise EpisodeDecodeError(
                f"episode '{episode_id}': feature {cm.feature_key!r} has {flat.size} "
                f"values, not a multiple of the step count {steps}"
            )
        else:
            dims = flat.size // steps
            if cm.dims is not None and dims != cm.dims:
                raise EpisodeDecodeError(
                    f"episode '{episode_id}': feature {cm.feature_key!r} has {dims} dims "
                    f"per step, config declares {cm.dims}"
                )
        channels.append(
            TimeSeriesChannel(cm.name, timestamps, flat.reshape(steps, dims))
        )

    cameras = []
    frame_store: dict[str, list] = {}
    for cam in mapping.cameras:
        value = _feature(fm, cam.feature_key, episode_id)
        if value.kind != "bytes":
            raise EpisodeDecodeError(
                f"episode '{episode_id}': camera feature {cam.feature_key!r} holds "
                f"{value.kind}, expected bytes"
            )
        frames = list(value.values)
        if len(frames) != steps:
            raise EpisodeDecodeError(
                f"episode '{episode_id}': camera feature {cam.feature_key!r} has "
                f"{len(frames)} frames for {steps} steps"
            )
        if cam.encoding is not None and cam.encoding.startswith("raw:"):
            h, w, c = parse_raw_encoding(cam.encoding)
            decoded = []
            for i, blob in enumerate(frames):
                if len(blob) != h * w * c:
                    raise EpisodeDecodeError(
                        f"episode '{episode_id}': camera {cam.name!r} frame {i} has "
                        f"{len(blob)} bytes, raw {cam.encoding[4:]} needs {h * w * c}"
                    )
                arr = np.frombuffer(blob, dtype=np.uint8).reshape(h, w, c)
                decoded.append(arr[:, :, 0] if c == 1 else arr)
            frame_store[cam.name] = decoded
        elif cam.encoding in (None, "jpeg", "png"):
            frame_store[cam.name] = frames
        else:
            parse_raw_encoding(cam.encoding)  # raises with the full message
        cameras.append(CameraStream(cam.name, timestamps, source_ref=cam.feature_key))

    description = None
    if mapping.description_key is not None:
        value = _feature(fm, mapping.description_key, episode_id)
        if value.kind != "bytes" or not value.values:
            raise EpisodeDecodeError(
                f"episode '{episode_id}': description feature "
                f"{mapping.description_key!r} is not a non-empty bytes feature"
            )
        description = value.values[0].decode("utf-8", "replace")

    duration = float(timestamps[-1]) if steps else 0.0
    episode = Episode(
        id=episode_id,
        duration=duration,
        cameras=tuple(cameras),
        channels=tuple(channels),
        description=description,
    )
    object.__setattr__(episode, "_frame_store", frame_store)
    return episode


class RldsDataset(DatasetBase):
    """One TFRecord record per episode, indexed without touching payloads."""

    format_name = "rlds"

    def _scan_index(self) -> list[IndexEntry]:
        entries = []
        for shard, ordinal, loc in build_episode_index(self.root_path, self.warnings):
            entries.append(IndexEntry(f"{shard.name}:{ordinal}", (shard, ordinal, loc)))
        return entries

    def _load_episode(self, entry: IndexEntry) -> Episode:
        shard, ordinal, loc = entry.locator
        payload = read_record_at(shard, loc, ordinal)
        mapping = RldsMappingConfig.from_tool_config(self.config)
        return rlds_episode(entry.episode_id, payload, mapping)

    def _read_frame(self, episode: Episode, camera: str, index: int) -> ImageFrame:
        frames = getattr(episode, "_frame_store", {}).get(camera)
        if frames is None:
            raise EpisodeDecodeError(f"camera {camera!r} has no decoded frames")
        frame = frames[index]
        if isinstance(frame, np.ndarray):
            return png_frame(frame)
        return sniff_image(frame)


def detect_rlds(path: Path) -> bool:
    if not path.is_dir():
        return False
    if not (path / "dataset_info.json").is_file():
        return False
    return any(SHARD_RE.search(p.name) for p in path.iterdir() if p.is_file())
