"""HDF5 demonstrations with one timestamp array per sensor.

The on-disk layout is a mapping, not a convention baked into code: by default
any group holding ``values`` + ``timestamps`` is a channel and any group
holding ``frames`` + ``timestamps`` is a camera, and the config can pin down
explicit dataset paths instead. Frame access runs through the ring-buffer
prefetcher; series data is read directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import h5py
import numpy as np

from ..config import ToolConfig
from ..model import CameraStream, Episode, TimeSeriesChannel
from .base import (
    DatasetBase,
    DatasetError,
    EpisodeDecodeError,
    HDF5_EXTENSIONS,
    ImageFrame,
    IndexEntry,
    has_magic,
    png_frame,
    sniff_image,
)
from .prefetch import (
    ChunkSource,
    DATA_CHUNK_SAMPLES,
    FRAME_CHUNK_SAMPLES,
    PrefetchingReader,
    StreamSpec,
)

HDF5_MAGIC = b"\x89HDF\r\n\x1a\n"


@dataclass(frozen=True)
class CameraPaths:
    frames: str
    timestamps: str


@dataclass(frozen=True)
class ChannelPaths:
    values: str
    timestamps: str
    unit: str | None = None
    dim_labels: tuple[str, ...] | None = None


@dataclass(frozen=True)
class H5Mapping:
    """Where cameras and channels live inside one file."""

    cameras: dict[str, CameraPaths] = field(default_factory=dict)
    channels: dict[str, ChannelPaths] = field(default_factory=dict)
    description_attr: str | None = "description"


def discover_mapping(h5: h5py.File) -> H5Mapping:
    """Default layout: walk the tree for values/timestamps and frames/timestamps
    sibling pairs; the group name becomes the stream name."""
    cameras: dict[str, CameraPaths] = {}
    channels: dict[str, ChannelPaths] = {}

    def visit(name: str, obj) -> None:
        if not isinstance(obj, h5py.Group):
            return
        keys = set(obj.keys())
        stream = name.rsplit("/", 1)[-1] or name
        if stream in cameras or stream in channels:
            stream = name.replace("/", ".")
        if {"values", "timestamps"} <= keys:
            channels[stream] = ChannelPaths(f"{name}/values", f"{name}/timestamps")
        elif {"frames", "timestamps"} <= keys:
            cameras[stream] = CameraPaths(f"{name}/frames", f"{name}/timestamps")

    h5.visititems(visit)
    return H5Mapping(cameras=cameras, channels=channels)


def build_mapping(config: ToolConfig, h5: h5py.File) -> H5Mapping:
    """Config wins over discovery: explicit reassemble paths, then stream
    declarations naming a group, then the default walk."""
    settings = config.reassemble
    cameras: dict[str, CameraPaths] = {}
    channels: dict[str, ChannelPaths] = {}
    description_attr = "description"

    if settings is not None:
        if settings.description_attr is not None:
            description_attr = settings.description_attr
        for name, paths in settings.cameras.items():
            cameras[name] = CameraPaths(paths["frames"], paths["timestamps"])
        for name, paths in settings.channels.items():
            labels = paths.get("dim_labels")
            channels[name] = ChannelPaths(
                paths["values"],
                paths["timestamps"],
                unit=paths.get("unit"),
                dim_labels=tuple(labels) if labels else None,
            )

    for decl in config.cameras:
        if decl.name not in cameras:
            group = decl.source.strip("/")
            cameras[decl.name] = CameraPaths(f"{group}/frames", f"{group}/timestamps")
    for decl in config.channels:
        if decl.name not in channels:
            group = decl.source.strip("/")
            channels[decl.name] = ChannelPaths(f"{group}/values", f"{group}/timestamps")

    if not cameras and not channels:
        discovered = discover_mapping(h5)
        cameras, channels = discovered.cameras, discovered.channels
    return H5Mapping(cameras=cameras, channels=channels, description_attr=description_attr)


def _dataset(h5: h5py.File, path: str, episode_id: str) -> h5py.Dataset:
    node = h5.get(path)
    if not isinstance(node, h5py.Dataset):
        raise EpisodeDecodeError(
            f"episode '{episode_id}': dataset path '{path}' does not exist in {h5.filename}"
        )
    return node


def open_reassemble(path: Path, mapping: H5Mapping, episode_id: str) -> tuple[Episode, h5py.File]:
    """Hydrate channels eagerly, leave frames on disk behind locators.

    Returns the open file too; frame reads keep using it until eviction.
    """
    h5 = h5py.File(path, "r")
    try:
        if not mapping.cameras and not mapping.channels:
            raise EpisodeDecodeError(
                f"episode '{episode_id}': no cameras or channels mapped or discovered"
            )

        raw_times: dict[str, np.ndarray] = {}
        for name, cam in mapping.cameras.items():
            raw_times[f"camera:{name}"] = np.asarray(
                _dataset(h5, cam.timestamps, episode_id)[...], dtype=np.float64
            )
        for name, ch in mapping.channels.items():
            raw_times[f"channel:{name}"] = np.asarray(
                _dataset(h5, ch.timestamps, episode_id)[...], dtype=np.float64
            )

        firsts = [t[0] for t in raw_times.values() if t.size]
        epoch = min(firsts) if firsts else 0.0

        cameras = []
        for name, cam in sorted(mapping.cameras.items()):
            times = raw_times[f"camera:{name}"] - epoch
            frames = _dataset(h5, cam.frames, episode_id)
            if frames.shape[0] != times.size:
                raise EpisodeDecodeError(
                    f"episode '{episode_id}': camera '{name}' has {frames.shape[0]} frames "
                    f"but {times.size} timestamps"
                )
            cameras.append(CameraStream(name, times, source_ref=cam.frames))

        channels = []
        for name, ch in sorted(mapping.channels.items()):
            times = raw_times[f"channel:{name}"] - epoch
            values_ds = _dataset(h5, ch.values, episode_id)
            values = np.asarray(values_ds[...], dtype=np.float64)
            if values.shape[0] != times.size:
                raise EpisodeDecodeError(
                    f"episode '{episode_id}': channel '{name}' has {values.shape[0]} rows "
                    f"but {times.size} timestamps"
                )
            unit = ch.unit
            labels = ch.dim_labels
            if unit is None:
                attr = values_ds.attrs.get("unit")
                unit = attr.decode() if isinstance(attr, bytes) else (attr or "")
            if labels is None:
                attr = values_ds.attrs.get("dim_labels")
                if attr is not None:
                    labels = tuple(
                        x.decode() if isinstance(x, bytes) else str(x) for x in attr
                    )
            channels.append(
                TimeSeriesChannel(name, times, values, unit=unit, dim_labels=labels or ())
            )

        description = None
        if mapping.description_attr and mapping.description_attr in h5.attrs:
            raw = h5.attrs[mapping.description_attr]
            description = raw.decode() if isinstance(raw, bytes) else str(raw)

        ends = [c.frame_timestamps[-1] for c in cameras if c.frame_count]
        ends += [c.timestamps[-1] for c in channels if c.sample_count]
        episode = Episode(
            id=episode_id,
            duration=float(max(ends)) if ends else 0.0,
            cameras=tuple(cameras),
            channels=tuple(channels),
            description=description,
        )
        return episode, h5
    except Exception:
        h5.close()
        raise


class H5ChunkSource(ChunkSource):
    """Chunks cut from HDF5 datasets: 16-frame chunks for cameras, 256-sample
    chunks for channels. h5py serializes concurrent reads internally."""

    def __init__(self, h5: h5py.File, episode: Episode, mapping: H5Mapping):
        self.h5 = h5
        self._specs: list[StreamSpec] = []
        self._paths: dict[str, str] = {}
        for cam in episode.cameras:
            name = f"camera:{cam.name}"
            self._specs.append(StreamSpec(name, cam.frame_timestamps, FRAME_CHUNK_SAMPLES))
            self._paths[name] = mapping.cameras[cam.name].frames
        for ch in episode.channels:
            name = f"channel:{ch.name}"
            self._specs.append(StreamSpec(name, ch.timestamps, DATA_CHUNK_SAMPLES))
            self._paths[name] = mapping.channels[ch.name].values

    def streams(self) -> list[StreamSpec]:
        return list(self._specs)

    def read_chunk(self, stream: str, ordinal: int):
        spec = next(s for s in self._specs if s.name == stream)
        lo = ordinal * spec.chunk_size
        hi = min(lo + spec.chunk_size, spec.sample_count)
        return self.h5[self._paths[stream]][lo:hi]


class ReassembleDataset(DatasetBase):
    """One .h5/.hdf5 file per episode."""

    format_name = "reassemble"

    def __init__(self, config):
        super().__init__(config)
        self._handles: dict[str, tuple[h5py.File, PrefetchingReader]] = {}

    def _scan_index(self) -> list[IndexEntry]:
        root = self.root_path
        if root.is_file():
            return [IndexEntry(root.stem, root)]
        files = sorted(p for p in root.iterdir() if p.suffix.lower() in HDF5_EXTENSIONS)
        return [IndexEntry(p.stem, p) for p in files]

    def _load_episode(self, entry: IndexEntry) -> Episode:
        path = Path(entry.locator)
        probe = h5py.File(path, "r")
        try:
            mapping = build_mapping(self.config, probe)
        finally:
            probe.close()
        episode, h5 = open_reassemble(path, mapping, entry.episode_id)
        source = H5ChunkSource(h5, episode, mapping)
        window = 1 + 2 + 1  # center + ahead + behind
        reader = PrefetchingReader(source, capacity=window * max(1, len(source.streams())))
        self._handles[entry.episode_id] = (h5, reader)
        return episode

    def _read_frame(self, episode: Episode, camera: str, index: int) -> ImageFrame:
        handle = self._handles.get(episode.id)
        if handle is None:
            raise DatasetError(f"episode {episode.id!r} has no open file handle")
        _, reader = handle
        frame = reader.sample(f"camera:{camera}", index)
        # Raw pixel arrays are 2-D or 3-D; vlen byte blobs come back 1-D.
        if isinstance(frame, np.ndarray) and frame.ndim >= 2:
            return png_frame(frame)
        return sniff_image(bytes(frame))

    def _evicted(self, episode_id: str, episode: Episode) -> None:
        handle = self._handles.pop(episode_id, None)
        if handle is not None:
            h5, reader = handle
            reader.close()
            h5.close()

    def close(self) -> None:
        for h5, reader in self._handles.values():
            reader.close()
            h5.close()
        self._handles.clear()


def detect_reassemble(path: Path) -> bool:
    if path.is_file():
        return path.suffix.lower() in HDF5_EXTENSIONS and has_magic(path, HDF5_MAGIC)
    if path.is_dir():
        files = [p for p in path.iterdir() if p.suffix.lower() in HDF5_EXTENSIONS]
        return bool(files) and has_magic(sorted(files)[0], HDF5_MAGIC)
    return False
