"""ROS1 .bag and ROS2 .db3 readers that work without a ROS installation.

Both readers produce the same intermediate shape, a list of RawTopicStream,
so topic mapping and episode assembly are shared.  Message bodies are decoded
by hand for a fixed set of types: dynamic type introspection is out of scope
and a bag is useless to the annotator anyway unless its topics map onto
cameras or numeric channels.
"""

from __future__ import annotations

import sqlite3
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import StreamDecl, ToolConfig
from ..model import CameraStream, Episode, TimeSeriesChannel
from .base import (
    DatasetBase,
    DatasetError,
    EpisodeDecodeError,
    ImageFrame,
    IndexEntry,
    ROS1_MAGIC,
    has_magic,
    png_frame,
    sniff_image,
)


class BagParseError(DatasetError):
    """Structural damage: bad magic, truncated record, missing table."""


class UnsupportedCompressionError(BagParseError):
    pass


class MessageDecodeError(DatasetError):
    """A payload does not match the schema its topic declared."""


NUMERIC_TYPES = frozenset(
    {
        "sensor_msgs/JointState",
        "geometry_msgs/WrenchStamped",
        "geometry_msgs/PoseStamped",
        "geometry_msgs/TwistStamped",
        "std_msgs/Float64MultiArray",
        "std_msgs/Float32MultiArray",
    }
)
IMAGE_TYPES = frozenset({"sensor_msgs/Image", "sensor_msgs/CompressedImage"})
SUPPORTED_TYPES = NUMERIC_TYPES | IMAGE_TYPES

WRENCH_LABELS = ("fx", "fy", "fz", "tx", "ty", "tz")
POSE_LABELS = ("x", "y", "z", "qx", "qy", "qz", "qw")
TWIST_LABELS = ("vx", "vy", "vz", "wx", "wy", "wz")


def short_type_name(type_name: str) -> str:
    """Normalise 'sensor_msgs/msg/JointState' to 'sensor_msgs/JointState'."""
    parts = type_name.split("/")
    if len(parts) == 3 and parts[1] == "msg":
        return f"{parts[0]}/{parts[2]}"
    return type_name


@dataclass
class RawTopicStream:
    """One topic's messages in receive order, still serialized."""

    topic: str
    type_name: str
    serialization: str  # "ros1" or "cdr"
    messages: list[tuple[int, bytes]] = field(default_factory=list)  # (recv ns, payload)


@dataclass(frozen=True)
class DecodedSample:
    """A numeric message: header stamp (ns, 0 when unset) plus flat vector."""

    stamp_ns: int
    vector: np.ndarray
    dim_labels: tuple[str, ...]

    @property
    def timestamp(self) -> float:
        return self.stamp_ns / 1e9


@dataclass(frozen=True)
class DecodedImage:
    """An image message; `encoded` tells raw pixels from a compressed payload."""

    stamp_ns: int
    data: bytes
    encoded: bool
    format: str  # compression format, or ROS pixel encoding for raw images
    height: int = 0
    width: int = 0
    step: int = 0


# --- ROS1 bag container ---------------------------------------------------

OP_MESSAGE = 0x02
OP_BAG_HEADER = 0x03
OP_INDEX = 0x04
OP_CHUNK = 0x05
OP_CHUNK_INFO = 0x06
OP_CONNECTION = 0x07


def _parse_fields(data: bytes, path: Path) -> dict[str, bytes]:
    """Parse a ROS1 header block: repeated u32 length + 'name=value'."""
    fields: dict[str, bytes] = {}
    pos = 0
    n = len(data)
    while pos < n:
        if pos + 4 > n:
            raise BagParseError(f"{path}: truncated header field length")
        (flen,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if pos + flen > n:
            raise BagParseError(f"{path}: header field overruns its block")
        entry = data[pos : pos + flen]
        pos += flen
        eq = entry.find(b"=")
        if eq < 0:
            raise BagParseError(f"{path}: header field without '='")
        fields[entry[:eq].decode("ascii", "replace")] = entry[eq + 1 :]
    return fields


def _iter_records(data: bytes, path: Path):
    """Yield (header fields, record data) until the buffer is exhausted."""
    pos = 0
    n = len(data)
    while pos < n:
        if pos + 4 > n:
            raise BagParseError(f"{path}: truncated record header length")
        (hlen,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if pos + hlen > n:
            raise BagParseError(f"{path}: truncated record header")
        header = _parse_fields(data[pos : pos + hlen], path)
        pos += hlen
        if pos + 4 > n:
            raise BagParseError(f"{path}: truncated record data length")
        (dlen,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if pos + dlen > n:
            raise BagParseError(f"{path}: truncated record data")
        yield header, data[pos : pos + dlen]
        pos += dlen


def _require(header: dict[str, bytes], name: str, path: Path) -> bytes:
    try:
        return header[name]
    except KeyError:
        raise BagParseError(f"{path}: record header missing field '{name}'") from None


def _decompress_chunk(compression: str, data: bytes, path: Path) -> bytes:
    if compression == "none":
        return data
    if compression == "lz4":
        try:
            import lz4.frame
        except ImportError:
            raise UnsupportedCompressionError(
                f"{path}: chunk uses lz4 compression; install the 'lz4' package to read it"
            ) from None
        return lz4.frame.decompress(data)
    if compression == "bz2":
        raise UnsupportedCompressionError(f"{path}: bz2-compressed chunks are not supported")
    raise UnsupportedCompressionError(f"{path}: unknown chunk compression '{compression}'")


def parse_ros1_bag(path: Path | str) -> list[RawTopicStream]:
    """Read every message out of a ROS1 v2.0 bag, grouped by topic.

    Index and chunk-info records are skipped; the full chunk stream is walked
    instead so damaged or index-free bags still load.
    """
    path = Path(path)
    raw = path.read_bytes()
    if not raw.startswith(ROS1_MAGIC):
        raise BagParseError(f"{path}: not a ROS1 v2.0 bag (bad magic)")

    connections: dict[int, RawTopicStream] = {}

    def handle(header: dict[str, bytes], data: bytes) -> None:
        op_raw = _require(header, "op", path)
        if len(op_raw) != 1:
            raise BagParseError(f"{path}: op field must be one byte")
        op = op_raw[0]
        if op == OP_CONNECTION:
            (conn_id,) = struct.unpack("<I", _require(header, "conn", path))
            topic = _require(header, "topic", path).decode()
            conn_fields = _parse_fields(data, path)
            type_name = conn_fields.get("type", b"").decode()
            connections[conn_id] = RawTopicStream(topic, type_name, "ros1")
        elif op == OP_MESSAGE:
            (conn_id,) = struct.unpack("<I", _require(header, "conn", path))
            sec, nsec = struct.unpack("<II", _require(header, "time", path))
            stream = connections.get(conn_id)
            if stream is None:
                raise BagParseError(f"{path}: message references unknown connection {conn_id}")
            stream.messages.append((sec * 1_000_000_000 + nsec, data))
        elif op == OP_CHUNK:
            compression = _require(header, "compression", path).decode()
            inner = _decompress_chunk(compression, data, path)
            for h, d in _iter_records(inner, path):
                handle(h, d)
        elif op in (OP_BAG_HEADER, OP_INDEX, OP_CHUNK_INFO):
            pass
        else:
            raise BagParseError(f"{path}: unknown record op 0x{op:02x}")

    for header, data in _iter_records(raw[len(ROS1_MAGIC) :], path):
        handle(header, data)

    streams = list(connections.values())
    for stream in streams:
        stream.messages.sort(key=lambda m: m[0])
    return streams


# --- ROS2 sqlite bags -----------------------------------------------------


def _read_db3(db_path: Path, streams: dict[str, RawTopicStream]) -> None:
    conn = sqlite3.connect(f"file:{db_path}?mode=ro", uri=True)
    try:
        tables = {
            row[0]
            for row in conn.execute("SELECT name FROM sqlite_master WHERE type = 'table'")
        }
        for required in ("topics", "messages"):
            if required not in tables:
                raise BagParseError(f"{db_path}: missing required table '{required}'")
        topic_by_id: dict[int, str] = {}
        for tid, name, type_name, fmt in conn.execute(
            "SELECT id, name, type, serialization_format FROM topics"
        ):
            if fmt != "cdr":
                raise BagParseError(
                    f"{db_path}: topic '{name}' uses serialization '{fmt}'; only 'cdr' is supported"
                )
            topic_by_id[tid] = name
            if name not in streams:
                streams[name] = RawTopicStream(name, short_type_name(type_name), "cdr")
        for tid, stamp, data in conn.execute(
            "SELECT topic_id, timestamp, data FROM messages ORDER BY timestamp"
        ):
            name = topic_by_id.get(tid)
            if name is None:
                raise BagParseError(f"{db_path}: message references unknown topic id {tid}")
            streams[name].messages.append((stamp, bytes(data)))
    except sqlite3.DatabaseError as exc:
        raise BagParseError(f"{db_path}: not a readable sqlite database ({exc})") from exc
    finally:
        conn.close()


def parse_ros2_bag(path: Path | str) -> list[RawTopicStream]:
    """Read a ROS2 bag directory: metadata.yaml plus one or more .db3 shards."""
    path = Path(path)
    if not path.is_dir():
        raise BagParseError(f"{path}: a ROS2 bag is a directory")
    if not (path / "metadata.yaml").is_file():
        raise BagParseError(f"{path}: missing metadata.yaml")
    db_files = sorted(path.glob("*.db3"))
    if not db_files:
        raise BagParseError(f"{path}: no .db3 database files found")
    streams: dict[str, RawTopicStream] = {}
    for db_path in db_files:
        _read_db3(db_path, streams)
    out = list(streams.values())
    for stream in out:
        stream.messages.sort(key=lambda m: m[0])
    return out


# --- message body decoding ------------------------------------------------


class _Ros1Reader:
    """ROS1 serialization: little-endian, packed, no alignment."""

    def __init__(self, payload: bytes):
        self.buf = payload
        self.pos = 0

    def _align(self, size: int) -> None:
        pass  # ROS1 packs everything

    def _take(self, size: int, align: int) -> int:
        self._align(align)
        start = self.pos
        if start + size > len(self.buf):
            raise MessageDecodeError("payload ends before the schema does")
        self.pos = start + size
        return start

    def u8(self) -> int:
        return self.buf[self._take(1, 1)]

    def u32(self) -> int:
        return struct.unpack_from("<I", self.buf, self._take(4, 4))[0]

    def i32(self) -> int:
        return struct.unpack_from("<i", self.buf, self._take(4, 4))[0]

    def f64(self) -> float:
        return struct.unpack_from("<d", self.buf, self._take(8, 8))[0]

    def string(self) -> str:
        n = self.u32()
        start = self._take(n, 1)
        return self.buf[start : start + n].decode("utf-8", "replace")

    def _elem_seq(self, fmt: str, size: int) -> np.ndarray:
        n = self.u32()
        start = self._take(size * n, size if n else 1)
        return np.frombuffer(self.buf, dtype=fmt, count=n, offset=start).astype(np.float64)

    def f64_seq(self) -> np.ndarray:
        return self._elem_seq("<f8", 8)

    def f32_seq(self) -> np.ndarray:
        return self._elem_seq("<f4", 4)

    def bytes_seq(self) -> bytes:
        n = self.u32()
        start = self._take(n, 1)
        return self.buf[start : start + n]

    def string_seq(self) -> list[str]:
        return [self.string() for _ in range(self.u32())]


class _CdrReader(_Ros1Reader):
    """XCDR1 little-endian.  Alignment is relative to the byte after the
    4-byte encapsulation header; each primitive aligns to its own size and
    a sequence aligns once to its element size."""

    def __init__(self, payload: bytes):
        if len(payload) < 4:
            raise MessageDecodeError("payload shorter than the CDR encapsulation header")
        if payload[0] != 0x00 or payload[1] != 0x01:
            raise MessageDecodeError(
                f"unsupported CDR encapsulation {payload[0]:#04x} {payload[1]:#04x}; "
                "only XCDR1 little-endian is handled"
            )
        super().__init__(payload)
        self.pos = 4

    def _align(self, size: int) -> None:
        if size > 1:
            self.pos += (-(self.pos - 4)) % size

    def string(self) -> str:
        n = self.u32()
        start = self._take(n, 1)
        raw = self.buf[start : start + n]
        # CDR strings carry a trailing NUL inside the counted length.
        if raw.endswith(b"\x00"):
            raw = raw[:-1]
        return raw.decode("utf-8", "replace")


def _new_reader(payload: bytes, serialization: str) -> _Ros1Reader:
    if serialization == "cdr":
        return _CdrReader(payload)
    if serialization == "ros1":
        return _Ros1Reader(payload)
    raise MessageDecodeError(f"unknown serialization '{serialization}'")


def _read_stamp(r: _Ros1Reader, serialization: str) -> int:
    """std_msgs/Header minus frame_id: returns the stamp in nanoseconds."""
    if serialization == "ros1":
        r.u32()  # seq, removed in ROS2
        sec = r.u32()
        nsec = r.u32()
    else:
        sec = r.i32()
        nsec = r.u32()
    r.string()  # frame_id
    return sec * 1_000_000_000 + nsec


def _multiarray_data(r: _Ros1Reader, elem_seq) -> tuple[np.ndarray, tuple[str, ...]]:
    # MultiArrayLayout: dim[] of {label, size, stride}, then data_offset.
    dims = []
    for _ in range(r.u32()):
        label = r.string()
        r.u32()  # size
        r.u32()  # stride
        dims.append(label)
    r.u32()  # data_offset
    data = elem_seq()
    if dims and len(dims) == len(data) and all(dims):
        labels = tuple(dims)
    else:
        labels = tuple(str(i) for i in range(len(data)))
    return data, labels


def decode_numeric(payload: bytes, type_name: str, serialization: str) -> DecodedSample:
    """Decode one numeric message body into a flat vector with dim labels."""
    r = _new_reader(payload, serialization)
    if type_name == "geometry_msgs/WrenchStamped":
        stamp = _read_stamp(r, serialization)
        vec = np.array([r.f64() for _ in range(6)])
        return DecodedSample(stamp, vec, WRENCH_LABELS)
    if type_name == "geometry_msgs/PoseStamped":
        stamp = _read_stamp(r, serialization)
        vec = np.array([r.f64() for _ in range(7)])
        return DecodedSample(stamp, vec, POSE_LABELS)
    if type_name == "geometry_msgs/TwistStamped":
        stamp = _read_stamp(r, serialization)
        vec = np.array([r.f64() for _ in range(6)])
        return DecodedSample(stamp, vec, TWIST_LABELS)
    if type_name == "sensor_msgs/JointState":
        stamp = _read_stamp(r, serialization)
        names = r.string_seq()
        position = r.f64_seq()
        velocity = r.f64_seq()
        effort = r.f64_seq()
        parts: list[np.ndarray] = []
        labels: list[str] = []
        for values, suffix in ((position, "pos"), (velocity, "vel"), (effort, "eff")):
            if values.size == 0:
                continue
            if names and len(names) != values.size:
                raise MessageDecodeError(
                    f"JointState has {len(names)} names but {values.size} '{suffix}' values"
                )
            parts.append(values)
            base = names if names else [f"joint{i}" for i in range(values.size)]
            labels.extend(f"{n}.{suffix}" for n in base)
        if not parts:
            raise MessageDecodeError("JointState carries no position, velocity or effort")
        return DecodedSample(stamp, np.concatenate(parts), tuple(labels))
    if type_name == "std_msgs/Float64MultiArray":
        data, labels = _multiarray_data(r, r.f64_seq)
        return DecodedSample(0, data, labels)
    if type_name == "std_msgs/Float32MultiArray":
        data, labels = _multiarray_data(r, r.f32_seq)
        return DecodedSample(0, data, labels)
    raise MessageDecodeError(f"no decoder for message type '{type_name}'")


def decode_image(payload: bytes, type_name: str, serialization: str) -> DecodedImage:
    r = _new_reader(payload, serialization)
    if type_name == "sensor_msgs/CompressedImage":
        stamp = _read_stamp(r, serialization)
        fmt = r.string()
        data = r.bytes_seq()
        return DecodedImage(stamp, data, encoded=True, format=fmt)
    if type_name == "sensor_msgs/Image":
        stamp = _read_stamp(r, serialization)
        height = r.u32()
        width = r.u32()
        encoding = r.string()
        r.u8()  # is_bigendian
        step = r.u32()
        data = r.bytes_seq()
        return DecodedImage(
            stamp, data, encoded=False, format=encoding, height=height, width=width, step=step
        )
    raise MessageDecodeError(f"no image decoder for message type '{type_name}'")


RAW_ENCODING_CHANNELS = {"rgb8": 3, "bgr8": 3, "mono8": 1, "8UC3": 3, "8UC1": 1}


def raw_image_array(image: DecodedImage) -> np.ndarray:
    """Raw sensor_msgs/Image bytes to an (H, W[, C]) uint8 array."""
    channels = RAW_ENCODING_CHANNELS.get(image.format)
    if channels is None:
        raise EpisodeDecodeError(f"unsupported raw image encoding '{image.format}'")
    row = image.width * channels
    step = image.step or row
    if step < row or len(image.data) < step * image.height:
        raise EpisodeDecodeError(
            f"image buffer too small: {len(image.data)} bytes for "
            f"{image.height}x{image.width} '{image.format}' with step {step}"
        )
    arr = np.frombuffer(image.data, dtype=np.uint8, count=step * image.height)
    arr = arr.reshape(image.height, step)[:, :row]
    if channels == 1:
        return arr.reshape(image.height, image.width)
    arr = arr.reshape(image.height, image.width, channels)
    if image.format == "bgr8":
        arr = arr[:, :, ::-1]
    return np.ascontiguousarray(arr)


# --- episode assembly -----------------------------------------------------


def _effective_ns(stamp_ns: int, recv_ns: int) -> int:
    """Header stamp wins when it is set; a zero stamp means 'unset'."""
    return stamp_ns if stamp_ns != 0 else recv_ns


def bag_to_episode(
    episode_id: str,
    streams: list[RawTopicStream],
    config: ToolConfig,
    warnings: list[str] | None = None,
) -> Episode:
    """Map decoded topics onto the episode model using the tool config.

    Topics present in the bag but absent from the config are skipped with a
    warning.  Topics named by the config but absent from the bag are also a
    warning, unless nothing matches at all, which is an error listing what
    the bag does contain.
    """
    by_topic = {s.topic: s for s in streams}
    camera_decls = {d.source: d for d in config.cameras}
    channel_decls = {d.source: d for d in config.channels}

    mapped = (set(camera_decls) | set(channel_decls)) & set(by_topic)
    if not mapped:
        available = ", ".join(sorted(by_topic)) or "(none)"
        raise EpisodeDecodeError(
            f"episode '{episode_id}': no configured topic found in bag; topics present: {available}"
        )

    def note(msg: str) -> None:
        if warnings is not None:
            warnings.append(msg)

    for topic in sorted(set(by_topic) - mapped):
        note(f"episode '{episode_id}': topic '{topic}' is not mapped by the config; skipped")
    for topic in sorted((set(camera_decls) | set(channel_decls)) - set(by_topic)):
        note(f"episode '{episode_id}': configured topic '{topic}' is absent from this bag")

    cameras: list[tuple[StreamDecl, list[int], list[DecodedImage]]] = []
    channels: list[tuple[StreamDecl, list[int], list[DecodedSample]]] = []

    for topic in sorted(mapped):
        stream = by_topic[topic]
        type_name = short_type_name(stream.type_name)
        if topic in camera_decls:
            if type_name not in IMAGE_TYPES:
                raise EpisodeDecodeError(
                    f"episode '{episode_id}': topic '{topic}' is declared as a camera "
                    f"but carries '{type_name}'"
                )
            images: list[DecodedImage] = []
            stamps: list[int] = []
            for recv_ns, payload in stream.messages:
                try:
                    img = decode_image(payload, type_name, stream.serialization)
                except MessageDecodeError as exc:
                    raise EpisodeDecodeError(
                        f"episode '{episode_id}': topic '{topic}' message "
                        f"{len(images)}: {exc}"
                    ) from exc
                images.append(img)
                stamps.append(_effective_ns(img.stamp_ns, recv_ns))
            if images:
                cameras.append((camera_decls[topic], stamps, images))
        else:
            if type_name not in NUMERIC_TYPES:
                raise EpisodeDecodeError(
                    f"episode '{episode_id}': topic '{topic}' is declared as a channel "
                    f"but carries '{type_name}'"
                )
            samples: list[DecodedSample] = []
            stamps = []
            for recv_ns, payload in stream.messages:
                try:
                    sample = decode_numeric(payload, type_name, stream.serialization)
                except MessageDecodeError as exc:
                    raise EpisodeDecodeError(
                        f"episode '{episode_id}': topic '{topic}' message "
                        f"{len(samples)}: {exc}"
                    ) from exc
                if samples and sample.vector.size != samples[0].vector.size:
                    raise EpisodeDecodeError(
                        f"episode '{episode_id}': topic '{topic}' message {len(samples)} "
                        f"has {sample.vector.size} values, expected {samples[0].vector.size}"
                    )
                samples.append(sample)
                stamps.append(_effective_ns(sample.stamp_ns, recv_ns))
            if samples:
                channels.append((channel_decls[topic], stamps, samples))

    all_first = [stamps[0] for _, stamps, _ in cameras if stamps]
    all_first += [stamps[0] for _, stamps, _ in channels if stamps]
    if not all_first:
        raise EpisodeDecodeError(f"episode '{episode_id}': every mapped topic is empty")
    epoch_ns = min(all_first)

    def rel_seconds(stamps: list[int]) -> tuple[np.ndarray, np.ndarray]:
        # Subtract the epoch while still integer ns; header stamps near 1.7e18
        # would lose sub-microsecond precision if floated first.
        out = np.array([(s - epoch_ns) / 1e9 for s in stamps], dtype=np.float64)
        order = np.argsort(out, kind="stable")
        return out, order

    camera_streams = []
    frame_store: dict[str, list[DecodedImage]] = {}
    for decl, stamps, images in cameras:
        times, order = rel_seconds(stamps)
        camera_streams.append(CameraStream(decl.name, times[order], source_ref=decl.source))
        frame_store[decl.name] = [images[i] for i in order]

    channel_streams = []
    for decl, stamps, samples in channels:
        times, order = rel_seconds(stamps)
        values = np.vstack([samples[i].vector for i in order])
        channel_streams.append(
            TimeSeriesChannel(
                decl.name, times[order], values, dim_labels=samples[0].dim_labels
            )
        )

    ends = [c.frame_timestamps[-1] for c in camera_streams if c.frame_count]
    ends += [c.timestamps[-1] for c in channel_streams if c.sample_count]
    episode = Episode(
        id=episode_id,
        duration=float(max(ends)),
        cameras=tuple(camera_streams),
        channels=tuple(channel_streams),
    )
    # Stash decoded frames where the adapters can reach them for frame_at.
    object.__setattr__(episode, "_frame_store", frame_store)
    return episode


def _frame_from_store(episode: Episode, camera: str, index: int) -> ImageFrame:
    store: dict[str, list[DecodedImage]] = getattr(episode, "_frame_store", {})
    images = store.get(camera)
    if images is None:
        raise EpisodeDecodeError(f"camera '{camera}' has no decoded frames")
    image = images[index]
    if image.encoded:
        return sniff_image(image.data)
    return png_frame(raw_image_array(image))


# --- dataset adapters -----------------------------------------------------


class Ros1BagDataset(DatasetBase):
    """One .bag file per episode; the root is a bag or a directory of bags."""

    format_name = "rosbag1"

    def _scan_index(self) -> list[IndexEntry]:
        root = self.root_path
        if root.is_file():
            return [IndexEntry(root.stem, root)]
        bags = sorted(p for p in root.iterdir() if p.suffix == ".bag" and p.is_file())
        return [IndexEntry(p.stem, p) for p in bags]

    def _load_episode(self, entry: IndexEntry) -> Episode:
        streams = parse_ros1_bag(entry.locator)
        return bag_to_episode(entry.episode_id, streams, self.config, self.warnings)

    def _read_frame(self, episode: Episode, camera: str, index: int) -> ImageFrame:
        return _frame_from_store(episode, camera, index)


def _is_ros2_bag_dir(path: Path) -> bool:
    return (path / "metadata.yaml").is_file() and any(path.glob("*.db3"))


class Ros2BagDataset(DatasetBase):
    """One bag directory (metadata.yaml + .db3) per episode."""

    format_name = "rosbag2"

    def _scan_index(self) -> list[IndexEntry]:
        root = self.root_path
        if _is_ros2_bag_dir(root):
            return [IndexEntry(root.name, root)]
        subdirs = sorted(p for p in root.iterdir() if p.is_dir() and _is_ros2_bag_dir(p))
        return [IndexEntry(p.name, p) for p in subdirs]

    def _load_episode(self, entry: IndexEntry) -> Episode:
        streams = parse_ros2_bag(entry.locator)
        return bag_to_episode(entry.episode_id, streams, self.config, self.warnings)

    def _read_frame(self, episode: Episode, camera: str, index: int) -> ImageFrame:
        return _frame_from_store(episode, camera, index)


def detect_rosbag1(path: Path) -> bool:
    if path.is_file():
        return has_magic(path, ROS1_MAGIC)
    if path.is_dir():
        bags = [p for p in path.iterdir() if p.suffix == ".bag" and p.is_file()]
        return bool(bags) and has_magic(sorted(bags)[0], ROS1_MAGIC)
    return False


def detect_rosbag2(path: Path) -> bool:
    if not path.is_dir():
        return False
    if _is_ros2_bag_dir(path):
        return True
    subdirs = [p for p in path.iterdir() if p.is_dir()]
    return bool(subdirs) and all(_is_ros2_bag_dir(p) for p in subdirs)
