"""TFRecord container reading and minimal Example payload decoding.

A TFRecord frame is `<length:u64le><masked crc32c of length bytes:u32le>
<payload><masked crc32c of payload:u32le>`; the mask is
`rotr(crc, 15) + 0xa282ead8 (mod 2^32)`. Payloads here are serialized
`Example` protobufs: a features map from string keys to one of a bytes
list, a float list, or an int64 list. Both layers are decoded from first
principles so every frame and field is verified without a TensorFlow
dependency.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

_CRC32C_POLY = 0x82F63B78  # Castagnoli, reflected


def _make_table() -> tuple[int, ...]:
    table = []
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ (_CRC32C_POLY if crc & 1 else 0)
        table.append(crc)
    return tuple(table)


_TABLE = _make_table()


def crc32c(data: bytes) -> int:
    crc = 0xFFFFFFFF
    for b in data:
        crc = (crc >> 8) ^ _TABLE[(crc ^ b) & 0xFF]
    return crc ^ 0xFFFFFFFF


def masked_crc32c(data: bytes) -> int:
    crc = crc32c(data)
    return (((crc >> 15) | (crc << 17)) + 0xA282EAD8) & 0xFFFFFFFF


class TfRecordError(ValueError):
    """Structural problem in a TFRecord file (truncation, bad framing)."""


class TfRecordCorruptionError(TfRecordError):
    """A frame failed CRC verification; message names record and which CRC."""


@dataclass(frozen=True)
class RecordLocation:
    """Byte position of one frame inside a shard."""

    offset: int
    length: int  # payload bytes, excluding framing


def _read_frame(f, ordinal: int, path) -> bytes | None:
    header = f.read(12)
    if not header:
        return None
    if len(header) < 12:
        raise TfRecordError(f"{path}: record {ordinal}: truncated length header")
    (length,) = struct.unpack("<Q", header[:8])
    (length_crc,) = struct.unpack("<I", header[8:12])
    if masked_crc32c(header[:8]) != length_crc:
        raise TfRecordCorruptionError(
            f"{path}: record {ordinal}: length CRC mismatch"
        )
    body = f.read(length + 4)
    if len(body) < length + 4:
        raise TfRecordError(
            f"{path}: record {ordinal}: truncated payload ({len(body)} of {length + 4} bytes)"
        )
    payload = body[:length]
    (payload_crc,) = struct.unpack("<I", body[length:])
    if masked_crc32c(payload) != payload_crc:
        raise TfRecordCorruptionError(
            f"{path}: record {ordinal}: payload CRC mismatch"
        )
    return payload


def read_tfrecord_stream(path: str | Path) -> Iterator[bytes]:
    """Yield verified payloads in order; both CRCs checked before yielding."""
    with open(path, "rb") as f:
        ordinal = 0
        while True:
            payload = _read_frame(f, ordinal, path)
            if payload is None:
                return
            yield payload
            ordinal += 1


class TfRecordIndexer:
    """Header-only shard scan: payloads are skipped via the length field.

    Tracks bytes actually read so laziness is observable in tests.
    """

    def __init__(self):
        self.bytes_read = 0

    def index(self, path: str | Path) -> list[RecordLocation]:
        size = os.path.getsize(path)
        locations = []
        with open(path, "rb") as f:
            pos = 0
            ordinal = 0
            while pos < size:
                if pos + 12 > size:
                    raise TfRecordError(
                        f"{path}: record {ordinal} at offset {pos}: truncated length header"
                    )
                header = f.read(12)
                self.bytes_read += 12
                (length,) = struct.unpack("<Q", header[:8])
                (length_crc,) = struct.unpack("<I", header[8:12])
                if masked_crc32c(header[:8]) != length_crc:
                    raise TfRecordCorruptionError(
                        f"{path}: record {ordinal} at offset {pos}: length CRC mismatch"
                    )
                end = pos + 12 + length + 4
                if end > size:
                    raise TfRecordError(
                        f"{path}: record {ordinal} at offset {pos}: frame extends past EOF"
                    )
                locations.append(RecordLocation(offset=pos, length=length))
                f.seek(end)
                pos = end
                ordinal += 1
        return locations


def read_record_at(path: str | Path, location: RecordLocation, ordinal: int = 0) -> bytes:
    """Read and verify the single frame at a known offset."""
    with open(path, "rb") as f:
        f.seek(location.offset)
        payload = _read_frame(f, ordinal, path)
    if payload is None:
        raise TfRecordError(f"{path}: no frame at offset {location.offset}")
    return payload


# ---------------------------------------------------------------------------
# Protobuf Example wire decoding

_WIRE_VARINT = 0
_WIRE_I64 = 1
_WIRE_LEN = 2
_WIRE_SGROUP = 3
_WIRE_EGROUP = 4
_WIRE_I32 = 5


class MalformedProtoError(ValueError):
    """Payload violates the protobuf wire format."""


@dataclass(frozen=True)
class FeatureValue:
    """One decoded feature: kind is 'bytes', 'float', or 'int64'."""

    kind: str
    values: tuple


FeatureMap = dict[str, FeatureValue]


def _varint(buf: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= len(buf):
            raise MalformedProtoError("truncated varint")
        b = buf[pos]
        pos += 1
        result |= (b & 0x7F) << shift
        if not b & 0x80:
            return result, pos
        shift += 7
        if shift >= 70:
            raise MalformedProtoError("varint longer than 10 bytes")


def _skip(buf: bytes, pos: int, wire: int, depth: int = 0) -> int:
    if wire == _WIRE_VARINT:
        _, pos = _varint(buf, pos)
        return pos
    if wire == _WIRE_I64:
        if pos + 8 > len(buf):
            raise MalformedProtoError("truncated 64-bit field")
        return pos + 8
    if wire == _WIRE_LEN:
        n, pos = _varint(buf, pos)
        if pos + n > len(buf):
            raise MalformedProtoError("length-delimited field overruns buffer")
        return pos + n
    if wire == _WIRE_I32:
        if pos + 4 > len(buf):
            raise MalformedProtoError("truncated 32-bit field")
        return pos + 4
    if wire == _WIRE_SGROUP:
        if depth > 32:
            raise MalformedProtoError("group nesting too deep")
        while True:
            if pos >= len(buf):
                raise MalformedProtoError("unterminated group")
            tag, pos = _varint(buf, pos)
            inner = tag & 7
            if inner == _WIRE_EGROUP:
                return pos
            pos = _skip(buf, pos, inner, depth + 1)
    raise MalformedProtoError(f"invalid wire type {wire}")


def _fields(buf: bytes) -> Iterator[tuple[int, int, bytes | int]]:
    """Yield (field_number, wire_type, value); unknown wire data is skippable.

    Length-delimited values come back as bytes, varints as ints; fixed-width
    values as raw bytes of the right size.
    """
    pos = 0
    while pos < len(buf):
        tag, pos = _varint(buf, pos)
        field_no = tag >> 3
        wire = tag & 7
        if field_no == 0:
            raise MalformedProtoError("field number 0")
        if wire == _WIRE_VARINT:
            val, pos = _varint(buf, pos)
            yield field_no, wire, val
        elif wire == _WIRE_LEN:
            n, pos = _varint(buf, pos)
            if pos + n > len(buf):
                raise MalformedProtoError("length-delimited field overruns buffer")
            yield field_no, wire, buf[pos : pos + n]
            pos += n
        elif wire == _WIRE_I32:
            if pos + 4 > len(buf):
                raise MalformedProtoError("truncated 32-bit field")
            yield field_no, wire, buf[pos : pos + 4]
            pos += 4
        elif wire == _WIRE_I64:
            if pos + 8 > len(buf):
                raise MalformedProtoError("truncated 64-bit field")
            yield field_no, wire, buf[pos : pos + 8]
            pos += 8
        else:
            pos = _skip(buf, pos, wire)


def _signed64(v: int) -> int:
    return v - (1 << 64) if v >= (1 << 63) else v


def _decode_bytes_list(buf: bytes) -> tuple:
    out = []
    for field_no, wire, val in _fields(buf):
        if field_no == 1 and wire == _WIRE_LEN:
            out.append(val)
    return tuple(out)


def _decode_float_list(buf: bytes) -> tuple:
    out = []
    for field_no, wire, val in _fields(buf):
        if field_no != 1:
            continue
        if wire == _WIRE_LEN:
            if len(val) % 4:
                raise MalformedProtoError("packed float list not a multiple of 4 bytes")
            out.extend(struct.unpack(f"<{len(val) // 4}f", val))
        elif wire == _WIRE_I32:
            out.append(struct.unpack("<f", val)[0])
    return tuple(out)


def _decode_int64_list(buf: bytes) -> tuple:
    out = []
    for field_no, wire, val in _fields(buf):
        if field_no != 1:
            continue
        if wire == _WIRE_LEN:
            pos = 0
            while pos < len(val):
                v, pos = _varint(val, pos)
                out.append(_signed64(v))
        elif wire == _WIRE_VARINT:
            out.append(_signed64(val))
    return tuple(out)


def _decode_feature(buf: bytes) -> FeatureValue:
    kind, values = "bytes", ()
    for field_no, wire, val in _fields(buf):
        if wire != _WIRE_LEN:
            continue
        if field_no == 1:
            kind, values = "bytes", _decode_bytes_list(val)
        elif field_no == 2:
            kind, values = "float", _decode_float_list(val)
        elif field_no == 3:
            kind, values = "int64", _decode_int64_list(val)
    return FeatureValue(kind, values)


def decode_example(payload: bytes) -> FeatureMap:
    """Decode a serialized Example into {key: FeatureValue}.

    Unknown fields are skipped per wire-format rules; duplicate keys follow
    last-wins map semantics.
    """
    features: FeatureMap = {}
    for field_no, wire, val in _fields(payload):
        if field_no != 1 or wire != _WIRE_LEN:
            continue
        for fno, w, entry in _fields(val):
            if fno != 1 or w != _WIRE_LEN:
                continue
            key = None
            feature = FeatureValue("bytes", ())
            for efno, ew, eval_ in _fields(entry):
                if efno == 1 and ew == _WIRE_LEN:
                    try:
                        key = eval_.decode("utf-8")
                    except UnicodeDecodeError as exc:
                        raise MalformedProtoError(f"feature key not UTF-8: {exc}") from exc
                elif efno == 2 and ew == _WIRE_LEN:
                    feature = _decode_feature(eval_)
            if key is not None:
                features[key] = feature
    return features
