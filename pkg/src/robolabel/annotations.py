"""Annotation session state machine and JSON persistence.

A session tracks one annotator's segments for one episode: a start mark is
set, the user navigates, and closing the mark commits a labeled segment.
Committed state persists as one JSON file per dataset-and-annotator with a
canonical byte layout (sorted keys, fixed-precision decimal seconds), so
save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import AnnotationSegment, EpisodeAnnotation, find_overlap, validate_segment

FILE_VERSION = "1.0"


class SessionStateError(RuntimeError):
    """Raised on begin/end calls that violate the session state machine."""


class AnnotationSchemaError(ValueError):
    """Annotation file fails schema validation; message carries the field path."""


class AnnotationSession:
    """Mutable per-episode editing state; committed segments stay valid."""

    def __init__(
        self,
        episode_id: str,
        annotator_id: str,
        duration: float,
        label_set: tuple[str, ...],
        segments: tuple[AnnotationSegment, ...] = (),
        description: str | None = None,
    ):
        self.episode_id = episode_id
        self.annotator_id = annotator_id
        self.duration = float(duration)
        self.label_set = tuple(label_set)
        self.description = description
        self.pending_start: float | None = None
        self.dirty = False
        self._segments: list[AnnotationSegment] = []
        for i, seg in enumerate(sorted(segments, key=lambda s: (s.start, s.end))):
            self._commit(seg, context=f"segment {i}")
        self.dirty = False

    @property
    def segments(self) -> tuple[AnnotationSegment, ...]:
        return tuple(self._segments)

    def to_annotation(self) -> EpisodeAnnotation:
        return EpisodeAnnotation(self.episode_id, self.annotator_id, self.segments)

    def begin_segment(self, t: float) -> None:
        if self.pending_start is not None:
            raise SessionStateError(
                f"segment already started at {self.pending_start}; end or cancel it first"
            )
        if t < 0 or t > self.duration:
            raise ValueError(f"start {t} outside [0, {self.duration}]")
        self.pending_start = float(t)

    def cancel_pending(self) -> None:
        self.pending_start = None

    def end_segment(self, t: float, label: str, success: bool = True) -> AnnotationSegment:
        """Commit the pending span; endpoints normalize to (min, max)."""
        if self.pending_start is None:
            raise SessionStateError("no segment started")
        start, end = sorted((self.pending_start, float(t)))
        seg = AnnotationSegment(start, end, label, success)
        self._commit(seg, context="pending segment")
        self.pending_start = None
        self.dirty = True
        return seg

    def edit_segment(self, index: int, **patch) -> AnnotationSegment:
        """Patch start/end/label/success; a rejected patch leaves state unchanged."""
        self._check_index(index)
        old = self._segments[index]
        allowed = {"start", "end", "label", "success"}
        unknown = set(patch) - allowed
        if unknown:
            raise ValueError(f"unknown patch fields: {sorted(unknown)}")
        new = AnnotationSegment(
            start=float(patch.get("start", old.start)),
            end=float(patch.get("end", old.end)),
            label=patch.get("label", old.label),
            success=bool(patch.get("success", old.success)),
        )
        rest = self._segments[:index] + self._segments[index + 1 :]
        self._validate(new, rest, context=f"segment {index}")
        self._segments = sorted(rest + [new], key=lambda s: (s.start, s.end))
        self.dirty = True
        return new

    def delete_segment(self, index: int) -> None:
        self._check_index(index)
        del self._segments[index]
        self.dirty = True

    def replace_segments(self, segments: tuple[AnnotationSegment, ...]) -> None:
        """Wholesale replacement (gateway PUT); validates every segment."""
        fresh: list[AnnotationSegment] = []
        for i, seg in enumerate(sorted(segments, key=lambda s: (s.start, s.end))):
            self._validate(seg, fresh, context=f"segment {i}")
            fresh.append(seg)
        self._segments = fresh
        self.dirty = True

    def _check_index(self, index: int) -> None:
        if not 0 <= index < len(self._segments):
            raise IndexError(f"segment index {index} out of range ({len(self._segments)} segments)")

    def _validate(self, seg, others, context: str) -> None:
        report = validate_segment(seg, self.duration, self.label_set)
        if report:
            raise ValueError(f"{context}: {'; '.join(report)}")
        pair = find_overlap(tuple(others) + (seg,))
        if pair is not None:
            other = pair[0] if pair[1] == seg else pair[1]
            raise ValueError(
                f"{context}: ({seg.start}, {seg.end}) overlaps committed "
                f"({other.start}, {other.end}, {other.label!r})"
            )

    def _commit(self, seg, context: str) -> None:
        self._validate(seg, self._segments, context)
        self._segments = sorted(self._segments + [seg], key=lambda s: (s.start, s.end))


@dataclass
class EpisodeRecord:
    segments: tuple[AnnotationSegment, ...] = ()
    description: str | None = None


@dataclass
class AnnotationFile:
    """On-disk unit: one dataset, one annotator, all annotated episodes."""

    dataset: str
    annotator: str
    episodes: dict[str, EpisodeRecord] = field(default_factory=dict)
    version: str = FILE_VERSION


def format_seconds(x: float) -> str:
    """Canonical decimal rendering: shortest exact form, >= 6 fractional digits."""
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"non-finite time {x}")
    s = np.format_float_positional(x, unique=True, trim="-")
    if "." not in s:
        s += "."
    whole, frac = s.split(".")
    return f"{whole or '0'}.{frac.ljust(6, '0')}"


def _json_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def canonical_segment(seg: AnnotationSegment) -> str:
    return (
        "{"
        f'"end":{format_seconds(seg.end)},'
        f'"label":{_json_str(seg.label)},'
        f'"start":{format_seconds(seg.start)},'
        f'"success":{"true" if seg.success else "false"}'
        "}"
    )


def canonical_episode(record: EpisodeRecord) -> str:
    parts = []
    if record.description is not None:
        parts.append(f'"description":{_json_str(record.description)}')
    segs = ",".join(canonical_segment(s) for s in record.segments)
    parts.append(f'"segments":[{segs}]')
    return "{" + ",".join(parts) + "}"


def canonical_bytes(f: AnnotationFile) -> bytes:
    """Byte-exact serialization: keys sorted, compact separators, UTF-8."""
    episodes = ",".join(
        f"{_json_str(eid)}:{canonical_episode(f.episodes[eid])}"
        for eid in sorted(f.episodes)
    )
    text = (
        "{"
        f'"annotator":{_json_str(f.annotator)},'
        f'"dataset":{_json_str(f.dataset)},'
        f'"episodes":{{{episodes}}},'
        f'"version":{_json_str(f.version)}'
        "}\n"
    )
    return text.encode("utf-8")


def save_annotations(f: AnnotationFile, path: str | Path) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(canonical_bytes(f))
    os.replace(tmp, path)


def _expect(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise AnnotationSchemaError(f"{path}: {msg}")


def load_annotations(path: str | Path) -> AnnotationFile:
    """Parse and validate an annotation file; errors name the field path."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise AnnotationSchemaError(f"$: not valid JSON ({exc})") from exc
    _expect(isinstance(doc, dict), "$", "expected an object")
    unknown = set(doc) - {"version", "dataset", "annotator", "episodes"}
    _expect(not unknown, "$", f"unknown keys {sorted(unknown)}")
    for key in ("version", "dataset", "annotator", "episodes"):
        _expect(key in doc, f"$.{key}", "missing")
    _expect(
        doc["version"] == FILE_VERSION,
        "$.version",
        f"unsupported version {doc['version']!r} (expected {FILE_VERSION!r})",
    )
    _expect(isinstance(doc["dataset"], str), "$.dataset", "expected string")
    _expect(isinstance(doc["annotator"], str), "$.annotator", "expected string")
    _expect(isinstance(doc["episodes"], dict), "$.episodes", "expected object")

    episodes: dict[str, EpisodeRecord] = {}
    for eid, ep in doc["episodes"].items():
        epath = f"$.episodes[{eid!r}]"
        _expect(isinstance(ep, dict), epath, "expected object")
        unknown = set(ep) - {"description", "segments"}
        _expect(not unknown, epath, f"unknown keys {sorted(unknown)}")
        _expect("segments" in ep, f"{epath}.segments", "missing")
        _expect(isinstance(ep["segments"], list), f"{epath}.segments", "expected array")
        desc = ep.get("description")
        if desc is not None:
            _expect(isinstance(desc, str), f"{epath}.description", "expected string")
        segments = []
        for i, raw in enumerate(ep["segments"]):
            spath = f"{epath}.segments[{i}]"
            _expect(isinstance(raw, dict), spath, "expected object")
            unknown = set(raw) - {"start", "end", "label", "success"}
            _expect(not unknown, spath, f"unknown keys {sorted(unknown)}")
            for key, typ, want in (
                ("start", (int, float), "number"),
                ("end", (int, float), "number"),
                ("label", str, "string"),
                ("success", bool, "boolean"),
            ):
                _expect(key in raw, f"{spath}.{key}", "missing")
                ok = isinstance(raw[key], typ) and not (typ != bool and isinstance(raw[key], bool))
                if ok and want == "number":
                    ok = np.isfinite(raw[key])
                _expect(ok, f"{spath}.{key}", f"expected finite {want}" if want == "number" else f"expected {want}")
            seg = AnnotationSegment(
                float(raw["start"]), float(raw["end"]), raw["label"], raw["success"]
            )
            report = validate_segment(seg, duration=float("inf"))
            _expect(not report, spath, "; ".join(report) if report else "")
            segments.append(seg)
        ordered = tuple(sorted(segments, key=lambda s: (s.start, s.end)))
        pair = find_overlap(ordered)
        _expect(
            pair is None,
            f"{epath}.segments",
            "" if pair is None else
            f"overlap between ({pair[0].start}, {pair[0].end}) and ({pair[1].start}, {pair[1].end})",
        )
        episodes[eid] = EpisodeRecord(segments=ordered, description=desc)
    return AnnotationFile(
        dataset=doc["dataset"],
        annotator=doc["annotator"],
        episodes=episodes,
        version=doc["version"],
    )


def validate_annotation_file(path: str | Path) -> list[str]:
    """Report-style wrapper around load_annotations for the validate command."""
    try:
        load_annotations(path)
    except AnnotationSchemaError as exc:
        return [str(exc)]
    except OSError as exc:
        return [f"cannot read {path}: {exc}"]
    return []
