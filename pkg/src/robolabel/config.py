"""Tool configuration: a strict YAML file with a fixed key set.

Unknown keys are errors at every level. A typo in a shortcut map or a camera
declaration silently changing behaviour is worse than a hard failure at
startup.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .model import GAP_LABEL

DATASET_FORMATS = ("rlds", "video", "frames", "rosbag1", "rosbag2", "reassemble")

# Actions the UI can bind. Stepping uses the two configured speeds; the
# segment key both opens and closes a span.
SHORTCUT_ACTIONS = (
    "toggle_segment",
    "play_pause",
    "step_forward_fast",
    "step_backward_fast",
    "step_forward_slow",
    "step_backward_slow",
    "cancel_pending",
)

DEFAULT_SHORTCUTS = {
    "toggle_segment": "enter",
    "play_pause": "space",
    "step_forward_fast": "arrowright",
    "step_backward_fast": "arrowleft",
    "step_forward_slow": ".",
    "step_backward_slow": ",",
    "cancel_pending": "escape",
}

DEFAULT_NAV_FAST_STEP = 1.0
DEFAULT_NAV_SLOW_STEP = 0.033  # about one frame at 30 fps


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StreamDecl:
    """Maps a display name onto a format-specific source (topic, feature key,
    HDF5 group, or media path fragment)."""

    name: str
    source: str
    default_visible: bool = True

    def __post_init__(self):
        if not self.name:
            raise ConfigError("stream declaration needs a non-empty name")
        if not self.source:
            raise ConfigError(f"stream {self.name!r} needs a non-empty source")


@dataclass(frozen=True)
class RldsSettings:
    """How step-indexed records map onto time and pixels.

    Timing comes from a per-step timestamp feature when ``timestamp_key`` is
    set, otherwise step k happens at k / step_rate. ``step_count_key`` names
    an integer feature holding the step count for episodes where no camera or
    timestamp feature pins it down.
    """

    timestamp_key: str | None = None
    step_rate: float | None = None
    step_count_key: str | None = None
    description_key: str | None = None
    image_encodings: dict[str, str] = field(default_factory=dict)  # camera name -> encoding
    channel_dims: dict[str, int] = field(default_factory=dict)  # channel name -> dims

    def __post_init__(self):
        if self.timestamp_key is None and self.step_rate is None:
            raise ConfigError("rlds settings need timestamp_key or step_rate")
        if self.step_rate is not None and self.step_rate <= 0:
            raise ConfigError(f"rlds step_rate must be positive, got {self.step_rate}")
        for name, dims in self.channel_dims.items():
            if not isinstance(dims, int) or dims <= 0:
                raise ConfigError(f"rlds channel_dims[{name!r}] must be a positive integer")


@dataclass(frozen=True)
class ReassembleSettings:
    """Optional overrides for where cameras/channels live inside the HDF5
    file; every key is a dataset path relative to the file root."""

    cameras: dict[str, dict[str, str]] = field(default_factory=dict)
    channels: dict[str, dict[str, object]] = field(default_factory=dict)
    description_attr: str | None = None


@dataclass(frozen=True)
class ToolConfig:
    dataset_format: str
    data_path: str
    annotation_output_path: str
    label_set: tuple[str, ...]
    annotator_id: str
    cameras: tuple[StreamDecl, ...] = ()
    channels: tuple[StreamDecl, ...] = ()
    shortcuts: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_SHORTCUTS))
    nav_fast_step: float = DEFAULT_NAV_FAST_STEP
    nav_slow_step: float = DEFAULT_NAV_SLOW_STEP
    video_fps: float | None = None
    rlds: RldsSettings | None = None
    reassemble: ReassembleSettings | None = None

    def __post_init__(self):
        if self.dataset_format not in DATASET_FORMATS:
            raise ConfigError(
                f"dataset_format {self.dataset_format!r} not one of {', '.join(DATASET_FORMATS)}"
            )
        if not self.annotator_id:
            raise ConfigError("annotator_id must be non-empty")
        labels = tuple(self.label_set)
        object.__setattr__(self, "label_set", labels)
        if not labels:
            raise ConfigError("label_set must be non-empty")
        if len(set(labels)) != len(labels):
            raise ConfigError("label_set contains duplicates")
        for lab in labels:
            if not lab or lab == GAP_LABEL:
                raise ConfigError(f"label {lab!r} is empty or reserved")
        if not (self.nav_fast_step > self.nav_slow_step > 0):
            raise ConfigError(
                f"need nav_fast_step > nav_slow_step > 0, got "
                f"{self.nav_fast_step} / {self.nav_slow_step}"
            )
        if self.dataset_format in ("video", "frames"):
            if self.video_fps is None:
                raise ConfigError(f"video_fps is required for format {self.dataset_format!r}")
        if self.video_fps is not None and self.video_fps <= 0:
            raise ConfigError(f"video_fps must be positive, got {self.video_fps}")
        names = [c.name for c in self.cameras] + [c.name for c in self.channels]
        if len(set(names)) != len(names):
            raise ConfigError("camera/channel names must be unique across both lists")
        shortcuts = dict(DEFAULT_SHORTCUTS)
        shortcuts.update(self.shortcuts)
        object.__setattr__(self, "shortcuts", shortcuts)
        for action in self.shortcuts:
            if action not in SHORTCUT_ACTIONS:
                raise ConfigError(
                    f"unknown shortcut action {action!r}; known: {', '.join(SHORTCUT_ACTIONS)}"
                )
        keys = list(self.shortcuts.values())
        if len(set(keys)) != len(keys):
            dup = next(k for k in keys if keys.count(k) > 1)
            raise ConfigError(f"key {dup!r} is bound to more than one action")


# --- strict YAML loading ----------------------------------------------------


def _reject_unknown(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(sorted(map(repr, unknown)))}")


def _expect(mapping: dict, key: str, types: type | tuple, where: str, required: bool = False):
    if key not in mapping:
        if required:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return None
    value = mapping[key]
    # bool subclasses int; a stray `true` must not pass as a number
    if isinstance(value, bool) or not isinstance(value, types):
        raise ConfigError(f"{where}: {key!r} has the wrong type")
    return value


def _parse_streams(raw, where: str) -> tuple[StreamDecl, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise ConfigError(f"{where}: must be a list")
    decls = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ConfigError(f"{where}[{i}]: must be a mapping")
        _reject_unknown(item, {"name", "source", "default_visible"}, f"{where}[{i}]")
        name = _expect(item, "name", str, f"{where}[{i}]", required=True)
        source = _expect(item, "source", str, f"{where}[{i}]", required=True)
        visible = item.get("default_visible", True)
        if not isinstance(visible, bool):
            raise ConfigError(f"{where}[{i}]: 'default_visible' must be a boolean")
        decls.append(StreamDecl(name, source, visible))
    return tuple(decls)


def _parse_rlds(raw, where: str) -> RldsSettings | None:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: must be a mapping")
    allowed = {
        "timestamp_key",
        "step_rate",
        "step_count_key",
        "description_key",
        "image_encodings",
        "channel_dims",
    }
    _reject_unknown(raw, allowed, where)
    encodings = raw.get("image_encodings") or {}
    if not isinstance(encodings, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in encodings.items()
    ):
        raise ConfigError(f"{where}: image_encodings must map camera names to strings")
    dims = raw.get("channel_dims") or {}
    if not isinstance(dims, dict):
        raise ConfigError(f"{where}: channel_dims must be a mapping")
    step_rate = _expect(raw, "step_rate", (int, float), where)
    return RldsSettings(
        timestamp_key=_expect(raw, "timestamp_key", str, where),
        step_rate=float(step_rate) if step_rate is not None else None,
        step_count_key=_expect(raw, "step_count_key", str, where),
        description_key=_expect(raw, "description_key", str, where),
        image_encodings=dict(encodings),
        channel_dims=dict(dims),
    )


def _parse_reassemble(raw, where: str) -> ReassembleSettings | None:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: must be a mapping")
    _reject_unknown(raw, {"cameras", "channels", "description_attr"}, where)
    for section in ("cameras", "channels"):
        block = raw.get(section) or {}
        if not isinstance(block, dict) or not all(
            isinstance(k, str) and isinstance(v, dict) for k, v in block.items()
        ):
            raise ConfigError(f"{where}: {section} must map names to path mappings")
    return ReassembleSettings(
        cameras=dict(raw.get("cameras") or {}),
        channels=dict(raw.get("channels") or {}),
        description_attr=_expect(raw, "description_attr", str, where),
    )


TOP_LEVEL_KEYS = {
    "dataset_format",
    "data_path",
    "annotation_output_path",
    "label_set",
    "annotator_id",
    "cameras",
    "channels",
    "shortcuts",
    "nav_fast_step",
    "nav_slow_step",
    "video_fps",
    "rlds",
    "reassemble",
}


def parse_config(raw: dict, source: str = "config") -> ToolConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    _reject_unknown(raw, TOP_LEVEL_KEYS, source)

    labels = _expect(raw, "label_set", list, source, required=True)
    if not all(isinstance(x, str) for x in labels):
        raise ConfigError(f"{source}: label_set entries must be strings")

    shortcuts = raw.get("shortcuts") or {}
    if not isinstance(shortcuts, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in shortcuts.items()
    ):
        raise ConfigError(f"{source}: shortcuts must map action names to key strings")
    shortcuts = {action: key.lower() for action, key in shortcuts.items()}

    kwargs = dict(
        dataset_format=_expect(raw, "dataset_format", str, source, required=True),
        data_path=_expect(raw, "data_path", str, source, required=True),
        annotation_output_path=_expect(
            raw, "annotation_output_path", str, source, required=True
        ),
        label_set=tuple(labels),
        annotator_id=_expect(raw, "annotator_id", str, source, required=True),
        cameras=_parse_streams(raw.get("cameras"), f"{source}: cameras"),
        channels=_parse_streams(raw.get("channels"), f"{source}: channels"),
        shortcuts=shortcuts,
        rlds=_parse_rlds(raw.get("rlds"), f"{source}: rlds"),
        reassemble=_parse_reassemble(raw.get("reassemble"), f"{source}: reassemble"),
    )
    fast = _expect(raw, "nav_fast_step", (int, float), source)
    slow = _expect(raw, "nav_slow_step", (int, float), source)
    fps = _expect(raw, "video_fps", (int, float), source)
    if fast is not None:
        kwargs["nav_fast_step"] = float(fast)
    if slow is not None:
        kwargs["nav_slow_step"] = float(slow)
    if fps is not None:
        kwargs["video_fps"] = float(fps)
    return ToolConfig(**kwargs)


def load_config(path: str | Path) -> ToolConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
    if raw is None:
        raise ConfigError(f"{path}: empty config")
    return parse_config(raw, source=str(path))
