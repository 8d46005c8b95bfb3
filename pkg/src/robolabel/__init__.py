"""Time-synchronized episode annotation for robot demonstration datasets.

Core pieces: dataset adapters that normalize heterogeneous recordings into
:class:`~robolabel.model.Episode` objects, a sync engine for nearest-sample
seeking, an annotation store with a byte-canonical file format, agreement
metrics, and an HTTP gateway for the browser UI.
"""

from __future__ import annotations

from .config import ConfigError, StreamDecl, ToolConfig, load_config
from .model import (
    GAP_LABEL,
    AnnotationSegment,
    CameraStream,
    Episode,
    EpisodeAnnotation,
    LabelTimeline,
    OverlapError,
    TimeSeriesChannel,
    label_at,
    timeline_to_segments,
    to_timeline,
    validate_segment,
)
from .sync import TimeIndex, downsample_window, nearest_index, step, sync_snapshot

__version__ = "0.1.0"

__all__ = [
    "GAP_LABEL",
    "AnnotationSegment",
    "CameraStream",
    "ConfigError",
    "Episode",
    "EpisodeAnnotation",
    "LabelTimeline",
    "OverlapError",
    "StreamDecl",
    "TimeIndex",
    "TimeSeriesChannel",
    "ToolConfig",
    "downsample_window",
    "label_at",
    "load_config",
    "nearest_index",
    "step",
    "sync_snapshot",
    "timeline_to_segments",
    "to_timeline",
    "validate_segment",
    "__version__",
]
