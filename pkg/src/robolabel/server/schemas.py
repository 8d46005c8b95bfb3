"""Request/response bodies for the HTTP gateway.

Pydantic stops at shape checking; semantic validation (labels, overlap,
duration bounds) happens against the episode in the route handlers so the
error can carry a field path.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class StreamDeclModel(BaseModel):
    name: str
    source: str
    default_visible: bool = True


class ConfigResponse(BaseModel):
    dataset_format: str
    dataset: str
    annotator_id: str
    label_set: list[str]
    shortcuts: dict[str, str]
    nav_fast_step: float
    nav_slow_step: float
    video_fps: float | None = None
    cameras: list[StreamDeclModel]
    channels: list[StreamDeclModel]


class EpisodeSummary(BaseModel):
    id: str
    duration: float | None = None  # unknown until first load for some formats


class CameraMeta(BaseModel):
    name: str
    frame_count: int


class ChannelMeta(BaseModel):
    name: str
    dims: int
    sample_count: int
    unit: str = ""
    dim_labels: list[str]
    default_visible: bool = True


class EpisodeMeta(BaseModel):
    id: str
    duration: float
    description: str | None = None
    cameras: list[CameraMeta]
    channels: list[ChannelMeta]


class SeriesResponse(BaseModel):
    channel: str
    dims: int
    from_t: float
    to_t: float
    downsampled: bool
    points: list[list[float]]  # [t, v0, ... v_{dims-1}] per row


class SegmentBody(BaseModel):
    start: float
    end: float
    label: str
    success: bool = True


class AnnotationBody(BaseModel):
    description: str | None = None
    segments: list[SegmentBody] = Field(default_factory=list)
