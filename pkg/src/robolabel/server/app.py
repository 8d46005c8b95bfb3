"""HTTP gateway: episodes, frames, series windows, and annotation CRUD.

The service is a thin shell: the dataset handle answers frame and metadata
queries, sync does windowing, and the annotation layer owns file bytes. All
state lives in :class:`AppState`; routes never touch module globals.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.staticfiles import StaticFiles

from ..annotations import (
    AnnotationFile,
    AnnotationSchemaError,
    EpisodeRecord,
    canonical_episode,
    load_annotations,
    save_annotations,
)
from ..config import ToolConfig
from ..datasets import DatasetBase, DatasetError, UnknownEpisodeError, open_dataset
from ..model import AnnotationSegment, Episode, find_overlap, validate_segment
from ..sync import downsample_window
from .schemas import (
    AnnotationBody,
    CameraMeta,
    ChannelMeta,
    ConfigResponse,
    EpisodeMeta,
    EpisodeSummary,
    SeriesResponse,
    StreamDeclModel,
)


class AppState:
    """Everything one running service owns."""

    def __init__(self, config: ToolConfig, dataset: DatasetBase):
        self.config = config
        self.dataset = dataset
        self.annotation_path = Path(config.annotation_output_path)
        self.lock = threading.Lock()
        self.annotations = self._load_or_create()

    def _load_or_create(self) -> AnnotationFile:
        dataset_name = Path(self.config.data_path).name
        if self.annotation_path.exists():
            loaded = load_annotations(self.annotation_path)
            if loaded.annotator != self.config.annotator_id:
                raise AnnotationSchemaError(
                    f"{self.annotation_path}: belongs to annotator "
                    f"{loaded.annotator!r}, config says {self.config.annotator_id!r}"
                )
            return loaded
        return AnnotationFile(dataset=dataset_name, annotator=self.config.annotator_id)

    def episode(self, episode_id: str) -> Episode:
        try:
            return self.dataset.load_episode(episode_id)
        except UnknownEpisodeError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except DatasetError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc


def _find_decl(config: ToolConfig, name: str):
    for decl in config.channels:
        if decl.name == name:
            return decl
    return None


def _validate_body(body: AnnotationBody, episode: Episode, label_set) -> list[AnnotationSegment]:
    """Semantic checks with body-relative field paths in the 422 detail."""
    segments = []
    for i, seg in enumerate(body.segments):
        candidate = AnnotationSegment(seg.start, seg.end, seg.label, seg.success)
        report = validate_segment(candidate, episode.duration, label_set)
        if report:
            raise HTTPException(
                status_code=422,
                detail=[
                    {"loc": ["body", "segments", i], "msg": msg, "type": "value_error"}
                    for msg in report
                ],
            )
        segments.append(candidate)
    pair = find_overlap(tuple(segments))
    if pair is not None:
        a, b = pair
        raise HTTPException(
            status_code=422,
            detail=[
                {
                    "loc": ["body", "segments"],
                    "msg": f"({a.start}, {a.end}, {a.label!r}) overlaps "
                    f"({b.start}, {b.end}, {b.label!r})",
                    "type": "value_error",
                }
            ],
        )
    return sorted(segments, key=lambda s: (s.start, s.end))


def create_app(config: ToolConfig, static_dir: str | Path | None = None) -> FastAPI:
    """Open the dataset (fail fast) and assemble the service."""
    dataset = open_dataset(config)
    state = AppState(config, dataset)
    app = FastAPI(title="episode annotation gateway")
    app.state.ctx = state

    @app.get("/api/config", response_model=ConfigResponse)
    def get_config() -> ConfigResponse:
        return ConfigResponse(
            dataset_format=config.dataset_format,
            dataset=Path(config.data_path).name,
            annotator_id=config.annotator_id,
            label_set=list(config.label_set),
            shortcuts=dict(config.shortcuts),
            nav_fast_step=config.nav_fast_step,
            nav_slow_step=config.nav_slow_step,
            video_fps=config.video_fps,
            cameras=[StreamDeclModel(**vars(d)) for d in config.cameras],
            channels=[StreamDeclModel(**vars(d)) for d in config.channels],
        )

    @app.get("/api/episodes", response_model=list[EpisodeSummary])
    def list_episodes() -> list[EpisodeSummary]:
        return [
            EpisodeSummary(id=e.episode_id, duration=e.duration)
            for e in state.dataset.entries
        ]

    @app.get("/api/episodes/{episode_id}/meta", response_model=EpisodeMeta)
    def episode_meta(episode_id: str) -> EpisodeMeta:
        ep = state.episode(episode_id)
        channels = []
        for ch in ep.channels:
            decl = _find_decl(config, ch.name)
            channels.append(
                ChannelMeta(
                    name=ch.name,
                    dims=ch.dims,
                    sample_count=ch.sample_count,
                    unit=ch.unit,
                    dim_labels=list(ch.dim_labels),
                    default_visible=decl.default_visible if decl else True,
                )
            )
        return EpisodeMeta(
            id=ep.id,
            duration=ep.duration,
            description=ep.description,
            cameras=[CameraMeta(name=c.name, frame_count=c.frame_count) for c in ep.cameras],
            channels=channels,
        )

    @app.get("/api/episodes/{episode_id}/frame")
    def episode_frame(episode_id: str, camera: str, t: float) -> Response:
        ep = state.episode(episode_id)
        try:
            ep.camera(camera)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        try:
            frame, index, matched = state.dataset.frame_at(episode_id, camera, t)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except DatasetError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return Response(
            content=frame.data,
            media_type=frame.media_type,
            headers={
                "X-Frame-Index": str(index),
                "X-Frame-Timestamp": repr(matched),
            },
        )

    @app.get("/api/episodes/{episode_id}/series", response_model=SeriesResponse)
    def episode_series(
        episode_id: str,
        channel: str,
        from_t: float = Query(alias="from"),
        to_t: float = Query(alias="to"),
        max_points: int = Query(default=2000, ge=2),
    ) -> SeriesResponse:
        ep = state.episode(episode_id)
        try:
            ch = ep.channel(channel)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        try:
            window = downsample_window(ch, from_t, to_t, max_points)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        points = [
            [float(t), *map(float, row)]
            for t, row in zip(window.times, window.values)
        ]
        return SeriesResponse(
            channel=channel,
            dims=ch.dims,
            from_t=from_t,
            to_t=to_t,
            downsampled=window.downsampled,
            points=points,
        )

    @app.get("/api/episodes/{episode_id}/annotations")
    def get_annotations(episode_id: str) -> Response:
        state.episode(episode_id)  # 404 on unknown ids
        with state.lock:
            record = state.annotations.episodes.get(episode_id, EpisodeRecord())
            body = canonical_episode(record)
        return Response(content=body, media_type="application/json")

    @app.put("/api/episodes/{episode_id}/annotations")
    def put_annotations(episode_id: str, body: AnnotationBody) -> Response:
        ep = state.episode(episode_id)
        segments = _validate_body(body, ep, config.label_set)
        record = EpisodeRecord(segments=tuple(segments), description=body.description)
        with state.lock:
            state.annotations.episodes[episode_id] = record
            save_annotations(state.annotations, state.annotation_path)
            out = canonical_episode(record)
        return Response(content=out, media_type="application/json")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
