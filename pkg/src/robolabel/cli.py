"""Operator commands: serve, inspect, metrics, merge-gt, validate.

Everything except `serve` is an offline file operation on the core library;
`serve` starts the HTTP gateway.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .annotations import (
    AnnotationFile,
    AnnotationSchemaError,
    EpisodeRecord,
    load_annotations,
    save_annotations,
    validate_annotation_file,
)
from .config import ConfigError, load_config
from .datasets import DatasetError, open_dataset
from .metrics import compare_annotations, merge_ground_truth
from .model import EpisodeAnnotation


def _fail(message: str, code: int = 1) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _episode_annotation(record: EpisodeRecord, episode_id: str, annotator: str) -> EpisodeAnnotation:
    return EpisodeAnnotation(episode_id, annotator, record.segments)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    try:
        config = load_config(args.config)
        static_dir = os.environ.get("ROBOLABEL_STATIC")
        if static_dir is None and Path("frontend/dist").is_dir():
            static_dir = "frontend/dist"
        app = create_app(config, static_dir=static_dir)
    except (ConfigError, DatasetError, AnnotationSchemaError) as exc:
        return _fail(str(exc))
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    except OSError as exc:  # port in use, bind failures
        return _fail(f"cannot bind {args.host}:{args.port}: {exc}")
    return 0


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
        dataset = open_dataset(config)
    except (ConfigError, DatasetError) as exc:
        return _fail(str(exc))
    try:
        if args.episode is None:
            entries = dataset.entries
            print(f"{len(entries)} episodes")
            for entry in entries:
                suffix = f"  {entry.duration:.3f}s" if entry.duration is not None else ""
                print(f"  {entry.episode_id}{suffix}")
            return 0
        try:
            episode = dataset.load_episode(args.episode)
        except DatasetError as exc:
            return _fail(str(exc))
        print(f"episode {episode.id}")
        print(f"  duration: {episode.duration:.3f}s")
        if episode.description:
            print(f"  description: {episode.description}")
        print(f"  cameras: {len(episode.cameras)}")
        for cam in episode.cameras:
            print(f"    {cam.name}: {cam.frame_count} frames")
        print(f"  channels: {len(episode.channels)}")
        for ch in episode.channels:
            unit = f" [{ch.unit}]" if ch.unit else ""
            print(f"    {ch.name}: {ch.sample_count} samples x {ch.dims} dims{unit}")
        for warning in dataset.warnings:
            print(f"  warning: {warning}")
        return 0
    finally:
        dataset.close()


def _load_pair(path_a: str, path_b: str) -> tuple[AnnotationFile, AnnotationFile]:
    return load_annotations(path_a), load_annotations(path_b)


def _common_episodes(a: AnnotationFile, b: AnnotationFile) -> list[str]:
    return sorted(set(a.episodes) & set(b.episodes))


def cmd_metrics(args: argparse.Namespace) -> int:
    try:
        file_a, file_b = _load_pair(args.a, args.b)
    except AnnotationSchemaError as exc:
        return _fail(str(exc))
    common = _common_episodes(file_a, file_b)
    if not common:
        return _fail("the two files share no episode ids")
    pairs = []
    for eid in common:
        ra, rb = file_a.episodes[eid], file_b.episodes[eid]
        # Files carry no episode duration; use the latest annotated instant.
        ends = [s.end for s in ra.segments] + [s.end for s in rb.segments]
        if not ends:
            continue  # nothing annotated on either side; no time base to compare
        pairs.append(
            (
                _episode_annotation(ra, eid, file_a.annotator),
                _episode_annotation(rb, eid, file_b.annotator),
                max(ends),
            )
        )
    if not pairs:
        return _fail("no common episode has any segments")
    try:
        report = compare_annotations(pairs, include_outcome=args.include_outcome)
    except ValueError as exc:
        return _fail(str(exc))
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_merge_gt(args: argparse.Namespace) -> int:
    try:
        file_a, file_b = _load_pair(args.a, args.b)
    except AnnotationSchemaError as exc:
        return _fail(str(exc))
    only_a = sorted(set(file_a.episodes) - set(file_b.episodes))
    only_b = sorted(set(file_b.episodes) - set(file_a.episodes))
    if only_a or only_b:
        detail = []
        if only_a:
            detail.append(f"only in {args.a}: {', '.join(only_a)}")
        if only_b:
            detail.append(f"only in {args.b}: {', '.join(only_b)}")
        return _fail("episode sets differ; " + "; ".join(detail))
    if not file_a.episodes:
        return _fail("nothing to merge: no episodes")
    merged = AnnotationFile(
        dataset=file_a.dataset,
        annotator=f"{file_a.annotator}+{file_b.annotator}",
    )
    for eid in sorted(file_a.episodes):
        ra, rb = file_a.episodes[eid], file_b.episodes[eid]
        try:
            out = merge_ground_truth(
                _episode_annotation(ra, eid, file_a.annotator),
                _episode_annotation(rb, eid, file_b.annotator),
            )
        except ValueError as exc:
            return _fail(f"episode {eid!r}: {exc}")
        merged.episodes[eid] = EpisodeRecord(segments=out.segments, description=ra.description)
    save_annotations(merged, args.out)
    print(f"wrote {args.out} ({len(merged.episodes)} episodes)")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    violations = validate_annotation_file(args.file)
    for line in violations:
        print(line)
    if violations:
        return 1
    print("ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robolabel")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="start the annotation gateway")
    p.add_argument("--config", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("inspect", help="summarize a dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--episode", default=None)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("metrics", help="agreement metrics between two annotation files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--include-outcome", action="store_true")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("merge-gt", help="average two annotation files into ground truth")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_merge_gt)

    p = sub.add_parser("validate", help="schema-check an annotation file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
