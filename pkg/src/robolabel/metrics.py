"""Inter-annotator agreement and boundary-distance metrics.

Two complementary measures over a pair of annotations of the same episode:
the continuous-time agreement fraction (exact piecewise integration of the
label-match indicator over [0, T], gaps included) and the mean nearest-match
boundary distance, asymmetric per direction and symmetrized by averaging.
Multi-episode comparisons concatenate all episodes into one long sequence;
expert references merge by averaging matched boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    AnnotationSegment,
    EpisodeAnnotation,
    LabelTimeline,
    find_overlap,
    to_timeline,
)

DEDUP_EPSILON = 1e-6  # seconds; far below expert-scale boundary differences
DURATION_TOLERANCE = 1e-6


def agreement(tl1: LabelTimeline, tl2: LabelTimeline) -> float:
    """Fraction of [0, T] on which the two labelings agree.

    Exact evaluation over the merged breakpoint set, no sampling. Matching
    gap labels count as agreement.
    """
    if abs(tl1.total_duration - tl2.total_duration) > DURATION_TOLERANCE:
        raise ValueError(
            f"duration mismatch: {tl1.total_duration} vs {tl2.total_duration}"
        )
    total = tl1.total_duration
    if total <= 0:
        raise ValueError("cannot compute agreement over zero duration")
    merged = sorted(set(tl1.breakpoints) | set(tl2.breakpoints))
    merged = [b for b in merged if b <= total] + [total]
    # Sum the disagreement: identical timelines then agree at exactly 1.0
    # with no summation dust, and the ratio cannot leave [0, 1].
    disagreed = 0.0
    for lo, hi in zip(merged, merged[1:]):
        if hi <= lo:
            continue
        if _label_in(tl1, lo, hi) != _label_in(tl2, lo, hi):
            disagreed += hi - lo
    return max(0.0, (total - disagreed) / total)


def _label_in(tl: LabelTimeline, lo: float, hi: float) -> str:
    """Label of the interval covering [lo, hi); constant by construction."""
    # Clamp guards against sub-tolerance duration mismatch between timelines.
    t = min(max(lo, 0.0), tl.total_duration)
    idx = int(np.searchsorted(tl.breakpoints, t, side="right")) - 1
    return tl.labels[min(max(idx, 0), len(tl.labels) - 1)]


def boundary_set(ann: EpisodeAnnotation, eps: float = DEDUP_EPSILON) -> np.ndarray:
    """Sorted union of all segment starts and ends, deduplicated within eps.

    Greedy dedup keeps the earliest representative of each cluster.
    """
    raw = sorted({float(s.start) for s in ann.segments} | {float(s.end) for s in ann.segments})
    kept: list[float] = []
    for b in raw:
        if not kept or b - kept[-1] > eps:
            kept.append(b)
    return np.asarray(kept, dtype=np.float64)


def asym_boundary_distance(ba: np.ndarray, bb: np.ndarray) -> float:
    """Mean over boundaries in ba of the distance to the closest one in bb."""
    ba = np.asarray(ba, dtype=np.float64)
    bb = np.asarray(bb, dtype=np.float64)
    if ba.size == 0 or bb.size == 0:
        raise ValueError("boundary sets must be non-empty")
    pos = np.searchsorted(bb, ba)
    left = bb[np.clip(pos - 1, 0, bb.size - 1)]
    right = bb[np.clip(pos, 0, bb.size - 1)]
    nearest = np.minimum(np.abs(ba - left), np.abs(right - ba))
    return float(np.mean(nearest))


def sym_boundary_distance(ba: np.ndarray, bb: np.ndarray) -> float:
    """Average of the two directed boundary distances."""
    return 0.5 * (asym_boundary_distance(ba, bb) + asym_boundary_distance(bb, ba))


def concatenate(
    anns: list[tuple[EpisodeAnnotation, float]],
    annotator_id: str | None = None,
) -> tuple[EpisodeAnnotation, float]:
    """Join per-episode annotations into one long sequence.

    Episode k's times shift by the summed durations of episodes before k;
    the returned duration is the sum of all durations.
    """
    segments: list[AnnotationSegment] = []
    offset = 0.0
    ids = []
    for ann, duration in anns:
        if duration <= 0:
            raise ValueError(f"episode {ann.episode_id!r}: non-positive duration")
        ids.append(ann.episode_id)
        if annotator_id is None:
            annotator_id = ann.annotator_id
        elif ann.annotator_id != annotator_id:
            raise ValueError(
                f"mixed annotators: {annotator_id!r} vs {ann.annotator_id!r}"
            )
        for seg in ann.segments:
            segments.append(
                AnnotationSegment(seg.start + offset, seg.end + offset, seg.label, seg.success)
            )
        offset += duration
    joined = EpisodeAnnotation(
        episode_id="+".join(ids),
        annotator_id=annotator_id or "",
        segments=tuple(segments),
    )
    return joined, offset


def merge_ground_truth(a1: EpisodeAnnotation, a2: EpisodeAnnotation) -> EpisodeAnnotation:
    """Average matched boundaries of two expert annotations.

    Requires order-matched label sequences; segment k of the result averages
    the two starts and ends, keeps the shared label, and ANDs the outcomes.
    """
    if len(a1.segments) != len(a2.segments):
        raise ValueError(
            f"cannot merge: {len(a1.segments)} segments vs {len(a2.segments)}"
        )
    merged = []
    for k, (s1, s2) in enumerate(zip(a1.segments, a2.segments)):
        if s1.label != s2.label:
            raise ValueError(
                f"cannot merge: labels diverge at segment {k} "
                f"({s1.label!r} vs {s2.label!r})"
            )
        merged.append(
            AnnotationSegment(
                start=(s1.start + s2.start) / 2.0,
                end=(s1.end + s2.end) / 2.0,
                label=s1.label,
                success=s1.success and s2.success,
            )
        )
    out = EpisodeAnnotation(a1.episode_id, f"{a1.annotator_id}+{a2.annotator_id}", tuple(merged))
    if find_overlap(out.segments) is not None:
        raise ValueError("merged segments overlap")  # unreachable for valid inputs
    return out


@dataclass(frozen=True)
class EpisodeAgreement:
    episode_id: str
    duration: float
    agreement: float
    d_forward: float | None
    d_backward: float | None
    d_sym: float | None


@dataclass(frozen=True)
class AgreementReport:
    """Concatenated-sequence metrics plus the per-episode breakdown."""

    agreement: float
    d_forward: float
    d_backward: float
    d_sym: float
    total_duration: float
    episodes: tuple[EpisodeAgreement, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "agreement_percent": self.agreement * 100.0,
            "boundary_forward_s": self.d_forward,
            "boundary_backward_s": self.d_backward,
            "boundary_sym_s": self.d_sym,
            "total_duration_s": self.total_duration,
            "episodes": {
                ep.episode_id: {
                    "duration_s": ep.duration,
                    "agreement_percent": ep.agreement * 100.0,
                    "boundary_forward_s": ep.d_forward,
                    "boundary_backward_s": ep.d_backward,
                    "boundary_sym_s": ep.d_sym,
                }
                for ep in self.episodes
            },
        }


def _with_outcome(ann: EpisodeAnnotation) -> EpisodeAnnotation:
    """Fold the success flag into the label so Eq-style agreement sees it."""
    segs = tuple(
        AnnotationSegment(
            s.start, s.end, f"{s.label}|{'success' if s.success else 'failure'}", s.success
        )
        for s in ann.segments
    )
    return EpisodeAnnotation(ann.episode_id, ann.annotator_id, segs)


def compare_annotations(
    pairs: list[tuple[EpisodeAnnotation, EpisodeAnnotation, float]],
    include_outcome: bool = False,
) -> AgreementReport:
    """Full report over matched episode pairs (a1, a2, duration).

    Per-episode metrics are computed individually; the headline numbers come
    from concatenating all episodes into a single long sequence. Outcome
    flags stay out of the label comparison unless ``include_outcome``.
    """
    if not pairs:
        raise ValueError("no overlapping episodes to compare")
    if include_outcome:
        pairs = [(_with_outcome(a1), _with_outcome(a2), d) for a1, a2, d in pairs]
    per_episode = []
    for a1, a2, duration in pairs:
        ba, bb = boundary_set(a1), boundary_set(a2)
        have_bounds = ba.size > 0 and bb.size > 0
        per_episode.append(
            EpisodeAgreement(
                episode_id=a1.episode_id,
                duration=duration,
                agreement=agreement(to_timeline(a1, duration), to_timeline(a2, duration)),
                d_forward=asym_boundary_distance(ba, bb) if have_bounds else None,
                d_backward=asym_boundary_distance(bb, ba) if have_bounds else None,
                d_sym=sym_boundary_distance(ba, bb) if have_bounds else None,
            )
        )
    cat1, total = concatenate([(a1, d) for a1, _, d in pairs])
    cat2, _ = concatenate([(a2, d) for _, a2, d in pairs])
    ba, bb = boundary_set(cat1), boundary_set(cat2)
    return AgreementReport(
        agreement=agreement(to_timeline(cat1, total), to_timeline(cat2, total)),
        d_forward=asym_boundary_distance(ba, bb),
        d_backward=asym_boundary_distance(bb, ba),
        d_sym=sym_boundary_distance(ba, bb),
        total_duration=total,
        episodes=tuple(per_episode),
    )
