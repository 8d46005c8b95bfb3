from __future__ import annotations

import numpy as np
import pytest

from robolabel.model import (
    GAP_LABEL,
    AnnotationSegment,
    CameraStream,
    Episode,
    EpisodeAnnotation,
    LabelTimeline,
    OverlapError,
    TimeSeriesChannel,
    episode_duration,
    find_overlap,
    label_at,
    timeline_to_segments,
    to_timeline,
    validate_segment,
)

from .harness.oracles import random_segments


def seg(start, end, label="grasp", success=True):
    return AnnotationSegment(start, end, label, success)


class TestStreams:
    def test_camera_stream_counts_frames(self):
        cam = CameraStream("wrist", np.array([0.0, 0.5, 1.0]))
        assert cam.frame_count == 3
        assert cam.frame_timestamps.dtype == np.float64

    def test_camera_stream_rejects_decreasing_timestamps(self):
        with pytest.raises(ValueError):
            CameraStream("wrist", np.array([0.0, 0.5, 0.4]))

    def test_camera_stream_allows_repeats(self):
        cam = CameraStream("wrist", np.array([0.0, 0.5, 0.5, 1.0]))
        assert cam.frame_count == 4

    def test_channel_reshapes_flat_values(self):
        ch = TimeSeriesChannel("q", np.array([0.0, 1.0]), np.array([1.0, 2.0]))
        assert ch.values.shape == (2, 1)
        assert ch.dims == 1
        assert ch.sample_count == 2
        assert ch.dim_labels == ("0",)

    def test_channel_keeps_declared_labels(self):
        ch = TimeSeriesChannel(
            "q",
            np.array([0.0, 1.0]),
            np.zeros((2, 3)),
            unit="rad",
            dim_labels=("a", "b", "c"),
        )
        assert ch.dim_labels == ("a", "b", "c")
        assert ch.unit == "rad"

    def test_channel_rejects_label_count_mismatch(self):
        with pytest.raises(ValueError):
            TimeSeriesChannel(
                "q", np.array([0.0, 1.0]), np.zeros((2, 3)), dim_labels=("a",)
            )

    def test_channel_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            TimeSeriesChannel("q", np.array([0.0, 1.0]), np.zeros((3, 2)))

    def test_channel_rejects_non_finite(self):
        with pytest.raises(ValueError):
            TimeSeriesChannel("q", np.array([0.0, 1.0]), np.array([1.0, np.nan]))


class TestEpisode:
    def test_requires_at_least_one_stream(self):
        with pytest.raises(ValueError):
            Episode(id="ep", duration=1.0)

    def test_rejects_duplicate_stream_names(self):
        cam = CameraStream("x", np.array([0.0]))
        ch = TimeSeriesChannel("x", np.array([0.0]), np.array([1.0]))
        with pytest.raises(ValueError):
            Episode(id="ep", duration=1.0, cameras=(cam,), channels=(ch,))

    def test_lookup_by_name(self):
        cam = CameraStream("wrist", np.array([0.0]))
        ep = Episode(id="ep", duration=1.0, cameras=(cam,))
        assert ep.camera("wrist") is cam
        with pytest.raises(KeyError):
            ep.camera("top")
        with pytest.raises(KeyError):
            ep.channel("wrist")

    def test_episode_duration_is_max_last_timestamp(self):
        assert episode_duration([1.5, 2.5, None]) == 2.5
        assert episode_duration([]) == 0.0


class TestAnnotation:
    def test_segments_sort_on_construction(self):
        ann = EpisodeAnnotation("ep", "a", (seg(5, 6), seg(1, 2)))
        assert [s.start for s in ann.segments] == [1, 5]

    def test_overlap_rejected(self):
        with pytest.raises(OverlapError):
            EpisodeAnnotation("ep", "a", (seg(0, 2), seg(1, 3)))

    def test_touching_segments_are_fine(self):
        ann = EpisodeAnnotation("ep", "a", (seg(0, 2), seg(2, 3)))
        assert len(ann.segments) == 2

    def test_find_overlap_reports_pair(self):
        pair = find_overlap((seg(0, 2), seg(1, 3)))
        assert pair is not None
        assert pair[0].start == 0 and pair[1].start == 1
        assert find_overlap((seg(0, 1), seg(2, 3))) is None


class TestValidateSegment:
    def test_valid_segment_has_no_violations(self):
        assert validate_segment(seg(0.0, 1.0), duration=2.0) == []

    @pytest.mark.parametrize(
        "segment,duration,needle",
        [
            (seg(-0.5, 1.0), 2.0, "negative start"),
            (seg(1.0, 1.0), 2.0, "empty interval"),
            (seg(1.5, 1.0), 2.0, "after end"),
            (seg(0.0, 3.0), 2.0, "exceeds duration"),
            (seg(0.0, 1.0, ""), 2.0, "empty or reserved label"),
            (seg(0.0, 1.0, GAP_LABEL), 2.0, "empty or reserved label"),
        ],
    )
    def test_violations(self, segment, duration, needle):
        report = validate_segment(segment, duration)
        assert any(needle in v for v in report), report

    def test_label_set_enforced_when_given(self):
        assert validate_segment(seg(0, 1, "weld"), 2.0, label_set=("grasp",)) == [
            "unknown label 'weld'"
        ]
        assert validate_segment(seg(0, 1, "grasp"), 2.0, label_set=("grasp",)) == []


class TestTimeline:
    def test_breakpoints_must_span_duration(self):
        with pytest.raises(ValueError):
            LabelTimeline(2.0, (0.0, 1.0), ("a", "b"))
        with pytest.raises(ValueError):
            LabelTimeline(2.0, (0.5, 2.0), ("a",))
        with pytest.raises(ValueError):
            LabelTimeline(2.0, (0.0, 1.0, 1.0, 2.0), ("a", "b", "c"))

    def test_to_timeline_fills_gaps(self):
        ann = EpisodeAnnotation("ep", "a", (seg(1, 2, "grasp"), seg(3, 4, "lift")))
        tl = to_timeline(ann, 5.0)
        assert tl.breakpoints == (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
        assert tl.labels == (GAP_LABEL, "grasp", GAP_LABEL, "lift", GAP_LABEL)

    def test_to_timeline_of_empty_annotation_is_all_gap(self):
        tl = to_timeline(EpisodeAnnotation("ep", "a", ()), 3.0)
        assert tl.breakpoints == (0.0, 3.0)
        assert tl.labels == (GAP_LABEL,)

    def test_to_timeline_rejects_out_of_range_segment(self):
        ann = EpisodeAnnotation("ep", "a", (seg(0, 7),))
        with pytest.raises(ValueError, match="exceeds duration"):
            to_timeline(ann, 5.0)

    def test_label_at_half_open_intervals(self):
        tl = to_timeline(EpisodeAnnotation("ep", "a", (seg(1, 2, "grasp"),)), 3.0)
        assert label_at(tl, 0.0) == GAP_LABEL
        assert label_at(tl, 1.0) == "grasp"  # closed at the start
        assert label_at(tl, 2.0) == GAP_LABEL  # open at the end
        assert label_at(tl, 3.0) == GAP_LABEL  # T belongs to the last interval
        with pytest.raises(ValueError):
            label_at(tl, 3.1)
        with pytest.raises(ValueError):
            label_at(tl, -0.1)

    def test_segment_end_at_duration(self):
        tl = to_timeline(EpisodeAnnotation("ep", "a", (seg(2, 3, "lift"),)), 3.0)
        assert label_at(tl, 3.0) == "lift"

    def test_timeline_to_segments_inverts_and_merges(self):
        tl = LabelTimeline(4.0, (0.0, 1.0, 2.0, 3.0, 4.0), ("a", "a", GAP_LABEL, "b"))
        assert timeline_to_segments(tl) == [(0.0, 2.0, "a"), (3.0, 4.0, "b")]

    def test_round_trip_random_annotations(self, rng):
        duration = 10.0
        for _ in range(200):
            parts = random_segments(rng, duration, ["grasp", "lift", "place"])
            if not parts:
                continue
            ann = EpisodeAnnotation(
                "ep", "a", tuple(AnnotationSegment(*p) for p in parts)
            )
            tl = to_timeline(ann, duration)
            # Adjacent same-label segments merge; compare against that form.
            expected = []
            for s in ann.segments:
                if expected and expected[-1][2] == s.label and expected[-1][1] == s.start:
                    expected[-1] = (expected[-1][0], s.end, s.label)
                else:
                    expected.append((s.start, s.end, s.label))
            assert timeline_to_segments(tl) == expected
