"""Emotion tagging, shot sizing, long-shot plans, and the edit timeline."""
import math
import random

import pytest

from showrunner import (
    assign_emotions,
    build_edit_timeline,
    plan_long_shot,
    shot_length_from_voiceover,
)
from showrunner.errors import InvalidParams, NonPositiveDuration, OverlapTooLarge
from showrunner.production import DEFAULT_EMOTION_RULES

from oracles import bf_extension_lengths, bf_shot_frames


class TestAssignEmotions:
    def test_empty_lines(self):
        assert assign_emotions([]) == []

    def test_keyword_hit(self):
        tags = assign_emotions(["How dare you!"], rules=[("dare", "anger")])
        assert [t.emotion for t in tags] == ["anger"]

    def test_no_hit_defaults_to_neutral(self):
        tags = assign_emotions(["The weather is fine."])
        assert [t.emotion for t in tags] == ["neutral"]

    def test_first_matching_rule_wins(self):
        rules = [("storm", "surprise"), ("storm rising", "anger")]
        tags = assign_emotions(["storm rising tonight"], rules=rules)
        assert tags[0].emotion == "surprise"

    def test_output_length_and_indices(self):
        lines = ["a", "how dare", "whisper it", "d"]
        tags = assign_emotions(lines)
        assert len(tags) == len(lines)
        assert [t.line_index for t in tags] == [0, 1, 2, 3]

    def test_rule_permutation_with_disjoint_keywords(self):
        rng = random.Random(1)
        rules = list(DEFAULT_EMOTION_RULES)
        # lines that contain at most one keyword each
        lines = ["how dare you", "promise me", "whisper the plan", "what? now?",
                 "march at dawn", "suddenly rain"]
        baseline = [t.emotion for t in assign_emotions(lines, rules=rules)]
        for _ in range(10):
            shuffled = rules[:]
            rng.shuffle(shuffled)
            got = [t.emotion for t in assign_emotions(lines, rules=shuffled)]
            assert got == baseline

    def test_emotion_outside_vocabulary_rejected(self):
        with pytest.raises(InvalidParams):
            assign_emotions(["x"], rules=[("x", "melancholy")])


class TestShotLength:
    @pytest.mark.parametrize("duration, fps, expected", [
        (2.0, 8, 16),
        (3.3, 24, 80),
        (0.01, 8, 1),
    ])
    def test_examples(self, duration, fps, expected):
        assert shot_length_from_voiceover(duration, fps) == expected

    def test_nonpositive_duration(self):
        with pytest.raises(NonPositiveDuration):
            shot_length_from_voiceover(0.0, 24)
        with pytest.raises(NonPositiveDuration):
            shot_length_from_voiceover(-1.0, 24)

    def test_fps_below_one(self):
        with pytest.raises(InvalidParams):
            shot_length_from_voiceover(1.0, 0.5)

    def test_thousand_random_inputs_match_oracle(self):
        rng = random.Random(99)
        for _ in range(1000):
            duration = rng.uniform(0.01, 40.0)
            fps = rng.choice([1, 8, 12, 24, 25, 30, 48, 60])
            assert shot_length_from_voiceover(duration, fps) == \
                bf_shot_frames(duration, fps)


class TestPlanLongShot:
    def test_single_round_exact_fit(self):
        plan = plan_long_shot(14, 14)
        assert len(plan.segments) == 1
        seg = plan.segments[0]
        assert (seg.direction, seg.length, seg.keyframe_source) == \
            ("forward", 14, "scene_frame")

    def test_short_target_truncates(self):
        plan = plan_long_shot(5, 14)
        assert [s.length for s in plan.segments] == [5]
        assert plan.total_frames == 5

    def test_single_extension_no_reverse(self):
        plan = plan_long_shot(27, 14)
        assert [(s.direction, s.length) for s in plan.segments] == \
            [("forward", 14), ("forward", 13)]

    def test_two_extensions_second_is_reverse(self):
        plan = plan_long_shot(40, 14)
        assert [(s.direction, s.length) for s in plan.segments] == \
            [("forward", 14), ("forward", 13), ("reverse", 13)]
        assert plan.total_frames == 40
        assert plan.segments[2].keyframe_source == "boundary-of(1)"

    def test_round_after_reverse_reanchors_to_opening_segment(self):
        plan = plan_long_shot(53, 14)
        directions = [(s.direction, s.keyframe_source) for s in plan.segments]
        assert directions == [
            ("forward", "scene_frame"),
            ("forward", "boundary-of(0)"),
            ("reverse", "boundary-of(1)"),
            ("forward", "boundary-of(0)"),
        ]

    def test_invalid_params(self):
        with pytest.raises(InvalidParams):
            plan_long_shot(0, 14)
        with pytest.raises(InvalidParams):
            plan_long_shot(10, 1)

    def test_full_sweep_against_enumeration_oracle(self):
        for segment in range(2, 33):
            for target in range(1, 201):
                plan = plan_long_shot(target, segment)
                lengths = [s.length for s in plan.segments]
                assert lengths == bf_extension_lengths(target, segment)
                total = sum(lengths)
                assert total >= target
                assert total - lengths[-1] < target   # minimality
                assert plan.segments[0].direction == "forward"
                assert plan.segments[0].keyframe_source == "scene_frame"
                reverses = [s for s in plan.segments if s.direction == "reverse"]
                extensions = len(plan.segments) - 1
                assert len(reverses) == (1 if extensions >= 2 else 0)


class TestEditTimeline:
    def test_single_scene(self):
        timeline = build_edit_timeline([("s1", 10.0)], 1.0, ["v1"], "m1")
        assert timeline.total_duration == 10.0
        assert timeline.entries[0].transition_out == "none"

    def test_three_scenes_with_overlap(self):
        timeline = build_edit_timeline(
            [("s1", 10.0), ("s2", 10.0), ("s3", 10.0)], 1.0, ["v1", "v2"], "m1")
        assert timeline.total_duration == 28.0
        assert [e.transition_out for e in timeline.entries] == \
            ["cross_dissolve", "cross_dissolve", "none"]

    def test_zero_overlap_concatenates(self):
        timeline = build_edit_timeline([("a", 3.0), ("b", 4.0)], 0.0, [], "m")
        assert timeline.total_duration == 7.0

    def test_overlap_too_large(self):
        with pytest.raises(OverlapTooLarge):
            build_edit_timeline([("a", 1.0), ("b", 5.0)], 2.0, [], "m")

    def test_audio_merges_voices_with_one_music_ref(self):
        timeline = build_edit_timeline([("a", 5.0)], 0.0, ["v1", "v2"], "music-7")
        assert timeline.audio.merged
        assert timeline.audio.voice_refs == ("v1", "v2")
        assert timeline.audio.music_ref == "music-7"

    def test_total_formula_on_random_inputs(self):
        rng = random.Random(4)
        for _ in range(1000):
            n = rng.randint(1, 8)
            overlap = rng.choice([0.0, 0.25, 0.5, 1.0])
            scenes = [(f"s{i}", overlap + rng.uniform(0.5, 30.0)) for i in range(n)]
            timeline = build_edit_timeline(scenes, overlap, ["v"], "m")
            expected = math.fsum(d for _, d in scenes) - overlap * (n - 1)
            assert timeline.total_duration == pytest.approx(expected, abs=1e-9)
            assert timeline.entries[-1].transition_out == "none"
