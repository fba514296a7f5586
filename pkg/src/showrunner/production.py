"""Shot and soundtrack planning helpers used by the crew workers.

These are the computable pieces of the production toolchain: per-line emotion
tags for dubbing, voiceover-driven shot sizing, keyframe-conditioned segment
plans for long shots, and the cross-dissolve edit timeline.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import InvalidParams, NonPositiveDuration, OverlapTooLarge

__all__ = [
    "EmotionTag",
    "DEFAULT_EMOTION_VOCABULARY",
    "DEFAULT_EMOTION_RULES",
    "assign_emotions",
    "shot_length_from_voiceover",
    "Segment",
    "ExtensionPlan",
    "plan_long_shot",
    "TimelineEntry",
    "AudioMix",
    "EditTimeline",
    "build_edit_timeline",
]

DEFAULT_EMOTION_VOCABULARY = frozenset({"anger", "surprise", "whisper", "neutral"})

# Ordered rule table: first keyword hit wins, case-insensitive substring match.
DEFAULT_EMOTION_RULES: tuple[tuple[str, str], ...] = (
    ("dare", "anger"),
    ("furious", "anger"),
    ("enough!", "anger"),
    ("what?", "surprise"),
    ("cannot believe", "surprise"),
    ("suddenly", "surprise"),
    ("whisper", "whisper"),
    ("softly", "whisper"),
    ("quiet", "whisper"),
)


@dataclass(frozen=True)
class EmotionTag:
    line_index: int
    emotion: str


def assign_emotions(lines: Sequence[str],
                    rules: Sequence[tuple[str, str]] = DEFAULT_EMOTION_RULES,
                    vocabulary: frozenset[str] = DEFAULT_EMOTION_VOCABULARY,
                    default: str = "neutral") -> list[EmotionTag]:
    """Tag each dialogue line with the emotion of its first matching rule.

    The rule table is total via ``default``; output order and length follow
    the input lines exactly.
    """
    bad = {emotion for _, emotion in rules if emotion not in vocabulary}
    if bad or default not in vocabulary:
        raise InvalidParams(f"emotions outside vocabulary: {sorted(bad) or [default]}")
    tags = []
    for index, line in enumerate(lines):
        lowered = line.lower()
        emotion = default
        for keyword, rule_emotion in rules:
            if keyword.lower() in lowered:
                emotion = rule_emotion
                break
        tags.append(EmotionTag(index, emotion))
    return tags


def shot_length_from_voiceover(voice_duration: float, fps: float) -> int:
    """Frames needed to cover a voiceover: ceil(duration * fps), at least 1.

    The product is taken exactly (no float rounding surprises near integers).
    """
    if voice_duration <= 0:
        raise NonPositiveDuration(f"voice duration must be > 0, got {voice_duration}")
    if fps < 1:
        raise InvalidParams(f"fps must be >= 1, got {fps}")
    frames = math.ceil(Fraction(voice_duration) * Fraction(fps))
    return max(1, frames)


@dataclass(frozen=True)
class Segment:
    direction: str            # forward | reverse
    length: int
    keyframe_source: str      # "scene_frame" or "boundary-of(<segment index>)"


@dataclass(frozen=True)
class ExtensionPlan:
    segment_len: int
    target_frames: int
    segments: tuple[Segment, ...]

    @property
    def total_frames(self) -> int:
        return sum(s.length for s in self.segments)


def plan_long_shot(target_frames: int, segment_len: int) -> ExtensionPlan:
    """Plan fixed-length generation segments covering a long shot.

    The generator emits ``segment_len`` frames per round; every chained round
    reuses the previous boundary frame as its conditioning keyframe and so
    contributes ``segment_len - 1`` new frames. When at least two extension
    rounds are needed, the second one replays the first extension in reverse,
    returning to the opening segment's terminal keyframe before any further
    rounds continue from there; that caps conditioning drift at one segment.
    """
    if target_frames < 1 or segment_len < 2:
        raise InvalidParams(
            f"need target_frames >= 1 and segment_len >= 2, "
            f"got {target_frames}, {segment_len}")
    first = Segment("forward", min(segment_len, target_frames), "scene_frame")
    segments = [first]
    if target_frames > segment_len:
        step = segment_len - 1
        rounds = math.ceil((target_frames - segment_len) / step)
        for i in range(1, rounds + 1):
            if i == 1:
                seg = Segment("forward", step, "boundary-of(0)")
            elif i == 2:
                seg = Segment("reverse", step, "boundary-of(1)")
            elif i == 3:
                # the reverse round landed back on the opening boundary
                seg = Segment("forward", step, "boundary-of(0)")
            else:
                seg = Segment("forward", step, f"boundary-of({i - 1})")
            segments.append(seg)
    return ExtensionPlan(segment_len, target_frames, tuple(segments))


@dataclass(frozen=True)
class TimelineEntry:
    scene_id: str
    duration: float
    transition_out: str       # "cross_dissolve" | "none"
    overlap: float = 0.0


@dataclass(frozen=True)
class AudioMix:
    voice_refs: tuple[str, ...]
    music_ref: str
    merged: bool = True


@dataclass(frozen=True)
class EditTimeline:
    entries: tuple[TimelineEntry, ...]
    audio: AudioMix
    total_duration: float = field(default=0.0)


def build_edit_timeline(scenes: Sequence[tuple[str, float]], overlap: float,
                        voice_refs: Sequence[str], music_ref: str) -> EditTimeline:
    """Splice scenes with cross-dissolves and merge the sound channel.

    Every transition overlaps the next scene by ``overlap`` seconds, so the
    total runtime is the duration sum minus one overlap per transition.
    """
    if not scenes:
        raise InvalidParams("timeline needs at least one scene")
    if overlap < 0:
        raise InvalidParams(f"overlap must be >= 0, got {overlap}")
    if len(scenes) >= 2:
        for scene_id, duration in scenes:
            if duration <= overlap:
                raise OverlapTooLarge(
                    f"scene {scene_id!r} ({duration}s) shorter than overlap {overlap}s")
    entries = []
    for i, (scene_id, duration) in enumerate(scenes):
        last = i == len(scenes) - 1
        entries.append(TimelineEntry(
            scene_id=scene_id,
            duration=float(duration),
            transition_out="none" if last else "cross_dissolve",
            overlap=0.0 if last else float(overlap),
        ))
    total = sum(d for _, d in scenes) - overlap * (len(scenes) - 1)
    audio = AudioMix(voice_refs=tuple(voice_refs), music_ref=music_ref, merged=True)
    return EditTimeline(entries=tuple(entries), audio=audio, total_duration=float(total))
