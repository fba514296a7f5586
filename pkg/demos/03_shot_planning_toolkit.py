"""The production toolkit: emotion tags, shot sizing, long shots, the cut.

These helpers are what the mock post-production crew uses internally; they
are just as usable standalone.
"""
from showrunner import (
    assign_emotions,
    build_edit_timeline,
    plan_long_shot,
    shot_length_from_voiceover,
)

# Per-line emotion tags drive the dubbing voice. First matching keyword in
# the rule table wins; anything else reads neutral.
lines = [
    "How dare you leave on this of all days?",
    "Speak softly, the guards are close.",
    "The column marches at dawn.",
]
for line, tag in zip(lines, assign_emotions(lines)):
    print(f"  [{tag.emotion:<8}] {line}")

# Shots must cover their voiceover. 3.3 seconds at 24 fps needs 80 frames.
frames = shot_length_from_voiceover(3.3, 24)
print(f"\n3.3s of voiceover at 24 fps -> {frames} frames")

# The video model emits fixed-length segments, each conditioned on a
# keyframe. Chaining rounds drifts, so after the first extension the plan
# inserts the same segment reversed, landing back on the opening boundary
# before continuing.
plan = plan_long_shot(target_frames=frames, segment_len=14)
print(f"\nlong-shot plan for {plan.target_frames} frames "
      f"(segments of {plan.segment_len}):")
for index, segment in enumerate(plan.segments):
    print(f"  {index}: {segment.direction:<7} {segment.length:>3} frames "
          f"from {segment.keyframe_source}")
print(f"  covers {plan.total_frames} frames")

# Finally the cut: scenes spliced with cross-dissolves, each overlap
# shortening the total, and one merged sound channel.
timeline = build_edit_timeline(
    scenes=[("scene-1", 12.0), ("scene-2", 9.5), ("scene-3", 14.0)],
    overlap=1.0,
    voice_refs=["voice-4f2a09", "voice-99c1d2"],
    music_ref="music-7b11",
)
print(f"\nedit timeline ({timeline.total_duration}s total):")
for entry in timeline.entries:
    print(f"  {entry.scene_id:<8} {entry.duration:>5}s out={entry.transition_out}")
print(f"  audio merged: {timeline.audio.merged}, "
      f"music: {timeline.audio.music_ref}")
