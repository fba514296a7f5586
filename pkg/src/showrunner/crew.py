"""The film crew: worker contract, deterministic mock workers, and the preset.

Mock workers stand in for the generative backends. Their artifacts are small
structured documents derived purely from (event id, parameters, input hashes,
seed), so any prefix of a run reproduces identical hashes and a re-executed
attempt with identical inputs yields an identical artifact.
"""
from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from ._canon import canonical_json, sha256_hex
from .errors import (
    AdapterError,
    Cancelled,
    MissingInput,
    UnregisteredRole,
    WorkerError,
)
from .graph import EventSpec, PipelineDef, ValidatedGraph
from .production import (
    assign_emotions,
    build_edit_timeline,
    plan_long_shot,
    shot_length_from_voiceover,
)

__all__ = [
    "Artifact",
    "ExecutionContext",
    "WorkerSpec",
    "MockWorker",
    "AdapterWorker",
    "WorkerRegistry",
    "mock_registry_for",
    "film_pipeline_preset",
    "FILM_PRESET_DURATIONS",
]


@dataclass(frozen=True)
class Artifact:
    """Immutable output of one execution attempt, content-addressed by hash."""

    id: str
    producer: tuple[str, int]                 # (event id, attempt)
    kind: str
    payload: Mapping[str, Any]
    content_hash: str

    @staticmethod
    def build(event_id: str, attempt: int, kind: str, payload: Mapping[str, Any]) -> "Artifact":
        digest = sha256_hex(payload)
        return Artifact(
            id=f"{event_id}-a{attempt}-{digest[:10]}",
            producer=(event_id, attempt),
            kind=kind,
            payload=dict(payload),
            content_hash=digest,
        )


@dataclass
class ExecutionContext:
    """Per-attempt execution environment handed to a worker."""

    seed: int
    attempt: int
    cancel: threading.Event | None = None
    time_scale: float = 1.0

    def check_cancelled(self):
        if self.cancel is not None and self.cancel.is_set():
            raise Cancelled("execution cancelled")


@dataclass(frozen=True)
class WorkerSpec:
    """Declarative worker configuration: a mock model or an adapter endpoint."""

    role: str
    mode: str = "mock"                        # mock | adapter
    duration: float | None = None             # fixed mock duration
    duration_range: tuple[float, float] | None = None   # seeded mock distribution
    endpoint: str = ""                        # adapter service address
    credentials_ref: str = ""


ROLE_ARTIFACT_KINDS = {
    "scriptwriter": "script",
    "artist": "scene_frame",
    "actors": "dialogue",
    "action": "shot_plan",
    "voiceover": "voice_track",
    "post": "final_cut",
}

_HEADINGS = ("INT. PALACE HALL", "EXT. HARBOR AT DUSK", "INT. WAR TENT",
             "EXT. MOUNTAIN PASS", "INT. TAVERN", "EXT. CITY GATES")
_PALETTES = ("amber and slate", "cold indigo", "sunlit ochre", "mist grey",
             "crimson and gold", "sea green")
_LINE_TEMPLATES = (
    "How dare you leave on this of all days?",
    "Speak softly, the guards are close.",
    "I cannot believe the orders arrived tonight.",
    "Hold the line until the signal.",
    "Suddenly the horns sound beyond the wall.",
    "Promise me you will come back.",
)
_CHARACTERS = ("General", "Bride", "Messenger", "Captain", "Elder", "Sentry")


def _digest(seed: int, event_id: str, params: Mapping[str, Any],
            input_hashes: Mapping[str, str]) -> bytes:
    # NOTE: attempt number is deliberately excluded so a re-executed attempt
    # with identical params and inputs reproduces the identical artifact.
    key = canonical_json({
        "seed": seed,
        "event": event_id,
        "params": dict(params),
        "inputs": dict(sorted(input_hashes.items())),
    })
    return hashlib.sha256(key.encode("utf-8")).digest()


def _pick(digest: bytes, offset: int, options):
    return options[digest[offset % len(digest)] % len(options)]


def _unit(digest: bytes, offset: int) -> float:
    """One decimal place in [0, 25.5]; keeps payload floats replay-stable."""
    return digest[offset % len(digest)] / 10.0


class MockWorker:
    """Deterministic stand-in for one crew role."""

    def __init__(self, spec: WorkerSpec):
        if spec.mode != "mock":
            raise UnregisteredRole(f"MockWorker needs mode=mock, got {spec.mode!r}")
        self.spec = spec
        self.role = spec.role

    def duration_for(self, event: EventSpec, attempt: int, seed: int) -> float:
        if event.duration is not None:
            return float(event.duration)
        if self.spec.duration is not None:
            return float(self.spec.duration)
        if self.spec.duration_range is not None:
            lo, hi = self.spec.duration_range
            d = _digest(seed, f"{event.id}#dur{attempt}", {}, {})
            frac = int.from_bytes(d[:8], "big") / float(1 << 64)
            return round(lo + (hi - lo) * frac, 3)
        return 1.0

    def produce(self, event: EventSpec, attempt: int, params: Mapping[str, Any],
                inputs: Mapping[str, Artifact], seed: int) -> Artifact:
        """Build the attempt's artifact; pure in everything but injected failures."""
        fail_attempts = int(params.get("fail_attempts", 0))
        if attempt <= fail_attempts:
            raise WorkerError(f"{event.id} attempt {attempt}: injected failure")
        missing = sorted(set(event.dependencies) - set(inputs))
        if missing:
            raise MissingInput(f"{event.id}: missing inputs {missing}")
        input_hashes = {dep: art.content_hash for dep, art in inputs.items()}
        digest = _digest(seed, event.id, params, input_hashes)
        kind = ROLE_ARTIFACT_KINDS.get(self.role, "document")
        payload = _PAYLOAD_BUILDERS.get(kind, _document_payload)(
            event, params, inputs, digest)
        return Artifact.build(event.id, attempt, kind, payload)

    def execute(self, event: EventSpec, inputs: Mapping[str, Artifact],
                ctx: ExecutionContext, params: Mapping[str, Any] | None = None) -> Artifact:
        """Wall-clock path: wait out the duration, polling for cancellation."""
        params = dict(event.params) if params is None else params
        duration = self.duration_for(event, ctx.attempt, ctx.seed) * ctx.time_scale
        deadline = time.monotonic() + duration
        tick = max(min(duration / 20.0, 0.05), 0.001)
        while time.monotonic() < deadline:
            ctx.check_cancelled()
            time.sleep(tick)
        ctx.check_cancelled()
        return self.produce(event, ctx.attempt, params, inputs, ctx.seed)


class AdapterWorker:
    """Bridge to an external generative service over a pluggable transport.

    One request/response exchange per execution; the transport is any callable
    taking the request document and returning the response document.
    """

    def __init__(self, spec: WorkerSpec,
                 transport: Callable[[Mapping[str, Any]], Mapping[str, Any]]):
        self.spec = spec
        self.role = spec.role
        self._transport = transport

    def duration_for(self, event: EventSpec, attempt: int, seed: int) -> float:
        return float(event.duration) if event.duration is not None else 0.0

    def execute(self, event: EventSpec, inputs: Mapping[str, Artifact],
                ctx: ExecutionContext, params: Mapping[str, Any] | None = None) -> Artifact:
        ctx.check_cancelled()
        params = dict(event.params) if params is None else params
        request = {
            "role": self.role,
            "event": event.id,
            "attempt": ctx.attempt,
            "params": dict(params),
            "inputs": {dep: {"artifact": art.id, "hash": art.content_hash,
                             "kind": art.kind}
                       for dep, art in inputs.items()},
        }
        try:
            response = self._transport(request)
        except AdapterError:
            raise
        except Exception as exc:
            raise AdapterError(f"{self.role} adapter failed: {exc}") from exc
        ctx.check_cancelled()
        if "payload" not in response:
            raise AdapterError(f"{self.role} adapter returned no payload",
                               retryable=False)
        kind = response.get("kind", ROLE_ARTIFACT_KINDS.get(self.role, "document"))
        return Artifact.build(event.id, ctx.attempt, kind, response["payload"])

    # adapter artifacts come from the service, so there is no local produce()
    produce = None


class WorkerRegistry:
    """Role name -> worker. Every role in a graph must be covered before a run."""

    def __init__(self, workers: Mapping[str, Any] | None = None):
        self._workers: dict[str, Any] = dict(workers or {})

    def register(self, worker) -> "WorkerRegistry":
        self._workers[worker.role] = worker
        return self

    def __getitem__(self, role: str):
        try:
            return self._workers[role]
        except KeyError:
            raise UnregisteredRole(f"no worker registered for role {role!r}") from None

    def __contains__(self, role: str) -> bool:
        return role in self._workers

    def validate_for(self, graph: ValidatedGraph):
        missing = sorted({s.role for s in graph.events.values()} - set(self._workers))
        if missing:
            raise UnregisteredRole(f"no worker for roles: {', '.join(missing)}")


def mock_registry_for(graph: ValidatedGraph,
                      default_duration: float | None = None) -> WorkerRegistry:
    registry = WorkerRegistry()
    for spec in graph.events.values():
        if spec.role not in registry:
            registry.register(MockWorker(WorkerSpec(spec.role, duration=default_duration)))
    return registry


# -- payload builders ----------------------------------------------------------

def _script_payload(event, params, inputs, digest):
    n = int(params.get("scenes", 3))
    title = params.get("title", "Untitled Feature")
    scenes = []
    for i in range(n):
        scenes.append({
            "index": i + 1,
            "heading": _pick(digest, i * 3, _HEADINGS),
            "synopsis": f"{_pick(digest, i * 3 + 1, _CHARACTERS)} faces "
                        f"{_pick(digest, i * 3 + 2, ('a departure', 'an oath', 'a siege', 'a reunion'))}.",
            "characters": sorted({_pick(digest, i * 5 + 7, _CHARACTERS),
                                  _pick(digest, i * 5 + 11, _CHARACTERS)}),
        })
    payload = {"kind": "script", "title": title, "scenes": scenes}
    if "director_note" in params:
        payload["revision_note"] = params["director_note"]
    return payload


def _scenes_from(inputs):
    for art in inputs.values():
        if art.kind == "script":
            return art.payload["scenes"]
    return [{"index": 1, "heading": "INT. STAGE", "characters": ["Lead"]}]


def _scene_frame_payload(event, params, inputs, digest):
    frames = []
    for i, scene in enumerate(_scenes_from(inputs)):
        frames.append({
            "scene": scene["index"],
            "palette": _pick(digest, i * 2, _PALETTES),
            "composition": f"{scene['heading']} — wide establishing shot",
        })
    payload = {"kind": "scene_frame", "frames": frames}
    if "director_note" in params:
        payload["revision_note"] = params["director_note"]
    return payload


def _dialogue_payload(event, params, inputs, digest):
    lines = []
    for i, scene in enumerate(_scenes_from(inputs)):
        for j in range(2):
            off = i * 7 + j * 3
            lines.append({
                "scene": scene["index"],
                "character": _pick(digest, off, _CHARACTERS),
                "text": _pick(digest, off + 1, _LINE_TEMPLATES),
            })
    payload = {"kind": "dialogue", "lines": lines}
    if "director_note" in params:
        payload["revision_note"] = params["director_note"]
    return payload


def _shot_plan_payload(event, params, inputs, digest):
    segment_len = int(params.get("segment_len", 14))
    shots = []
    for art in inputs.values():
        if art.kind != "scene_frame":
            continue
        for i, frame in enumerate(art.payload["frames"]):
            target = 24 + digest[(i * 5) % len(digest)] % 96
            plan = plan_long_shot(target, segment_len)
            shots.append({
                "scene": frame["scene"],
                "target_frames": plan.target_frames,
                "segments": [
                    {"direction": s.direction, "length": s.length,
                     "keyframe_source": s.keyframe_source}
                    for s in plan.segments
                ],
            })
    return {"kind": "shot_plan", "segment_len": segment_len, "shots": shots}


def _voice_track_payload(event, params, inputs, digest):
    tracks = []
    for art in inputs.values():
        if art.kind != "dialogue":
            continue
        texts = [line["text"] for line in art.payload["lines"]]
        tags = assign_emotions(texts)
        for line, tag in zip(art.payload["lines"], tags):
            tracks.append({
                "scene": line["scene"],
                "character": line["character"],
                "emotion": tag.emotion,
                "duration_s": round(1.5 + _unit(digest, tag.line_index), 1),
            })
    return {"kind": "voice_track", "tracks": tracks}


def _final_cut_payload(event, params, inputs, digest):
    fps = int(params.get("fps", 24))
    overlap = float(params.get("cross_dissolve", 0.5))
    by_scene: dict[Any, float] = {}
    voice_refs = []
    for art in inputs.values():
        if art.kind != "voice_track":
            continue
        # ref by content, not artifact id: ids carry attempt counters and a
        # re-executed attempt with identical content must hash identically
        voice_refs.append(f"voice-{art.content_hash[:10]}")
        for track in art.payload["tracks"]:
            by_scene[track["scene"]] = round(
                by_scene.get(track["scene"], 0.0) + track["duration_s"], 1)
    if not by_scene:
        by_scene = {1: 4.0}
        voice_refs = ["voice-missing"]
    scenes = [(f"scene-{sid}", max(dur, 2.0 * overlap + 1.0))
              for sid, dur in sorted(by_scene.items())]
    timeline = build_edit_timeline(scenes, overlap, voice_refs,
                                   music_ref=f"music-{digest[:4].hex()}")
    return {
        "kind": "final_cut",
        "timeline": [
            {"scene": e.scene_id, "duration_s": e.duration,
             "frames": shot_length_from_voiceover(e.duration, fps),
             "transition_out": e.transition_out}
            for e in timeline.entries
        ],
        "total_duration_s": round(timeline.total_duration, 2),
        "audio": {"voices": list(timeline.audio.voice_refs),
                  "music": timeline.audio.music_ref,
                  "merged": timeline.audio.merged},
    }


def _document_payload(event, params, inputs, digest):
    return {
        "kind": "document",
        "event": event.id,
        "summary": f"{event.role} output ({digest[:4].hex()})",
        "inputs": sorted(f"{a.kind}-{a.content_hash[:10]}" for a in inputs.values()),
    }


_PAYLOAD_BUILDERS = {
    "script": _script_payload,
    "scene_frame": _scene_frame_payload,
    "dialogue": _dialogue_payload,
    "shot_plan": _shot_plan_payload,
    "voice_track": _voice_track_payload,
    "final_cut": _final_cut_payload,
}


# -- the film preset -----------------------------------------------------------

FILM_PRESET_DURATIONS = {
    "script": 10.0, "art": 20.0, "dialogue": 15.0,
    "action": 30.0, "voiceover": 12.0, "post": 8.0,
}


def film_pipeline_preset() -> PipelineDef:
    """Six-event film production pipeline.

    Art direction and dialogue follow the script and may run in parallel;
    action shooting waits on art direction, dubbing waits on the performed
    dialogue, and post-production joins all three branches.
    """
    d = FILM_PRESET_DURATIONS
    return PipelineDef(name="film", events=(
        EventSpec("script", role="scriptwriter", duration=d["script"],
                  params={"title": "Untitled Feature", "scenes": 3}),
        EventSpec("art", role="artist", dependencies={"script"}, duration=d["art"]),
        EventSpec("dialogue", role="actors", dependencies={"script"}, duration=d["dialogue"]),
        EventSpec("action", role="action", dependencies={"art"}, duration=d["action"]),
        EventSpec("voiceover", role="voiceover", dependencies={"dialogue"}, duration=d["voiceover"]),
        EventSpec("post", role="post", dependencies={"art", "action", "voiceover"},
                  duration=d["post"], params={"fps": 24, "cross_dissolve": 0.5}),
    ))
