"""Slice-boundary planning and progress-report transitions.

At every boundary the director loop asks ``plan`` what to do — dispatch the
ready events, revoke what feedback invalidated, or wait — and then folds the
decision plus any completions into the next progress report with ``advance``.
Both functions are pure; the run loop in ``runner`` owns all side effects.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

from .errors import InconsistentReport, UnknownCompletion
from .feedback import Feedback, RevocationPlan, interpret
from .graph import ValidatedGraph, ready_set

__all__ = [
    "RunningEntry",
    "DoneEntry",
    "RevocationEntry",
    "CompletionRecord",
    "ProgressReport",
    "ScheduleDecision",
    "plan",
    "advance",
]


@dataclass(frozen=True)
class RunningEntry:
    event_id: str
    attempt: int
    started_at: float


@dataclass(frozen=True)
class DoneEntry:
    event_id: str
    attempt: int
    artifact_id: str
    finished_at: float


@dataclass(frozen=True)
class RevocationEntry:
    slice_index: int
    event_id: str
    attempt: int
    reason: str


@dataclass(frozen=True)
class CompletionRecord:
    event_id: str
    attempt: int
    artifact_id: str
    finished_at: float


@dataclass(frozen=True)
class ProgressReport:
    """Snapshot at a slice boundary: what runs, what finished, what was undone."""

    slice_index: int = 0
    running: Mapping[str, RunningEntry] = field(default_factory=dict)
    done: Mapping[str, DoneEntry] = field(default_factory=dict)
    revoked_history: tuple[RevocationEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "running", dict(self.running))
        object.__setattr__(self, "done", dict(self.done))
        object.__setattr__(self, "revoked_history", tuple(self.revoked_history))
        overlap = set(self.running) & set(self.done)
        if overlap:
            raise InconsistentReport(f"events both running and done: {sorted(overlap)}")

    def running_ids(self) -> set[str]:
        return set(self.running)

    def done_ids(self) -> set[str]:
        return set(self.done)

    def state_of(self, event_id: str) -> str:
        if event_id in self.running:
            return "running"
        if event_id in self.done:
            return "done"
        return "pending"

    def next_attempt(self, event_id: str) -> int:
        return 1 + sum(1 for r in self.revoked_history if r.event_id == event_id)

    def is_complete(self, graph: ValidatedGraph) -> bool:
        return set(self.done) >= graph.ids

    def to_payload(self) -> dict[str, Any]:
        return {
            "slice_index": self.slice_index,
            "running": [
                {"event_id": r.event_id, "attempt": r.attempt, "started_at": r.started_at}
                for r in sorted(self.running.values(), key=lambda r: r.event_id)
            ],
            "done": [
                {"event_id": d.event_id, "attempt": d.attempt,
                 "artifact_id": d.artifact_id, "finished_at": d.finished_at}
                for d in sorted(self.done.values(), key=lambda d: d.event_id)
            ],
            "revoked_history": [
                {"slice": r.slice_index, "event_id": r.event_id,
                 "attempt": r.attempt, "reason": r.reason}
                for r in self.revoked_history
            ],
        }

    @staticmethod
    def from_payload(payload: Mapping[str, Any]) -> "ProgressReport":
        return ProgressReport(
            slice_index=payload["slice_index"],
            running={r["event_id"]: RunningEntry(r["event_id"], r["attempt"],
                                                 r["started_at"])
                     for r in payload["running"]},
            done={d["event_id"]: DoneEntry(d["event_id"], d["attempt"],
                                           d["artifact_id"], d["finished_at"])
                  for d in payload["done"]},
            revoked_history=tuple(
                RevocationEntry(r["slice"], r["event_id"], r["attempt"], r["reason"])
                for r in payload["revoked_history"]),
        )


@dataclass(frozen=True)
class ScheduleDecision:
    """What one boundary resolved to: dispatches, revocations, or a wait."""

    enqueue: frozenset[str] = frozenset()
    revoke: frozenset[str] = frozenset()
    wait: bool = False
    reason: str = ""                                   # feedback id behind revoke
    amendments: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "enqueue", frozenset(self.enqueue))
        object.__setattr__(self, "revoke", frozenset(self.revoke))
        object.__setattr__(self, "amendments", dict(self.amendments))
        if self.enqueue & self.revoke:
            raise InconsistentReport(
                f"decision both enqueues and revokes: {sorted(self.enqueue & self.revoke)}")
        if self.wait and (self.enqueue or self.revoke):
            raise InconsistentReport("wait decision must be empty")


def plan(report: ProgressReport, feedback: Feedback | None, graph: ValidatedGraph,
         mode: str = "parallel",
         artifact_producer: Mapping[str, str] | None = None) -> ScheduleDecision:
    """Decide the boundary: revoke per feedback, then dispatch whatever is ready.

    Events revoked at this boundary re-enter pending but are only dispatched
    from the next boundary on, so revocation and re-planning stay two distinct
    steps. With no feedback nothing is revoked. ``wait`` is set when there is
    nothing to do and the run is not finished.
    """
    unknown = (report.running_ids() | report.done_ids()) - graph.ids
    if unknown:
        raise InconsistentReport(f"report references unknown events: {sorted(unknown)}")

    revocation = RevocationPlan(frozenset(), {}, "")
    if feedback is not None:
        revocation = interpret(feedback, report, graph, artifact_producer)

    view = _after_revocation(report, revocation.revocations)
    ready = ready_set(graph, view) - revocation.revocations
    if mode == "serial":
        if view.running_ids():
            ready = set()
        elif ready:
            ready = {min(ready, key=graph.topo_rank)}
    enqueue = frozenset(ready)
    incomplete = not view.is_complete(graph)
    return ScheduleDecision(
        enqueue=enqueue,
        revoke=revocation.revocations,
        wait=not enqueue and not revocation.revocations and incomplete,
        reason=revocation.reason,
        amendments=revocation.amendments_by_event,
    )


def _after_revocation(report: ProgressReport, revoked: frozenset[str]) -> ProgressReport:
    if not revoked:
        return report
    return replace(
        report,
        running={k: v for k, v in report.running.items() if k not in revoked},
        done={k: v for k, v in report.done.items() if k not in revoked},
    )


def advance(report: ProgressReport, decision: ScheduleDecision,
            completions: Sequence[CompletionRecord],
            at: float = 0.0) -> ProgressReport:
    """Fold a boundary into the next report.

    Completions move running events to done; revoked events drop out of
    running/done and join the history (bumping their next attempt); enqueued
    events start running at the boundary time. The slice index always moves
    by exactly one.
    """
    running = dict(report.running)
    done = dict(report.done)

    for completion in completions:
        entry = running.get(completion.event_id)
        if entry is None or entry.attempt != completion.attempt:
            raise UnknownCompletion(
                f"completion for {completion.event_id!r} attempt {completion.attempt}, "
                f"which is not running")
        del running[completion.event_id]
        done[completion.event_id] = DoneEntry(
            completion.event_id, completion.attempt,
            completion.artifact_id, completion.finished_at)

    history = list(report.revoked_history)
    for event_id in sorted(decision.revoke):
        if event_id in running:
            attempt = running.pop(event_id).attempt
        elif event_id in done:
            attempt = done.pop(event_id).attempt
        else:
            raise InconsistentReport(
                f"cannot revoke {event_id!r}: neither running nor done")
        history.append(RevocationEntry(report.slice_index, event_id, attempt,
                                       decision.reason or "revoked"))

    attempts_so_far: dict[str, int] = {}
    for entry in history:
        attempts_so_far[entry.event_id] = attempts_so_far.get(entry.event_id, 0) + 1
    for event_id in sorted(decision.enqueue):
        if event_id in running or event_id in done:
            raise InconsistentReport(f"cannot enqueue {event_id!r}: already started")
        attempt = 1 + attempts_so_far.get(event_id, 0)
        running[event_id] = RunningEntry(event_id, attempt, float(at))

    return ProgressReport(
        slice_index=report.slice_index + 1,
        running=running,
        done=done,
        revoked_history=tuple(history),
    )
