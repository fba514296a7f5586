"""User feedback: verdicts on intermediate results and what they invalidate.

A rejection revokes its target plus every dependent that already started;
untouched pending dependents simply lose a satisfied dependency and wait.
Interpretation is deterministic and pure, so runs replay bit-exactly.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .errors import InvalidFeedback, TargetPending, TraceTriggerUnknown, UnknownTarget
from .graph import ValidatedGraph, transitive_dependents

__all__ = [
    "FeedbackKind",
    "Feedback",
    "RevocationPlan",
    "FrequencyPolicy",
    "POLICIES",
    "interpret",
    "TraceItem",
    "ScriptedFeedbackSource",
]


class FeedbackKind(str, enum.Enum):
    YES_NO = "YesNo"
    CRITICAL = "Critical"
    DETAILED = "Detailed"


@dataclass(frozen=True)
class Feedback:
    """One user verdict on an event's (or artifact's) current result."""

    id: str
    arrival_time: float
    target: str
    kind: FeedbackKind
    verdict: str                                  # approve | reject
    note: str = ""
    amendments: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", FeedbackKind(self.kind))
        object.__setattr__(self, "amendments", dict(self.amendments))
        if self.verdict not in ("approve", "reject"):
            raise InvalidFeedback(f"verdict must be approve|reject, got {self.verdict!r}")
        if self.kind is FeedbackKind.YES_NO and (self.note or self.amendments):
            raise InvalidFeedback("YesNo feedback carries no note or amendments")
        if self.kind is FeedbackKind.CRITICAL:
            if not self.note:
                raise InvalidFeedback("Critical feedback requires a note")
            if self.amendments:
                raise InvalidFeedback("Critical feedback carries no amendments")
        if self.kind is FeedbackKind.DETAILED and not self.note:
            raise InvalidFeedback("Detailed feedback requires a note")


@dataclass(frozen=True)
class RevocationPlan:
    revocations: frozenset[str]
    amendments_by_event: Mapping[str, Mapping[str, Any]]
    reason: str                                   # feedback id

    def __post_init__(self):
        object.__setattr__(self, "revocations", frozenset(self.revocations))
        object.__setattr__(self, "amendments_by_event", dict(self.amendments_by_event))
        extra = set(self.amendments_by_event) - self.revocations
        if extra:
            raise InvalidFeedback(f"amendments for unrevoked events: {sorted(extra)}")

    @property
    def empty(self) -> bool:
        return not self.revocations


def interpret(feedback: Feedback, report, graph: ValidatedGraph,
              artifact_producer: Mapping[str, str] | None = None) -> RevocationPlan:
    """Turn a verdict into the set of events to revoke, plus param overrides.

    The target may be an event id or an artifact id (resolved to its producing
    event). Approvals revoke nothing. Rejections revoke the target and cascade
    to every transitive dependent already running or done, because their
    inputs are now stale.
    """
    target = feedback.target
    if target not in graph:
        resolved = (artifact_producer or {}).get(target)
        if resolved is None:
            raise UnknownTarget(f"feedback target {target!r} is neither an event "
                                f"nor a known artifact")
        target = resolved
    state = _state_of(report, target)
    if state == "pending":
        raise TargetPending(f"event {target!r} has not started; nothing to revoke")

    if feedback.verdict == "approve":
        return RevocationPlan(frozenset(), {}, feedback.id)

    revoked = {target}
    for dep in transitive_dependents(graph, target):
        if _state_of(report, dep) in ("running", "done"):
            revoked.add(dep)
    amendments = _amendments_for(feedback)
    by_event = {target: amendments} if amendments else {}
    return RevocationPlan(frozenset(revoked), by_event, feedback.id)


def _amendments_for(feedback: Feedback) -> dict[str, Any]:
    if feedback.kind is FeedbackKind.DETAILED and feedback.amendments:
        return dict(feedback.amendments)
    if feedback.note:
        # Critical comments (and Detailed ones without explicit overrides)
        # ride along as a note the re-executed worker can act on.
        return {"director_note": feedback.note}
    return {}


def _state_of(report, event_id: str) -> str:
    if event_id in report.running_ids():
        return "running"
    if event_id in report.done_ids():
        return "done"
    return "pending"


@dataclass(frozen=True)
class FrequencyPolicy:
    """How often the user is allowed to weigh in during a run."""

    name: str
    max_interactions: int | None          # None = unlimited
    eligible_points: str = "after-each-event"   # | after-milestones | final-only
    milestones: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "milestones", frozenset(self.milestones))
        if self.name == "None" and self.max_interactions != 0:
            raise InvalidFeedback("policy 'None' means zero interactions")


# Interaction caps for the named policies are configuration defaults, not
# measured quantities: Low allows one interaction, Intermediate three.
POLICIES: dict[str, FrequencyPolicy] = {
    "None": FrequencyPolicy("None", 0),
    "Low": FrequencyPolicy("Low", 1),
    "Intermediate": FrequencyPolicy("Intermediate", 3),
    "NoLimits": FrequencyPolicy("NoLimits", None),
}


@dataclass(frozen=True)
class TraceItem:
    """A scripted feedback plus when it fires.

    ``trigger`` is either an event id (fires at that event's completion) or a
    number (fires at that virtual time).
    """

    trigger: str | float
    feedback_fields: Mapping[str, Any]

    def is_time_trigger(self) -> bool:
        return isinstance(self.trigger, (int, float))


class ScriptedFeedbackSource:
    """Deterministic feedback stream driven by a trace and a frequency policy.

    Items are capped in trace order: with a policy allowing N interactions only
    the first N eligible items ever fire. Each item fires at most once.
    """

    def __init__(self, trace: Sequence[TraceItem],
                 policy: FrequencyPolicy = POLICIES["NoLimits"]):
        self.policy = policy
        self._trace = list(trace)
        self._items = self._select(sinks=None)
        self._fired = [False] * len(self._items)

    def _select(self, sinks: set[str] | None) -> list[TraceItem]:
        # eligibility first, then the cap, both in trace order
        points = self.policy.eligible_points
        eligible = []
        for item in self._trace:
            if item.is_time_trigger():
                eligible.append(item)
            elif points == "after-milestones":
                if item.trigger in self.policy.milestones:
                    eligible.append(item)
            elif points == "final-only":
                if sinks is None or item.trigger in sinks:
                    eligible.append(item)
            else:
                eligible.append(item)
        if self.policy.max_interactions is not None:
            eligible = eligible[: self.policy.max_interactions]
        return eligible

    def bind(self, graph: ValidatedGraph):
        """Validate triggers against the graph; raises TraceTriggerUnknown."""
        for item in self._trace:
            if item.is_time_trigger():
                if float(item.trigger) < 0:
                    raise TraceTriggerUnknown(f"negative trigger time {item.trigger}")
            elif item.trigger not in graph:
                raise TraceTriggerUnknown(f"trigger {item.trigger!r} is not an event")
        self._items = self._select(sinks=set(graph.sinks()))
        self._fired = [False] * len(self._items)
        return self

    def feedback_id(self, index: int) -> str:
        return str(self._items[index].feedback_fields.get("id", f"fb-{index}"))

    def _make_feedback(self, index: int, at: float) -> Feedback:
        fields = dict(self._items[index].feedback_fields)
        fields.setdefault("id", f"fb-{index}")
        fields["arrival_time"] = float(at)
        return Feedback(**fields)

    def time_triggers(self) -> list[tuple[float, int]]:
        """(fire time, item index) for every time-triggered item."""
        return [(float(item.trigger), i) for i, item in enumerate(self._items)
                if item.is_time_trigger()]

    def on_completion(self, event_id: str, at: float) -> list[Feedback]:
        """Feedback items released by this completion, in trace order."""
        out = []
        for i, item in enumerate(self._items):
            if self._fired[i] or item.is_time_trigger():
                continue
            if item.trigger == event_id:
                self._fired[i] = True
                out.append(self._make_feedback(i, at))
        return out

    def emit_time_trigger(self, index: int, at: float) -> Feedback:
        self._fired[index] = True
        return self._make_feedback(index, at)

    @property
    def exhausted(self) -> bool:
        return all(self._fired)
