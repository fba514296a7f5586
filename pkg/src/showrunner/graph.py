"""Production pipelines as dependency graphs.

A pipeline is an ordered list of events; each event names the events that must
be done before it may start. Validation produces an immutable graph that the
scheduler and all analysis helpers share.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any

from .errors import (
    CycleError,
    DuplicateId,
    MissingDuration,
    InvalidParams,
    UnknownDependency,
    UnknownId,
)

__all__ = [
    "EventSpec",
    "PipelineDef",
    "ValidatedGraph",
    "validate_pipeline",
    "ready_set",
    "transitive_dependents",
    "critical_path",
    "serial_makespan",
]


@dataclass(frozen=True)
class EventSpec:
    """One production task: who runs it, with what parameters, after what."""

    id: str
    role: str = "crew"
    params: Mapping[str, Any] = field(default_factory=dict)
    dependencies: frozenset[str] = frozenset()
    duration: float | None = None

    def __post_init__(self):
        if not self.id:
            raise InvalidParams("event id must be nonempty")
        object.__setattr__(self, "dependencies", frozenset(self.dependencies))
        object.__setattr__(self, "params", dict(self.params))
        if self.id in self.dependencies:
            raise CycleError(f"event {self.id!r} depends on itself", cycle=(self.id,))
        if self.duration is not None and self.duration < 0:
            raise InvalidParams(f"event {self.id!r} has negative duration")


@dataclass(frozen=True)
class PipelineDef:
    """Named, ordered collection of events; validated before use."""

    name: str
    events: tuple[EventSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))


class ValidatedGraph:
    """Acyclic event graph with resolved references and a fixed topo order.

    Instances are immutable after construction and safe to share across
    concurrent readers; every method is a pure function of the graph.
    """

    def __init__(self, name: str, events: Mapping[str, EventSpec],
                 dependents: Mapping[str, frozenset[str]], topo_order: tuple[str, ...]):
        self.name = name
        self.events: dict[str, EventSpec] = dict(events)
        self.dependents_of: dict[str, frozenset[str]] = dict(dependents)
        self.topo_order = tuple(topo_order)
        self._topo_rank = {eid: i for i, eid in enumerate(self.topo_order)}

    def __len__(self) -> int:
        return len(self.events)

    def __contains__(self, event_id: str) -> bool:
        return event_id in self.events

    @property
    def ids(self) -> frozenset[str]:
        return frozenset(self.events)

    @property
    def edge_count(self) -> int:
        return sum(len(self.events[e].dependencies) for e in self.events)

    def dependencies(self, event_id: str) -> frozenset[str]:
        self._check(event_id)
        return self.events[event_id].dependencies

    def dependents(self, event_id: str) -> frozenset[str]:
        self._check(event_id)
        return self.dependents_of[event_id]

    def topo_rank(self, event_id: str) -> int:
        self._check(event_id)
        return self._topo_rank[event_id]

    def roots(self) -> list[str]:
        return [e for e in self.topo_order if not self.events[e].dependencies]

    def sinks(self) -> list[str]:
        return [e for e in self.topo_order if not self.dependents_of[e]]

    def duration_map(self, overrides: Mapping[str, float] | None = None,
                     default: float | None = None) -> dict[str, float]:
        """Durations declared on the events, with optional overrides/fallback."""
        out: dict[str, float] = {}
        overrides = overrides or {}
        for eid, spec in self.events.items():
            if eid in overrides:
                out[eid] = float(overrides[eid])
            elif spec.duration is not None:
                out[eid] = float(spec.duration)
            elif default is not None:
                out[eid] = float(default)
            else:
                raise MissingDuration(f"no duration for event {eid!r}")
        return out

    def _check(self, event_id: str):
        if event_id not in self.events:
            raise UnknownId(f"unknown event {event_id!r}")


def validate_pipeline(pipeline: PipelineDef) -> ValidatedGraph:
    """Check ids, references, and acyclicity; return the shared graph form.

    Raises DuplicateId, UnknownDependency, or CycleError (naming one cycle).
    """
    events: dict[str, EventSpec] = {}
    for spec in pipeline.events:
        if spec.id in events:
            raise DuplicateId(f"duplicate event id {spec.id!r}")
        events[spec.id] = spec

    dependents: dict[str, set[str]] = {eid: set() for eid in events}
    for spec in pipeline.events:
        for dep in spec.dependencies:
            if dep not in events:
                raise UnknownDependency(
                    f"event {spec.id!r} depends on undeclared event {dep!r}")
            dependents[dep].add(spec.id)

    topo = _topo_sort(events, dependents)
    frozen = {eid: frozenset(deps) for eid, deps in dependents.items()}
    return ValidatedGraph(pipeline.name, events, frozen, topo)


def _topo_sort(events: Mapping[str, EventSpec],
               dependents: Mapping[str, set[str]]) -> tuple[str, ...]:
    """Kahn's algorithm, smallest id first; raises CycleError naming one cycle."""
    import heapq

    indegree = {eid: len(spec.dependencies) for eid, spec in events.items()}
    heap = [eid for eid, deg in indegree.items() if deg == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        eid = heapq.heappop(heap)
        order.append(eid)
        for dep in dependents[eid]:
            indegree[dep] -= 1
            if indegree[dep] == 0:
                heapq.heappush(heap, dep)
    if len(order) != len(events):
        cycle = _find_cycle(events, {eid for eid, d in indegree.items() if d > 0})
        raise CycleError(f"pipeline has a cycle: {' -> '.join(cycle)}", cycle=cycle)
    return tuple(order)


def _find_cycle(events: Mapping[str, EventSpec], suspects: set[str]) -> tuple[str, ...]:
    # Walk dependency edges inside the unresolved set until a node repeats.
    start = min(suspects)
    path: list[str] = []
    seen: dict[str, int] = {}
    node = start
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = min(d for d in events[node].dependencies if d in suspects)
    return tuple(path[seen[node]:])


def ready_set(graph: ValidatedGraph, report) -> set[str]:
    """Events that are pending and whose every dependency is done.

    ``report`` supplies ``done_ids()`` and ``running_ids()``; running, done,
    and already-dispatched events are never ready.
    """
    done = report.done_ids()
    busy = report.running_ids() | done
    return {
        eid for eid in graph.events
        if eid not in busy and graph.events[eid].dependencies <= done
    }


def transitive_dependents(graph: ValidatedGraph, event_id: str) -> set[str]:
    """Everything reachable from ``event_id`` along dependency->dependent edges."""
    graph._check(event_id)
    out: set[str] = set()
    frontier = [event_id]
    while frontier:
        node = frontier.pop()
        for dep in graph.dependents_of[node]:
            if dep not in out:
                out.add(dep)
                frontier.append(dep)
    return out


def critical_path(graph: ValidatedGraph,
                  durations: Mapping[str, float]) -> tuple[float, list[str]]:
    """Longest root-to-sink chain by total duration.

    Ties break toward the lexicographically smallest id sequence, which keeps
    the result deterministic for equal-length chains.
    """
    _require_durations(graph, durations)
    # Best suffix from each node to a sink, computed against topo order
    # reversed. Suffixes starting at distinct children differ at their first
    # element, so (length desc, child id asc) picks the canonical chain.
    best: dict[str, tuple[float, tuple[str, ...]]] = {}
    for eid in reversed(graph.topo_order):
        children = graph.dependents_of[eid]
        if not children:
            best[eid] = (float(durations[eid]), (eid,))
            continue
        length, tail = max(
            (best[c] for c in children),
            key=lambda item: (item[0], _NegLex(item[1])),
        )
        best[eid] = (float(durations[eid]) + length, (eid,) + tail)
    length, path = max(
        (best[r] for r in graph.roots()),
        key=lambda item: (item[0], _NegLex(item[1])),
    )
    return length, list(path)


class _NegLex:
    """Orders sequences so that max() prefers the lexicographically smallest."""

    __slots__ = ("seq",)

    def __init__(self, seq: tuple[str, ...]):
        self.seq = seq

    def __lt__(self, other: "_NegLex") -> bool:
        return self.seq > other.seq

    def __eq__(self, other) -> bool:
        return self.seq == other.seq


def serial_makespan(graph: ValidatedGraph, durations: Mapping[str, float]) -> float:
    """Total duration when every event runs back to back."""
    _require_durations(graph, durations)
    return float(sum(durations[eid] for eid in graph.events))


def _require_durations(graph: ValidatedGraph, durations: Mapping[str, float]):
    missing = sorted(set(graph.events) - set(durations))
    if missing:
        raise MissingDuration(f"no duration for events: {', '.join(missing)}")
    negative = sorted(e for e in graph.events if durations[e] < 0)
    if negative:
        raise InvalidParams(f"negative durations for: {', '.join(negative)}")
