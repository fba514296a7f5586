"""Append-only run persistence and deterministic replay.

Each run owns a directory: ``log.ndjson`` (one JSON record per transition),
``artifacts/`` (payloads stored verbatim, content-addressed ids), and
``state.json`` (latest summary). The log is the source of truth: folding it
from seq 0 reconstructs the progress report, which is how ``replay`` verifies
a run. One writer per run; readers tail concurrently without blocking it.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping

from ._canon import canonical_json
from .crew import Artifact
from .errors import CorruptLog, RunClosed, SequenceGap, UnknownRun
from .scheduler import (
    DoneEntry,
    ProgressReport,
    RevocationEntry,
    RunningEntry,
)

__all__ = ["EventLogRecord", "RunState", "RunStore", "RunWriter", "replay_records"]

KINDS = ("start", "enqueue", "revoke", "complete", "feedback", "wait", "finish")


@dataclass(frozen=True)
class EventLogRecord:
    """One state transition; the log is the ordered list of these."""

    seq: int
    time: float
    slice: int
    kind: str
    event_id: str | None = None
    attempt: int | None = None
    payload: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CorruptLog(f"unknown record kind {self.kind!r}")
        object.__setattr__(self, "payload", dict(self.payload))

    def to_line(self) -> str:
        return canonical_json({
            "seq": self.seq, "time": self.time, "slice": self.slice,
            "kind": self.kind, "event_id": self.event_id,
            "attempt": self.attempt, "payload": self.payload,
        })

    @staticmethod
    def from_line(line: str) -> "EventLogRecord":
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptLog(f"unparseable log line: {exc}") from exc
        return EventLogRecord(
            seq=doc["seq"], time=doc["time"], slice=doc["slice"], kind=doc["kind"],
            event_id=doc.get("event_id"), attempt=doc.get("attempt"),
            payload=doc.get("payload") or {},
        )


@dataclass
class RunState:
    """Latest view of one run, reconstructible from its log."""

    run_id: str
    pipeline: str = ""
    seed: int = 42
    mode: str = "parallel"
    clock: str = "virtual"
    status: str = "running"            # running | completed | failed
    latest_report: ProgressReport = field(default_factory=ProgressReport)
    artifact_index: dict[str, dict[str, Any]] = field(default_factory=dict)
    feedback_ids: list[str] = field(default_factory=list)
    makespan: float | None = None
    slice_count: int = 0
    error: str | None = None

    def to_payload(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id, "pipeline": self.pipeline, "seed": self.seed,
            "mode": self.mode, "clock": self.clock, "status": self.status,
            "latest_report": self.latest_report.to_payload(),
            "artifact_index": self.artifact_index,
            "feedback_ids": self.feedback_ids,
            "makespan": self.makespan, "slice_count": self.slice_count,
            "error": self.error,
        }

    @staticmethod
    def from_payload(doc: Mapping[str, Any]) -> "RunState":
        return RunState(
            run_id=doc["run_id"], pipeline=doc["pipeline"], seed=doc["seed"],
            mode=doc["mode"], clock=doc["clock"], status=doc["status"],
            latest_report=ProgressReport.from_payload(doc["latest_report"]),
            artifact_index=dict(doc["artifact_index"]),
            feedback_ids=list(doc["feedback_ids"]),
            makespan=doc["makespan"], slice_count=doc["slice_count"],
            error=doc.get("error"),
        )


class _RunEntry:
    def __init__(self):
        self.records: list[EventLogRecord] = []
        self.artifacts: dict[str, Artifact] = {}
        self.state_doc: dict[str, Any] | None = None
        self.closed = False
        self.cond = threading.Condition()


class RunWriter:
    """Single-writer handle for one run's log and artifacts."""

    def __init__(self, store: "RunStore", run_id: str):
        self._store = store
        self.run_id = run_id
        self._dir = store.run_dir(run_id)
        (self._dir / "artifacts").mkdir(parents=True, exist_ok=True)
        self._log = open(self._dir / "log.ndjson", "a", encoding="utf-8")

    def append(self, record: EventLogRecord) -> int:
        entry = self._store._entry(self.run_id)
        with entry.cond:
            if entry.closed:
                raise RunClosed(f"run {self.run_id} accepts no more records")
            expected = len(entry.records)
            if record.seq != expected:
                raise SequenceGap(f"expected seq {expected}, got {record.seq}")
            self._log.write(record.to_line() + "\n")
            self._log.flush()
            entry.records.append(record)
            entry.cond.notify_all()
        return record.seq

    def put_artifact(self, artifact: Artifact):
        doc = {
            "id": artifact.id,
            "producer": list(artifact.producer),
            "kind": artifact.kind,
            "payload": dict(artifact.payload),
            "content_hash": artifact.content_hash,
        }
        path = self._dir / "artifacts" / f"{artifact.id}.json"
        path.write_text(canonical_json(doc) + "\n", encoding="utf-8")
        entry = self._store._entry(self.run_id)
        with entry.cond:
            entry.artifacts[artifact.id] = artifact

    def write_state(self, state: RunState):
        doc = state.to_payload()
        (self._dir / "state.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        entry = self._store._entry(self.run_id)
        with entry.cond:
            entry.state_doc = doc

    def close(self):
        entry = self._store._entry(self.run_id)
        with entry.cond:
            entry.closed = True
            entry.cond.notify_all()
        self._log.close()


class RunStore:
    """Directory of runs; creates writers and serves concurrent readers."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._entries: dict[str, _RunEntry] = {}
        self._lock = threading.Lock()

    def run_dir(self, run_id: str) -> Path:
        return self.root / run_id

    def _entry(self, run_id: str) -> _RunEntry:
        with self._lock:
            entry = self._entries.get(run_id)
            if entry is None:
                entry = self._entries[run_id] = _RunEntry()
            return entry

    def open_run(self, run_id: str) -> RunWriter:
        if self.run_dir(run_id).exists() and (self.run_dir(run_id) / "log.ndjson").exists():
            raise RunClosed(f"run {run_id} already exists")
        self.run_dir(run_id).mkdir(parents=True, exist_ok=True)
        self._entry(run_id)
        return RunWriter(self, run_id)

    def _load_from_disk(self, run_id: str) -> _RunEntry:
        run_dir = self.run_dir(run_id)
        if not (run_dir / "log.ndjson").exists():
            raise UnknownRun(f"no such run: {run_id}")
        entry = self._entry(run_id)
        with entry.cond:
            if entry.records:
                return entry
            text = (run_dir / "log.ndjson").read_text(encoding="utf-8")
            entry.records = [EventLogRecord.from_line(line)
                             for line in text.splitlines() if line.strip()]
            for path in sorted((run_dir / "artifacts").glob("*.json")):
                doc = json.loads(path.read_text(encoding="utf-8"))
                entry.artifacts[doc["id"]] = Artifact(
                    id=doc["id"], producer=tuple(doc["producer"]), kind=doc["kind"],
                    payload=doc["payload"], content_hash=doc["content_hash"])
            state_path = run_dir / "state.json"
            if state_path.exists():
                entry.state_doc = json.loads(state_path.read_text(encoding="utf-8"))
            entry.closed = any(r.kind == "finish" for r in entry.records)
        return entry

    def _live_entry(self, run_id: str) -> _RunEntry:
        with self._lock:
            entry = self._entries.get(run_id)
        if entry is None or (not entry.records and not entry.state_doc):
            entry = self._load_from_disk(run_id)
        return entry

    def list_runs(self) -> list[str]:
        on_disk = {p.name for p in self.root.iterdir()
                   if (p / "log.ndjson").exists()} if self.root.exists() else set()
        with self._lock:
            cached = set(self._entries)
        return sorted(on_disk | cached)

    def records(self, run_id: str, from_seq: int = 0,
                limit: int | None = None) -> list[EventLogRecord]:
        entry = self._live_entry(run_id)
        with entry.cond:
            chunk = entry.records[from_seq:]
        return chunk[:limit] if limit is not None else chunk

    def wait_for(self, run_id: str, seq: int, timeout: float = 5.0) -> bool:
        """Block until record ``seq`` exists or the run closes. True if it exists."""
        entry = self._live_entry(run_id)
        with entry.cond:
            entry.cond.wait_for(lambda: len(entry.records) > seq or entry.closed,
                                timeout=timeout)
            return len(entry.records) > seq

    def is_closed(self, run_id: str) -> bool:
        entry = self._live_entry(run_id)
        with entry.cond:
            return entry.closed

    def read_state(self, run_id: str) -> RunState:
        entry = self._live_entry(run_id)
        with entry.cond:
            if entry.state_doc is None:
                raise UnknownRun(f"run {run_id} has no state yet")
            return RunState.from_payload(entry.state_doc)

    def get_artifact(self, run_id: str, artifact_id: str) -> Artifact:
        entry = self._live_entry(run_id)
        with entry.cond:
            artifact = entry.artifacts.get(artifact_id)
        if artifact is None:
            raise UnknownRun(f"run {run_id} has no artifact {artifact_id}")
        return artifact

    def replay(self, run_id: str) -> RunState:
        """Rebuild the run state from the log alone (the verification path)."""
        return replay_records(run_id, self.records(run_id))


class LogFold:
    """Incremental fold of log records through the progress state machine.

    This is intentionally independent of the scheduler's ``advance`` so that a
    replayed report cross-checks the loop instead of reusing it. Raises
    CorruptLog whenever a record violates a transition precondition.
    """

    def __init__(self, run_id: str):
        self._state = RunState(run_id=run_id)
        self._running: dict[str, tuple[int, float]] = {}
        self._done: dict[str, DoneEntry] = {}
        self._history: list[RevocationEntry] = []
        self._revoke_counts: dict[str, int] = {}
        self._last_seq = -1
        self._last_slice = -1
        self._saw_start = False

    def feed(self, record: EventLogRecord):
        if record.seq != self._last_seq + 1:
            raise CorruptLog(f"seq jumps from {self._last_seq} to {record.seq}")
        self._last_seq = record.seq
        if record.slice < self._last_slice:
            raise CorruptLog(f"slice goes backwards at seq {record.seq}")
        self._last_slice = max(self._last_slice, record.slice)

        state, kind = self._state, record.kind
        if kind == "start":
            if self._saw_start:
                raise CorruptLog("second start record")
            self._saw_start = True
            state.pipeline = record.payload.get("pipeline", "")
            state.seed = record.payload.get("seed", 42)
            state.mode = record.payload.get("mode", "parallel")
            state.clock = record.payload.get("clock", "virtual")
            return
        if not self._saw_start:
            raise CorruptLog(f"{kind} record before start")

        event = record.event_id
        running, done = self._running, self._done
        if kind == "enqueue":
            if event in running or event in done:
                raise CorruptLog(f"enqueue of already-started event {event!r}")
            expected = 1 + self._revoke_counts.get(event, 0)
            if record.attempt != expected:
                raise CorruptLog(f"enqueue of {event!r} at attempt {record.attempt}, "
                                 f"expected {expected}")
            running[event] = (record.attempt, record.time)
        elif kind == "complete":
            if event not in running or running[event][0] != record.attempt:
                raise CorruptLog(f"completion of {event!r} attempt {record.attempt} "
                                 f"which never started")
            del running[event]
            done[event] = DoneEntry(event, record.attempt,
                                    record.payload.get("artifact", ""), record.time)
            art_id = record.payload.get("artifact")
            if art_id:
                state.artifact_index[art_id] = {
                    "event_id": event, "attempt": record.attempt,
                    "kind": record.payload.get("kind", ""),
                    "content_hash": record.payload.get("content_hash", ""),
                }
        elif kind == "revoke":
            if event in running and running[event][0] == record.attempt:
                del running[event]
            elif event in done and done[event].attempt == record.attempt:
                del done[event]
            else:
                raise CorruptLog(f"revocation of {event!r} attempt {record.attempt} "
                                 f"which is neither running nor done")
            self._revoke_counts[event] = self._revoke_counts.get(event, 0) + 1
            self._history.append(RevocationEntry(record.slice, event, record.attempt,
                                                 record.payload.get("reason", "revoked")))
        elif kind == "feedback":
            fb_id = record.payload.get("id")
            if fb_id:
                state.feedback_ids.append(fb_id)
        elif kind == "finish":
            state.status = record.payload.get("status", "completed")
            state.makespan = record.payload.get("makespan")
            state.error = record.payload.get("error")
        # wait records carry no state change

    def state(self) -> RunState:
        out = self._state
        out.slice_count = self._last_slice + 1 if self._last_slice >= 0 else 0
        out.latest_report = ProgressReport(
            slice_index=out.slice_count,
            running={e: RunningEntry(e, a, t) for e, (a, t) in self._running.items()},
            done=dict(self._done),
            revoked_history=tuple(self._history),
        )
        return out


def replay_records(run_id: str, records: list[EventLogRecord]) -> RunState:
    fold = LogFold(run_id)
    for record in records:
        fold.feed(record)
    return fold.state()
