"""The director loop: dispatch, watch, revoke, and re-run until the cut.

One loop instance owns one run. It is the single writer of that run's
progress report and event log; workers hand results back through completion
messages (virtual occurrences or a thread-safe channel), and every message
becomes one slice boundary. The loop never dispatches an event whose revoked
predecessor is still winding down, and it re-dispatches revoked work at the
boundary after its revocation.
"""
from __future__ import annotations

import queue
import tempfile
import threading
import time as _time
import uuid
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

from .clock import Occurrence, VirtualClock
from .crew import Artifact, ExecutionContext, WorkerRegistry
from .errors import (
    Cancelled,
    DeadlockError,
    InvalidFeedback,
    ShowrunnerError,
    TargetPending,
    UnknownTarget,
    WorkerError,
    WorkerFailure,
)
from .feedback import Feedback, POLICIES, ScriptedFeedbackSource
from .graph import ValidatedGraph, ready_set
from .scheduler import (
    CompletionRecord,
    ProgressReport,
    ScheduleDecision,
    advance,
    plan,
)
from .store import EventLogRecord, RunState, RunStore

__all__ = ["RunResult", "run", "RunHandle", "start_run"]

DEFAULT_SEED = 42
DEFAULT_RETRY_BUDGET = 3


@dataclass
class RunResult:
    run_id: str
    status: str
    final_report: ProgressReport
    makespan: float
    slice_count: int
    event_log_ref: str
    final_artifacts: dict[str, Artifact] = field(default_factory=dict)
    revocation_count: int = 0
    error: str | None = None


@dataclass
class _Dispatch:
    event_id: str
    attempt: int
    cancel: threading.Event | None = None
    occurrence_handle: int = -1


class _Loop:
    """Shared boundary-processing core for both clock styles."""

    def __init__(self, graph: ValidatedGraph, workers: WorkerRegistry,
                 source: ScriptedFeedbackSource, store: RunStore, run_id: str,
                 mode: str, seed: int, clock_kind: str,
                 retry_budget: int = DEFAULT_RETRY_BUDGET):
        workers.validate_for(graph)
        self.graph = graph
        self.workers = workers
        self.source = source
        self.store = store
        self.run_id = run_id
        self.mode = mode
        self.seed = seed
        self.clock_kind = clock_kind
        self.retry_budget = retry_budget

        self.report = ProgressReport()
        self.overlays: dict[str, dict[str, Any]] = {}
        self.artifacts: dict[tuple[str, int], Artifact] = {}
        self.artifact_producer: dict[str, str] = {}
        self.live: dict[str, _Dispatch] = {}          # event id -> active dispatch
        self.awaiting_cancel: set[str] = set()
        self.writer = store.open_run(run_id)
        self.seq = 0
        self.last_boundary_time = 0.0
        self.status = "running"
        self.error: str | None = None
        self._feedback_ids: list[str] = []
        self.write_state()      # state is readable before the loop's first tick

    # -- log plumbing --------------------------------------------------------

    def emit(self, time: float, kind: str, event_id: str | None = None,
             attempt: int | None = None, payload: Mapping[str, Any] | None = None,
             slice_index: int | None = None):
        record = EventLogRecord(
            seq=self.seq, time=float(time),
            slice=self.report.slice_index if slice_index is None else slice_index,
            kind=kind, event_id=event_id, attempt=attempt, payload=payload or {})
        self.writer.append(record)
        self.seq += 1

    def write_state(self):
        self.writer.write_state(RunState(
            run_id=self.run_id, pipeline=self.graph.name, seed=self.seed,
            mode=self.mode, clock=self.clock_kind, status=self.status,
            latest_report=self.report,
            artifact_index={a.id: {"event_id": a.producer[0], "attempt": a.producer[1],
                                   "kind": a.kind, "content_hash": a.content_hash}
                            for a in self.artifacts.values()},
            feedback_ids=self._feedback_ids,
            makespan=self.makespan if self.status != "running" else None,
            slice_count=self.report.slice_index,
            error=self.error,
        ))

    @property
    def makespan(self) -> float:
        return self.last_boundary_time

    # -- boundary core -------------------------------------------------------

    def process_boundary(self, at: float, completions: list[CompletionRecord],
                         feedback: Feedback | None,
                         extra_revoke: frozenset[str] = frozenset(),
                         revoke_reason: str = "",
                         suppress_enqueue: bool = False) -> ScheduleDecision:
        """Handle one slice boundary and advance the report past it."""
        self.last_boundary_time = float(at)
        boundary_slice = self.report.slice_index
        interim = self._fold_completions(completions, at)

        for completion in completions:
            artifact = self.artifacts[(completion.event_id, completion.attempt)]
            self.writer.put_artifact(artifact)
            self.emit(at, "complete", completion.event_id, completion.attempt, {
                "artifact": artifact.id,
                "content_hash": artifact.content_hash,
                "kind": artifact.kind,
            }, slice_index=boundary_slice)
            self.live.pop(completion.event_id, None)

        feedback_error: str | None = None
        decision: ScheduleDecision
        if feedback is not None:
            self._feedback_ids.append(feedback.id)
            try:
                decision = plan(interim, feedback, self.graph, mode=self.mode,
                                artifact_producer=self.artifact_producer)
            except (UnknownTarget, TargetPending, InvalidFeedback) as exc:
                feedback_error = f"{type(exc).__name__}: {exc}"
                decision = plan(interim, None, self.graph, mode=self.mode)
            doc = {
                "id": feedback.id, "target": feedback.target,
                "kind": feedback.kind.value, "verdict": feedback.verdict,
                "note": feedback.note, "amendments": dict(feedback.amendments),
            }
            if feedback_error:
                doc["error"] = feedback_error
            self.emit(at, "feedback", payload=doc, slice_index=boundary_slice)
        else:
            decision = plan(interim, None, self.graph, mode=self.mode)

        if extra_revoke:
            decision = replace(decision, revoke=decision.revoke | extra_revoke,
                               wait=False, reason=revoke_reason or decision.reason)
        blocked = decision.enqueue & self.awaiting_cancel
        if suppress_enqueue or blocked:
            # feedback is pending at this same instant (dispatch would race the
            # verdict) or revoked workers have not acknowledged cancellation yet
            remaining = frozenset() if suppress_enqueue else decision.enqueue - blocked
            decision = replace(decision, enqueue=remaining,
                               wait=(not remaining and not decision.revoke
                                     and not interim.is_complete(self.graph)))

        revoke_attempts = {}
        for event_id in sorted(decision.revoke):
            state = interim.state_of(event_id)
            if state == "running":
                revoke_attempts[event_id] = interim.running[event_id].attempt
            elif state == "done":
                revoke_attempts[event_id] = interim.done[event_id].attempt

        next_report = advance(interim, decision, [], at=at)
        self.report = next_report       # dispatches below read the new state

        for event_id in sorted(decision.revoke):
            self.emit(at, "revoke", event_id, revoke_attempts[event_id],
                      {"reason": decision.reason or revoke_reason or "revoked"},
                      slice_index=boundary_slice)
            self._cancel_dispatch(event_id)
        for event_id, overrides in decision.amendments.items():
            merged = dict(self.overlays.get(event_id, {}))
            merged.update(overrides)
            self.overlays[event_id] = merged

        for event_id in sorted(decision.enqueue):
            entry = next_report.running[event_id]
            spec = self.graph.events[event_id]
            params = dict(spec.params)
            params.update(self.overlays.get(event_id, {}))
            duration = self.workers[spec.role].duration_for(spec, entry.attempt, self.seed)
            self.emit(at, "enqueue", event_id, entry.attempt,
                      {"role": spec.role, "duration": duration},
                      slice_index=boundary_slice)
            self._dispatch(spec, entry.attempt, params, at, duration)

        if decision.wait:
            self.emit(at, "wait", payload={"running": sorted(next_report.running)},
                      slice_index=boundary_slice)

        self.write_state()
        return decision

    def _fold_completions(self, completions: list[CompletionRecord],
                          at: float) -> ProgressReport:
        if not completions:
            return self.report
        folded = advance(self.report, ScheduleDecision(), completions, at=at)
        return replace(folded, slice_index=self.report.slice_index)

    def _inputs_for(self, spec) -> dict[str, Artifact]:
        inputs = {}
        for dep in sorted(spec.dependencies):
            entry = self.report.done.get(dep)
            if entry is None:
                raise DeadlockError(f"dispatching {spec.id!r} before {dep!r} is done")
            inputs[dep] = self.artifacts[(dep, entry.attempt)]
        return inputs

    def _register_artifact(self, artifact: Artifact):
        self.artifacts[artifact.producer] = artifact
        self.artifact_producer[artifact.id] = artifact.producer[0]

    def finish(self, at: float):
        # the finish record belongs to the final boundary, not a new one
        payload = {"status": self.status, "makespan": float(at),
                   "slices": self.report.slice_index}
        if self.error:
            payload["error"] = self.error
        self.emit(at, "finish", payload=payload,
                  slice_index=max(0, self.report.slice_index - 1))
        self.write_state()
        self.writer.close()

    def handle_worker_failure(self, event_id: str, attempt: int, error: str,
                              at: float) -> bool:
        """Log the failed attempt; False when the retry budget is exhausted."""
        terminal = attempt >= self.retry_budget
        if terminal:
            self.status = "failed"
            self.error = f"{event_id} failed {attempt} attempts: {error}"
        self.process_boundary(at, [], None, extra_revoke=frozenset([event_id]),
                              revoke_reason=f"worker-failure: {error}",
                              suppress_enqueue=terminal)
        if terminal:
            self.finish(at)
            return False
        return True

    def result(self) -> RunResult:
        final = {}
        for event_id, entry in self.report.done.items():
            final[event_id] = self.artifacts[(event_id, entry.attempt)]
        return RunResult(
            run_id=self.run_id, status=self.status, final_report=self.report,
            makespan=self.makespan, slice_count=self.report.slice_index,
            event_log_ref=str(self.store.run_dir(self.run_id) / "log.ndjson"),
            final_artifacts=final,
            revocation_count=len(self.report.revoked_history),
            error=self.error,
        )

    # clock-specific hooks
    def _dispatch(self, spec, attempt, params, at, duration):
        raise NotImplementedError

    def _cancel_dispatch(self, event_id: str):
        raise NotImplementedError


class _VirtualLoop(_Loop):
    """Inline simulated execution on the discrete-event clock."""

    def __init__(self, *args, clock: VirtualClock | None = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.clock = clock or VirtualClock()

    def _dispatch(self, spec, attempt, params, at, duration):
        worker = self.workers[spec.role]
        inputs = self._inputs_for(spec)
        try:
            if getattr(worker, "produce", None) is not None:
                artifact = worker.produce(spec, attempt, params, inputs, self.seed)
            else:
                ctx = ExecutionContext(seed=self.seed, attempt=attempt, time_scale=0.0)
                artifact = worker.execute(spec, inputs, ctx, params)
            payload = {"ok": True, "artifact": artifact}
        except (WorkerError, ShowrunnerError) as exc:
            payload = {"ok": False, "error": str(exc)}
        occ = Occurrence("completion", spec.id,
                         {"event_id": spec.id, "attempt": attempt, **payload})
        handle = self.clock.schedule_occurrence(at + duration, occ)
        self.live[spec.id] = _Dispatch(spec.id, attempt, occurrence_handle=handle)

    def _cancel_dispatch(self, event_id: str):
        dispatch = self.live.pop(event_id, None)
        if dispatch is not None and dispatch.occurrence_handle >= 0:
            self.clock.cancel(dispatch.occurrence_handle)

    def run(self) -> RunResult:
        self.emit(0.0, "start", payload={
            "pipeline": self.graph.name, "seed": self.seed, "mode": self.mode,
            "clock": "virtual", "events": len(self.graph),
        })
        for fire_at, index in self.source.time_triggers():
            occ = Occurrence("feedback", self.source.feedback_id(index), index)
            self.clock.schedule_occurrence(fire_at, occ)

        self.process_boundary(0.0, [], None)

        while True:
            nxt = self.clock.next_occurrence()
            if nxt is None:
                if self.report.is_complete(self.graph):
                    self.status = "completed"
                    self.finish(self.last_boundary_time)
                    return self.result()
                if ready_set(self.graph, self.report):
                    # revocation or review left ready work with no pending
                    # occurrence; insert a follow-up boundary right now
                    self.process_boundary(self.clock.now, [], None)
                    continue
                raise DeadlockError(
                    f"nothing running or ready but events remain: "
                    f"{sorted(self.graph.ids - self.report.done_ids())}")
            at, occ = nxt
            if occ.kind == "completion":
                info = occ.payload
                event_id, attempt = info["event_id"], info["attempt"]
                if not info["ok"]:
                    if not self.handle_worker_failure(event_id, attempt,
                                                      info["error"], at):
                        raise WorkerFailure(self.error, partial_result=self.result())
                    continue
                for fb in self.source.on_completion(event_id, at):
                    fb_occ = Occurrence("feedback", fb.id, fb)
                    self.clock.schedule_occurrence(at, fb_occ)
                self._register_artifact(info["artifact"])
                completion = CompletionRecord(event_id, attempt,
                                              info["artifact"].id, at)
                self.process_boundary(
                    at, [completion], None,
                    suppress_enqueue=self.clock.has_pending_at(at, "feedback"))
            elif occ.kind == "feedback":
                fb = occ.payload
                if isinstance(fb, int):
                    fb = self.source.emit_time_trigger(fb, at)
                self.process_boundary(
                    at, [], fb,
                    suppress_enqueue=self.clock.has_pending_at(at, "feedback"))


class _WallLoop(_Loop):
    """Threaded execution against real time; feedback may arrive live."""

    def __init__(self, *args, time_scale: float = 1.0, review_window: float = 0.0,
                 **kwargs):
        super().__init__(*args, **kwargs)
        self.time_scale = time_scale
        self.review_window = review_window
        self.channel: queue.Queue = queue.Queue()
        self._t0 = _time.monotonic()
        self._timers: list[threading.Timer] = []

    def now(self) -> float:
        return _time.monotonic() - self._t0

    def submit_feedback(self, feedback: Feedback):
        self.channel.put(("feedback", feedback))

    def _dispatch(self, spec, attempt, params, at, duration):
        worker = self.workers[spec.role]
        inputs = self._inputs_for(spec)
        cancel = threading.Event()
        self.live[spec.id] = _Dispatch(spec.id, attempt, cancel=cancel)

        def body():
            ctx = ExecutionContext(seed=self.seed, attempt=attempt, cancel=cancel,
                                   time_scale=self.time_scale)
            try:
                artifact = worker.execute(spec, inputs, ctx, params)
                self.channel.put(("completion", spec.id, attempt, artifact, None))
            except Cancelled:
                self.channel.put(("cancel_ack", spec.id, attempt))
            except Exception as exc:  # worker failures become retriable attempts
                self.channel.put(("completion", spec.id, attempt, None, str(exc)))

        threading.Thread(target=body, daemon=True,
                         name=f"{self.run_id}:{spec.id}@{attempt}").start()

    def _cancel_dispatch(self, event_id: str):
        dispatch = self.live.pop(event_id, None)
        if dispatch is not None and dispatch.cancel is not None:
            dispatch.cancel.set()
            self.awaiting_cancel.add(event_id)

    def _schedule_time_triggers(self):
        for fire_at, index in self.source.time_triggers():
            timer = threading.Timer(
                fire_at * self.time_scale,
                lambda i=index: self.channel.put(("timed_feedback", i)))
            timer.daemon = True
            timer.start()
            self._timers.append(timer)

    def run(self) -> RunResult:
        self.emit(0.0, "start", payload={
            "pipeline": self.graph.name, "seed": self.seed, "mode": self.mode,
            "clock": "wall", "events": len(self.graph),
        })
        self._schedule_time_triggers()
        self.process_boundary(0.0, [], None)

        while True:
            if self.report.is_complete(self.graph) and not self.awaiting_cancel:
                try:
                    message = self.channel.get(timeout=self.review_window or 0.001)
                except queue.Empty:
                    self.status = "completed"
                    self.finish(self.last_boundary_time)
                    return self.result()
            else:
                try:
                    message = self.channel.get(timeout=30.0)
                except queue.Empty:
                    if not self.report.running_ids() and not self.awaiting_cancel \
                            and not ready_set(self.graph, self.report):
                        raise DeadlockError("run stalled with events remaining")
                    continue
            at = self.now()
            kind = message[0]
            if kind == "completion":
                _, event_id, attempt, artifact, error = message
                entry = self.report.running.get(event_id)
                if entry is None or entry.attempt != attempt:
                    # stale result from a revoked attempt; the worker clearly
                    # finished before seeing the cancel, so count it as an ack
                    self.awaiting_cancel.discard(event_id)
                    self._maybe_resume(at)
                    continue
                if error is not None:
                    if not self.handle_worker_failure(event_id, attempt, error, at):
                        raise WorkerFailure(self.error, partial_result=self.result())
                    self._maybe_resume(at)
                    continue
                fired = self.source.on_completion(event_id, at)
                for fb in fired:
                    self.channel.put(("feedback", fb))
                self._register_artifact(artifact)
                self.process_boundary(
                    at, [CompletionRecord(event_id, attempt, artifact.id, at)], None,
                    suppress_enqueue=bool(fired))
            elif kind == "feedback":
                self.process_boundary(at, [], message[1])
                self._maybe_resume(at)
            elif kind == "timed_feedback":
                fb = self.source.emit_time_trigger(message[1], at)
                self.process_boundary(at, [], fb)
                self._maybe_resume(at)
            elif kind == "cancel_ack":
                _, event_id, attempt = message
                self.awaiting_cancel.discard(event_id)
                self._maybe_resume(at)

    def _maybe_resume(self, at: float):
        # after a revocation/ack with nothing else in flight, nothing would
        # ever wake the loop again; give ready events their boundary now
        if self.report.running_ids() or self.awaiting_cancel:
            return
        if not self.channel.empty():
            return
        if ready_set(self.graph, self.report):
            self.process_boundary(self.now(), [], None)


def run(graph: ValidatedGraph, workers: WorkerRegistry,
        feedback_source: ScriptedFeedbackSource | None = None,
        clock: VirtualClock | None = None, *,
        store: RunStore | None = None, run_id: str | None = None,
        mode: str = "parallel", seed: int = DEFAULT_SEED,
        retry_budget: int = DEFAULT_RETRY_BUDGET,
        wall: bool = False, time_scale: float = 1.0,
        review_window: float = 0.0) -> RunResult:
    """Execute a validated pipeline to completion and return its result.

    Virtual runs (the default) simulate durations on the discrete-event clock
    and are fully deterministic for a given (pipeline, seed, feedback trace).
    Pass ``wall=True`` for real threaded execution.
    """
    source = (feedback_source or ScriptedFeedbackSource([], POLICIES["NoLimits"]))
    source.bind(graph)
    store = store or RunStore(tempfile.mkdtemp(prefix="showrunner-"))
    run_id = run_id or f"run-{uuid.uuid4().hex[:8]}"
    if wall:
        loop = _WallLoop(graph, workers, source, store, run_id, mode, seed, "wall",
                         retry_budget=retry_budget, time_scale=time_scale,
                         review_window=review_window)
    else:
        loop = _VirtualLoop(graph, workers, source, store, run_id, mode, seed,
                            "virtual", retry_budget=retry_budget, clock=clock)
    return loop.run()


class RunHandle:
    """A run executing on its own thread, accepting live feedback."""

    def __init__(self, loop: _Loop, thread: threading.Thread):
        self._loop = loop
        self.thread = thread
        self.result: RunResult | None = None
        self.exception: Exception | None = None

    @property
    def run_id(self) -> str:
        return self._loop.run_id

    def submit_feedback(self, feedback: Feedback) -> str:
        if not isinstance(self._loop, _WallLoop):
            raise RunClosedForFeedback("virtual-clock runs accept feedback only "
                                       "through their trace")
        self._loop.submit_feedback(feedback)
        return feedback.id

    def join(self, timeout: float | None = None):
        self.thread.join(timeout)


class RunClosedForFeedback(ShowrunnerError):
    pass


def start_run(graph: ValidatedGraph, workers: WorkerRegistry,
              feedback_source: ScriptedFeedbackSource | None = None, *,
              store: RunStore, run_id: str, mode: str = "parallel",
              seed: int = DEFAULT_SEED, wall: bool = False,
              time_scale: float = 1.0, review_window: float = 0.0,
              retry_budget: int = DEFAULT_RETRY_BUDGET) -> RunHandle:
    """Launch a run on a background thread (the service entry point)."""
    source = (feedback_source or ScriptedFeedbackSource([], POLICIES["NoLimits"]))
    source.bind(graph)
    if wall:
        loop: _Loop = _WallLoop(graph, workers, source, store, run_id, mode, seed,
                                "wall", retry_budget=retry_budget,
                                time_scale=time_scale, review_window=review_window)
    else:
        loop = _VirtualLoop(graph, workers, source, store, run_id, mode, seed,
                            "virtual", retry_budget=retry_budget)
    handle: RunHandle

    def body():
        try:
            handle.result = loop.run()
        except WorkerFailure as exc:
            handle.result = exc.partial_result
            handle.exception = exc
        except Exception as exc:       # surface in state for the API
            handle.exception = exc
            loop.status = "failed"
            loop.error = str(exc)
            try:
                loop.finish(loop.last_boundary_time)
            except Exception:
                pass

    thread = threading.Thread(target=body, daemon=True, name=f"run:{run_id}")
    handle = RunHandle(loop, thread)
    thread.start()
    return handle
