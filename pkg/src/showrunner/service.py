"""HTTP interface for the director console: runs, live streams, feedback.

Endpoints
---------
POST /runs                      create a run (preset or inline pipeline)
GET  /runs                      run summaries
GET  /runs/{id}                 latest run state
GET  /runs/{id}/log             paged records (?from_seq=&limit=)
GET  /runs/{id}/stream          server-sent events, one record per message,
                                resumable with ?from_seq=
POST /runs/{id}/feedback        submit a verdict into the live loop
GET  /runs/{id}/artifacts/{aid} artifact payload plus content hash
GET  /runs/{id}/gantt           rows of {event, attempt, start, end, revoked}

Every mutation flows through the owning run's scheduler loop; streams are
independent log readers and never block the writer.
"""
from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path
from typing import Any, Mapping

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse, StreamingResponse
from pydantic import BaseModel, Field

from .errors import (
    InvalidFeedback,
    ShowrunnerError,
    TargetPending,
    UnknownRun,
    UnknownTarget,
    ValidationFailure,
)
from .crew import mock_registry_for
from .feedback import Feedback, POLICIES, ScriptedFeedbackSource
from .fileformats import load_preset, parse_pipeline_doc, parse_trace_doc
from .graph import ValidatedGraph, ready_set, validate_pipeline
from .runner import RunClosedForFeedback, RunHandle, start_run
from .store import EventLogRecord, RunStore

__all__ = ["RunManager", "create_app", "gantt_rows"]


class RunRequest(BaseModel):
    preset: str | None = None
    pipeline: dict[str, Any] | None = None
    mode: str = "parallel"                  # parallel | serial
    seed: int = 42
    clock: str = "virtual"                  # virtual | wall
    feedback_trace: list[dict[str, Any]] | None = None
    time_scale: float = 1.0
    review_window: float = 0.0
    policy: str = "NoLimits"


class FeedbackRequest(BaseModel):
    target: str
    kind: str = "YesNo"
    verdict: str = "approve"
    note: str = ""
    amendments: dict[str, Any] = Field(default_factory=dict)


def gantt_rows(records: list[EventLogRecord]) -> list[dict[str, Any]]:
    """One row per (event, attempt): start, end, and whether it was revoked."""
    rows: dict[tuple[str, int], dict[str, Any]] = {}
    for record in records:
        if record.event_id is None or record.attempt is None:
            continue
        key = (record.event_id, record.attempt)
        if record.kind == "enqueue":
            rows[key] = {"event": record.event_id, "attempt": record.attempt,
                         "start": record.time, "end": None, "revoked": False}
        elif record.kind == "complete" and key in rows:
            rows[key]["end"] = record.time
        elif record.kind == "revoke" and key in rows:
            rows[key]["end"] = record.time
            rows[key]["revoked"] = True
    return [rows[key] for key in sorted(rows)]


class RunManager:
    """Owns the store and one background loop per active run."""

    def __init__(self, store_root: str | Path, time_scale: float = 1.0):
        self.store = RunStore(store_root)
        self.default_time_scale = time_scale
        self._handles: dict[str, RunHandle] = {}
        self._graphs: dict[str, ValidatedGraph] = {}
        self._lock = threading.Lock()

    def _graph_for(self, request: RunRequest) -> ValidatedGraph:
        if request.pipeline is not None:
            return validate_pipeline(parse_pipeline_doc(request.pipeline))
        return validate_pipeline(load_preset(request.preset or "film"))

    def create(self, request: RunRequest) -> str:
        graph = self._graph_for(request)
        if request.clock not in ("virtual", "wall"):
            raise ValidationFailure(f"unknown clock {request.clock!r}")
        if request.mode not in ("parallel", "serial"):
            raise ValidationFailure(f"unknown mode {request.mode!r}")
        policy = POLICIES.get(request.policy)
        if policy is None:
            raise ValidationFailure(f"unknown policy {request.policy!r}")
        trace = parse_trace_doc(request.feedback_trace)
        source = ScriptedFeedbackSource(trace, policy)
        run_id = f"run-{uuid.uuid4().hex[:10]}"
        handle = start_run(
            graph, mock_registry_for(graph), source,
            store=self.store, run_id=run_id, mode=request.mode, seed=request.seed,
            wall=request.clock == "wall",
            time_scale=request.time_scale or self.default_time_scale,
            review_window=request.review_window,
        )
        with self._lock:
            self._handles[run_id] = handle
            self._graphs[run_id] = graph
        return run_id

    def submit_feedback(self, run_id: str, request: FeedbackRequest) -> str:
        state = self.store.read_state(run_id)
        if self.store.is_closed(run_id) or state.status != "running":
            raise RunClosedError(f"run {run_id} is {state.status}; "
                                 f"its review window has closed")
        with self._lock:
            handle = self._handles.get(run_id)
            graph = self._graphs.get(run_id)
        known = set(state.artifact_index) | (graph.ids if graph else set()) \
            | set(state.latest_report.running_ids()) \
            | set(state.latest_report.done_ids())
        if request.target not in known:
            raise UnknownTarget(f"target {request.target!r} is neither an event "
                                f"nor a known artifact")
        if handle is None:
            raise RunClosedError(f"run {run_id} has no live loop")
        feedback = Feedback(
            id=f"fb-live-{uuid.uuid4().hex[:8]}",
            arrival_time=0.0,               # stamped by the loop on arrival
            target=request.target, kind=request.kind, verdict=request.verdict,
            note=request.note, amendments=request.amendments,
        )
        return handle.submit_feedback(feedback)

    def ready_events(self, run_id: str) -> list[str]:
        with self._lock:
            graph = self._graphs.get(run_id)
        if graph is None:
            return []
        state = self.store.read_state(run_id)
        return sorted(ready_set(graph, state.latest_report))

    def event_specs(self, run_id: str) -> list[dict[str, Any]]:
        """The run's DAG shape, for client-side readiness and layout."""
        with self._lock:
            graph = self._graphs.get(run_id)
        if graph is None:
            return []
        return [{"id": eid, "role": graph.events[eid].role,
                 "deps": sorted(graph.events[eid].dependencies)}
                for eid in graph.topo_order]


class RunClosedError(ShowrunnerError):
    pass


def create_app(manager: RunManager | None = None,
               store_root: str | Path = "runs",
               static_dir: str | Path | None = None) -> FastAPI:
    manager = manager or RunManager(store_root)
    app = FastAPI(title="showrunner", version="0.1.0")
    app.state.manager = manager

    def http_error(exc: ShowrunnerError) -> HTTPException:
        if isinstance(exc, UnknownRun):
            return HTTPException(404, str(exc))
        if isinstance(exc, (UnknownTarget, TargetPending)):
            return HTTPException(404, str(exc))
        if isinstance(exc, (RunClosedError, RunClosedForFeedback)):
            return HTTPException(409, str(exc))
        if isinstance(exc, (ValidationFailure, InvalidFeedback)):
            return HTTPException(400, str(exc))
        return HTTPException(500, str(exc))

    @app.post("/runs", status_code=201)
    def create_run(request: RunRequest):
        try:
            run_id = manager.create(request)
        except ShowrunnerError as exc:
            raise http_error(exc) from exc
        state = manager.store.read_state(run_id)
        return {"run_id": run_id, "status": state.status}

    @app.get("/runs")
    def list_runs():
        out = []
        for run_id in manager.store.list_runs():
            try:
                state = manager.store.read_state(run_id)
            except ShowrunnerError:
                continue
            out.append({
                "run_id": run_id, "pipeline": state.pipeline,
                "status": state.status, "mode": state.mode, "clock": state.clock,
                "slice_count": state.slice_count, "makespan": state.makespan,
            })
        return out

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        try:
            state = manager.store.read_state(run_id)
        except ShowrunnerError as exc:
            raise http_error(exc) from exc
        doc = state.to_payload()
        doc["ready"] = manager.ready_events(run_id)
        doc["events"] = manager.event_specs(run_id)
        return doc

    @app.get("/runs/{run_id}/log")
    def get_log(run_id: str, from_seq: int = 0, limit: int = 500):
        try:
            records = manager.store.records(run_id, from_seq=from_seq, limit=limit)
        except ShowrunnerError as exc:
            raise http_error(exc) from exc
        return {
            "records": [json.loads(r.to_line()) for r in records],
            "next_seq": from_seq + len(records),
            "closed": manager.store.is_closed(run_id),
        }

    @app.get("/runs/{run_id}/stream")
    def stream(run_id: str, request: Request, from_seq: int = 0):
        try:
            manager.store.records(run_id, from_seq=0, limit=1)
        except ShowrunnerError as exc:
            raise http_error(exc) from exc

        def generate():
            seq = from_seq
            while True:
                chunk = manager.store.records(run_id, from_seq=seq)
                for record in chunk:
                    yield f"id: {record.seq}\ndata: {record.to_line()}\n\n"
                    seq = record.seq + 1
                    if record.kind == "finish":
                        return
                if manager.store.is_closed(run_id):
                    return
                manager.store.wait_for(run_id, seq, timeout=0.5)

        return StreamingResponse(generate(), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-cache"})

    @app.post("/runs/{run_id}/feedback", status_code=202)
    def post_feedback(run_id: str, request: FeedbackRequest):
        try:
            manager.store.read_state(run_id)
            feedback_id = manager.submit_feedback(run_id, request)
        except ShowrunnerError as exc:
            raise http_error(exc) from exc
        return {"feedback_id": feedback_id}

    @app.get("/runs/{run_id}/artifacts/{artifact_id}")
    def get_artifact(run_id: str, artifact_id: str):
        try:
            artifact = manager.store.get_artifact(run_id, artifact_id)
        except ShowrunnerError as exc:
            raise http_error(exc) from exc
        return {
            "id": artifact.id,
            "producer": {"event_id": artifact.producer[0],
                         "attempt": artifact.producer[1]},
            "kind": artifact.kind,
            "payload": dict(artifact.payload),
            "content_hash": artifact.content_hash,
        }

    @app.get("/runs/{run_id}/gantt")
    def get_gantt(run_id: str):
        try:
            records = manager.store.records(run_id)
        except ShowrunnerError as exc:
            raise http_error(exc) from exc
        return {"rows": gantt_rows(records)}

    if static_dir is not None and Path(static_dir).is_dir():
        static_path = Path(static_dir)

        @app.get("/")
        def console_index():
            return FileResponse(static_path / "index.html")

        @app.get("/console/{asset:path}")
        def console_asset(asset: str):
            target = (static_path / asset).resolve()
            if not str(target).startswith(str(static_path.resolve())) \
                    or not target.is_file():
                raise HTTPException(404, "no such asset")
            return FileResponse(target)

    return app
