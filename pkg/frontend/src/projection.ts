/**
 * Pure projection of a log-record prefix into the console view model.
 *
 * The same records always produce the same model: following a run live and
 * replaying its stored log must render identically. All derived fields
 * (ready markers, Gantt rows, attempt badges) come from the record stream
 * plus the static DAG shape; nothing depends on arrival timing.
 */
import type { EventShape, LogRecord } from "./types.js";

export type NodeState = "pending" | "ready" | "running" | "done" | "revoked";

export interface NodeView {
  id: string;
  role: string;
  state: NodeState;
  attempt: number;            // current or next attempt number
  revocations: number;
  artifactId: string | null;  // latest surviving artifact
  contentHash: string | null;
}

export interface GanttRowView {
  event: string;
  attempt: number;
  start: number;
  end: number | null;
  revoked: boolean;
}

export interface FeedbackView {
  id: string;
  target: string;
  kind: string;
  verdict: string;
  note: string;
  slice: number;
  error: string | null;
}

export interface ConsoleViewModel {
  runId: string;
  pipeline: string;
  seed: number | null;
  mode: string;
  clock: string;
  status: "pending" | "running" | "completed" | "failed";
  makespan: number | null;
  lastSeq: number;
  lastSlice: number;
  waitCount: number;
  nodes: Record<string, NodeView>;
  gantt: GanttRowView[];
  feedback: FeedbackView[];
  error: string | null;
}

export function initialView(runId: string, events: EventShape[]): ConsoleViewModel {
  const nodes: Record<string, NodeView> = {};
  for (const event of events) {
    nodes[event.id] = {
      id: event.id,
      role: event.role,
      state: "pending",
      attempt: 1,
      revocations: 0,
      artifactId: null,
      contentHash: null,
    };
  }
  return {
    runId,
    pipeline: "",
    seed: null,
    mode: "",
    clock: "",
    status: "pending",
    makespan: null,
    lastSeq: -1,
    lastSlice: -1,
    waitCount: 0,
    nodes,
    gantt: [],
    feedback: [],
    error: null,
  };
}

function node(view: ConsoleViewModel, id: string, role = "crew"): NodeView {
  let entry = view.nodes[id];
  if (!entry) {
    entry = view.nodes[id] = {
      id, role, state: "pending", attempt: 1, revocations: 0,
      artifactId: null, contentHash: null,
    };
  }
  return entry;
}

function ganttRow(view: ConsoleViewModel, event: string, attempt: number):
    GanttRowView | undefined {
  return view.gantt.find((row) => row.event === event && row.attempt === attempt);
}

/** Fold one record into the model. Duplicate or stale seqs are ignored. */
export function applyRecord(view: ConsoleViewModel, record: LogRecord): boolean {
  if (record.seq <= view.lastSeq) return false;
  view.lastSeq = record.seq;
  view.lastSlice = Math.max(view.lastSlice, record.slice);

  switch (record.kind) {
    case "start": {
      view.status = "running";
      view.pipeline = String(record.payload["pipeline"] ?? "");
      view.seed = (record.payload["seed"] as number) ?? null;
      view.mode = String(record.payload["mode"] ?? "");
      view.clock = String(record.payload["clock"] ?? "");
      break;
    }
    case "enqueue": {
      const entry = node(view, record.event_id!,
        String(record.payload["role"] ?? "crew"));
      entry.state = "running";
      entry.attempt = record.attempt!;
      view.gantt.push({
        event: record.event_id!, attempt: record.attempt!,
        start: record.time, end: null, revoked: false,
      });
      break;
    }
    case "complete": {
      const entry = node(view, record.event_id!);
      entry.state = "done";
      entry.attempt = record.attempt!;
      entry.artifactId = String(record.payload["artifact"] ?? "");
      entry.contentHash = String(record.payload["content_hash"] ?? "");
      const row = ganttRow(view, record.event_id!, record.attempt!);
      if (row) row.end = record.time;
      break;
    }
    case "revoke": {
      const entry = node(view, record.event_id!);
      entry.state = "revoked";
      entry.revocations += 1;
      entry.attempt = record.attempt! + 1;   // badge shows the upcoming attempt
      entry.artifactId = null;
      entry.contentHash = null;
      const row = ganttRow(view, record.event_id!, record.attempt!);
      if (row) {
        row.end = record.time;
        row.revoked = true;
      }
      break;
    }
    case "feedback": {
      view.feedback.push({
        id: String(record.payload["id"] ?? ""),
        target: String(record.payload["target"] ?? ""),
        kind: String(record.payload["kind"] ?? ""),
        verdict: String(record.payload["verdict"] ?? ""),
        note: String(record.payload["note"] ?? ""),
        slice: record.slice,
        error: (record.payload["error"] as string) ?? null,
      });
      break;
    }
    case "wait": {
      view.waitCount += 1;
      break;
    }
    case "finish": {
      view.status = record.payload["status"] === "failed" ? "failed" : "completed";
      view.makespan = (record.payload["makespan"] as number) ?? null;
      view.error = (record.payload["error"] as string) ?? null;
      break;
    }
  }
  return true;
}

/**
 * Mark pending nodes whose dependencies are all done as ready. Revoked nodes
 * stay revoked until their next dispatch, matching the engine's next-boundary
 * re-enqueue rule.
 */
export function markReady(view: ConsoleViewModel, events: EventShape[]): void {
  const done = new Set(
    Object.values(view.nodes).filter((n) => n.state === "done").map((n) => n.id));
  for (const event of events) {
    const entry = view.nodes[event.id];
    if (!entry) continue;
    if (entry.state === "ready" && !event.deps.every((d) => done.has(d))) {
      entry.state = "pending";
    } else if (entry.state === "pending" && event.deps.every((d) => done.has(d))) {
      entry.state = "ready";
    }
  }
}

/** Project a whole record list at once (replay path). */
export function projectAll(runId: string, events: EventShape[],
    records: LogRecord[]): ConsoleViewModel {
  const view = initialView(runId, events);
  for (const record of records) {
    applyRecord(view, record);
  }
  markReady(view, events);
  return view;
}

/** Done/running nodes are the valid feedback targets. */
export function feedbackTargets(view: ConsoleViewModel): string[] {
  return Object.values(view.nodes)
    .filter((n) => n.state === "done" || n.state === "running")
    .map((n) => n.id)
    .sort();
}
