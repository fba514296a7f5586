/**
 * Wire types mirroring the run service: log records, run state, DAG shape.
 */

export type RecordKind =
  | "start"
  | "enqueue"
  | "revoke"
  | "complete"
  | "feedback"
  | "wait"
  | "finish";

export interface LogRecord {
  seq: number;
  time: number;
  slice: number;
  kind: RecordKind;
  event_id: string | null;
  attempt: number | null;
  payload: Record<string, unknown>;
}

export interface EventShape {
  id: string;
  role: string;
  deps: string[];
}

export interface RunSummary {
  run_id: string;
  pipeline: string;
  status: string;
  mode: string;
  clock: string;
  slice_count: number;
  makespan: number | null;
}

export interface RunStateDoc extends RunSummary {
  seed: number;
  latest_report: unknown;
  artifact_index: Record<string, { event_id: string; attempt: number;
    kind: string; content_hash: string }>;
  ready: string[];
  events: EventShape[];
}

export interface ArtifactDoc {
  id: string;
  producer: { event_id: string; attempt: number };
  kind: string;
  payload: Record<string, unknown>;
  content_hash: string;
}

export type FeedbackKind = "YesNo" | "Critical" | "Detailed";
export type Verdict = "approve" | "reject";

export interface FeedbackBody {
  target: string;
  kind: FeedbackKind;
  verdict: Verdict;
  note: string;
  amendments: Record<string, string>;
}
