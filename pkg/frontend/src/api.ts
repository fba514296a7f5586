/** Thin typed client for the run service's request/response endpoints. */
import type {
  ArtifactDoc,
  FeedbackBody,
  LogRecord,
  RunStateDoc,
  RunSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export class RunServiceClient {
  constructor(public baseUrl: string) {}

  listRuns(): Promise<RunSummary[]> {
    return request(`${this.baseUrl}/runs`);
  }

  getRun(runId: string): Promise<RunStateDoc> {
    return request(`${this.baseUrl}/runs/${runId}`);
  }

  createRun(body: Record<string, unknown>): Promise<{ run_id: string; status: string }> {
    return request(`${this.baseUrl}/runs`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  async getLog(runId: string, fromSeq = 0): Promise<LogRecord[]> {
    const records: LogRecord[] = [];
    let seq = fromSeq;
    for (;;) {
      const page = await request<{ records: LogRecord[]; next_seq: number;
        closed: boolean }>(
        `${this.baseUrl}/runs/${runId}/log?from_seq=${seq}&limit=500`);
      records.push(...page.records);
      if (page.records.length === 0) return records;
      seq = page.next_seq;
    }
  }

  submitFeedback(runId: string, body: FeedbackBody): Promise<{ feedback_id: string }> {
    return request(`${this.baseUrl}/runs/${runId}/feedback`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getArtifact(runId: string, artifactId: string): Promise<ArtifactDoc> {
    return request(`${this.baseUrl}/runs/${runId}/artifacts/${artifactId}`);
  }

  getGantt(runId: string): Promise<{ rows: Array<Record<string, unknown>> }> {
    return request(`${this.baseUrl}/runs/${runId}/gantt`);
  }
}
