/**
 * Resumable record stream over server-sent events.
 *
 * The service frames one log record per SSE message. Records are
 * deduplicated by seq, so at-least-once delivery and reconnects are safe:
 * on connection loss the client resumes from the last seq it applied.
 */
import type { LogRecord } from "./types.js";

export interface SseEvent {
  id: string | null;
  data: string;
}

/**
 * Incremental SSE parser. Feed raw chunks; returns the unconsumed tail.
 * Events are separated by blank lines; only `id:` and `data:` fields matter.
 */
export function parseSseChunk(buffer: string,
    emit: (event: SseEvent) => void): string {
  const normalized = buffer.replace(/\r\n/g, "\n");
  const parts = normalized.split("\n\n");
  const leftover = parts.pop() ?? "";
  for (const part of parts) {
    let id: string | null = null;
    const data: string[] = [];
    for (const line of part.split("\n")) {
      if (line.startsWith("id:")) id = line.slice(3).trim();
      else if (line.startsWith("data:")) data.push(line.slice(5).trimStart());
    }
    if (data.length) emit({ id, data: data.join("\n") });
  }
  return leftover;
}

export interface StreamHandle {
  stop(): void;
  done: Promise<void>;
}

export interface StreamCallbacks {
  onRecord(record: LogRecord): void;
  onEnd?(): void;
  onError?(error: unknown): void;
  onReconnect?(fromSeq: number): void;
}

/**
 * Follow a run's stream from `fromSeq`, reconnecting with resume on drops
 * until the finish record arrives or `stop()` is called.
 */
export function streamRun(baseUrl: string, runId: string, fromSeq: number,
    callbacks: StreamCallbacks, reconnectDelayMs = 500): StreamHandle {
  let stopped = false;
  let finished = false;
  let lastSeq = fromSeq - 1;
  const controller = { current: new AbortController() };

  const done = (async () => {
    while (!stopped && !finished) {
      controller.current = new AbortController();
      try {
        const response = await fetch(
          `${baseUrl}/runs/${runId}/stream?from_seq=${lastSeq + 1}`,
          { signal: controller.current.signal });
        if (!response.ok || !response.body) {
          throw new Error(`stream failed: ${response.status}`);
        }
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { value, done: eof } = await reader.read();
          if (eof) break;
          buffer = parseSseChunk(buffer + decoder.decode(value, { stream: true }),
            (event) => {
              const record = JSON.parse(event.data) as LogRecord;
              if (record.seq <= lastSeq) return;   // duplicate after resume
              lastSeq = record.seq;
              callbacks.onRecord(record);
              if (record.kind === "finish") finished = true;
            });
          if (finished) break;
        }
        if (finished) break;
        // stream ended without a finish record: resume unless stopped
      } catch (error) {
        if (stopped) break;
        callbacks.onError?.(error);
      }
      if (!stopped && !finished) {
        await new Promise((resolve) => setTimeout(resolve, reconnectDelayMs));
        callbacks.onReconnect?.(lastSeq + 1);
      }
    }
    callbacks.onEnd?.();
  })();

  return {
    stop() {
      stopped = true;
      controller.current.abort();
    },
    done,
  };
}
