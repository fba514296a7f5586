/** A hand-written log mirroring a real rejected-dialogue run. */
import type { EventShape, LogRecord } from "../src/types.js";

export const FILM_EVENTS: EventShape[] = [
  { id: "script", role: "scriptwriter", deps: [] },
  { id: "art", role: "artist", deps: ["script"] },
  { id: "dialogue", role: "actors", deps: ["script"] },
  { id: "action", role: "action", deps: ["art"] },
  { id: "voiceover", role: "voiceover", deps: ["dialogue"] },
  { id: "post", role: "post", deps: ["art", "action", "voiceover"] },
];

function rec(seq: number, time: number, slice: number, kind: LogRecord["kind"],
    event: string | null = null, attempt: number | null = null,
    payload: Record<string, unknown> = {}): LogRecord {
  return { seq, time, slice, kind, event_id: event, attempt, payload };
}

/** start .. dialogue rejected at its completion .. everything re-runs .. finish */
export const REJECTED_DIALOGUE_RECORDS: LogRecord[] = [
  rec(0, 0, 0, "start",
    null, null, { pipeline: "film", seed: 42, mode: "parallel", clock: "virtual" }),
  rec(1, 0, 0, "enqueue", "script", 1, { role: "scriptwriter", duration: 10 }),
  rec(2, 10, 1, "complete", "script", 1,
    { artifact: "script-a1-aaaa", content_hash: "aaaa", kind: "script" }),
  rec(3, 10, 1, "enqueue", "art", 1, { role: "artist", duration: 20 }),
  rec(4, 10, 1, "enqueue", "dialogue", 1, { role: "actors", duration: 15 }),
  rec(5, 25, 2, "complete", "dialogue", 1,
    { artifact: "dialogue-a1-bbbb", content_hash: "bbbb", kind: "dialogue" }),
  rec(6, 25, 2, "wait", null, null, { running: ["art"] }),
  rec(7, 25, 3, "feedback", null, null,
    { id: "fb-0", target: "dialogue", kind: "Detailed", verdict: "reject",
      note: "tighten the fifth act", amendments: {} }),
  rec(8, 25, 3, "revoke", "dialogue", 1, { reason: "fb-0" }),
  rec(9, 30, 4, "complete", "art", 1,
    { artifact: "art-a1-cccc", content_hash: "cccc", kind: "scene_frame" }),
  rec(10, 30, 4, "enqueue", "action", 1, { role: "action", duration: 30 }),
  rec(11, 30, 4, "enqueue", "dialogue", 2, { role: "actors", duration: 15 }),
  rec(12, 45, 5, "complete", "dialogue", 2,
    { artifact: "dialogue-a2-dddd", content_hash: "dddd", kind: "dialogue" }),
  rec(13, 45, 5, "enqueue", "voiceover", 1, { role: "voiceover", duration: 12 }),
  rec(14, 57, 6, "complete", "voiceover", 1,
    { artifact: "voiceover-a1-eeee", content_hash: "eeee", kind: "voice_track" }),
  rec(15, 57, 6, "wait", null, null, { running: ["action"] }),
  rec(16, 60, 7, "complete", "action", 1,
    { artifact: "action-a1-ffff", content_hash: "ffff", kind: "shot_plan" }),
  rec(17, 60, 7, "enqueue", "post", 1, { role: "post", duration: 8 }),
  rec(18, 68, 8, "complete", "post", 1,
    { artifact: "post-a1-0000", content_hash: "0000", kind: "final_cut" }),
  rec(19, 68, 8, "finish", null, null,
    { status: "completed", makespan: 68, slices: 9 }),
];
