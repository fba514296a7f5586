/**
 * Feedback composer: a small state machine that cannot emit an invalid
 * verdict. YesNo carries no note and no amendments; Critical requires a note
 * and forbids amendments; Detailed requires a note and may carry amendments.
 */
import type { FeedbackBody, FeedbackKind, Verdict } from "./types.js";

export interface ComposerState {
  target: string | null;
  kind: FeedbackKind;
  verdict: Verdict;
  note: string;
  amendments: Array<{ key: string; value: string }>;
}

export interface ComposerCaps {
  noteEnabled: boolean;
  noteRequired: boolean;
  amendmentsEnabled: boolean;
}

export function emptyComposer(): ComposerState {
  return { target: null, kind: "YesNo", verdict: "approve", note: "",
           amendments: [] };
}

export function capsFor(kind: FeedbackKind): ComposerCaps {
  switch (kind) {
    case "YesNo":
      return { noteEnabled: false, noteRequired: false, amendmentsEnabled: false };
    case "Critical":
      return { noteEnabled: true, noteRequired: true, amendmentsEnabled: false };
    case "Detailed":
      return { noteEnabled: true, noteRequired: true, amendmentsEnabled: true };
  }
}

/** Switching kinds drops whatever the new kind cannot carry. */
export function setKind(state: ComposerState, kind: FeedbackKind): ComposerState {
  const caps = capsFor(kind);
  return {
    ...state,
    kind,
    note: caps.noteEnabled ? state.note : "",
    amendments: caps.amendmentsEnabled ? state.amendments : [],
  };
}

export function validate(state: ComposerState,
    validTargets: string[]): string[] {
  const caps = capsFor(state.kind);
  const problems: string[] = [];
  if (!state.target) {
    problems.push("pick a target event");
  } else if (!validTargets.includes(state.target)) {
    problems.push(`${state.target} is not a running or done event`);
  }
  if (caps.noteRequired && !state.note.trim()) {
    problems.push(`${state.kind} feedback needs a note`);
  }
  if (!caps.noteEnabled && state.note.trim()) {
    problems.push("YesNo feedback carries no note");
  }
  if (!caps.amendmentsEnabled &&
      state.amendments.some((a) => a.key.trim() || a.value.trim())) {
    problems.push(`${state.kind} feedback carries no amendments`);
  }
  return problems;
}

export function toRequestBody(state: ComposerState,
    validTargets: string[]): FeedbackBody {
  const problems = validate(state, validTargets);
  if (problems.length) {
    throw new Error(problems.join("; "));
  }
  const amendments: Record<string, string> = {};
  for (const { key, value } of state.amendments) {
    if (key.trim()) amendments[key.trim()] = value;
  }
  return {
    target: state.target!,
    kind: state.kind,
    verdict: state.verdict,
    note: state.note.trim(),
    amendments,
  };
}
