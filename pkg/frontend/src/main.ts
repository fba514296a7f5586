/** Page wiring: run list, live stream projection, composer, previews. */
import { RunServiceClient } from "./api.js";
import {
  capsFor,
  emptyComposer,
  setKind,
  toRequestBody,
  validate,
  type ComposerState,
} from "./composer.js";
import {
  applyRecord,
  feedbackTargets,
  initialView,
  markReady,
  type ConsoleViewModel,
} from "./projection.js";
import {
  renderArtifact,
  renderDag,
  renderFeedbackLog,
  renderGantt,
  renderSummary,
} from "./render.js";
import { streamRun, type StreamHandle } from "./stream.js";
import type { EventShape, FeedbackKind, Verdict } from "./types.js";

const client = new RunServiceClient("");

const el = (id: string) => document.getElementById(id) as HTMLElement;

let view: ConsoleViewModel | null = null;
let events: EventShape[] = [];
let stream: StreamHandle | null = null;
let composer: ComposerState = emptyComposer();
let selectedNode: string | null = null;
let currentRun: string | null = null;

async function refreshRunList(): Promise<void> {
  const runs = await client.listRuns();
  const select = el("run-select") as HTMLSelectElement;
  const previous = select.value;
  select.innerHTML = runs.map((run) =>
    `<option value="${run.run_id}">${run.run_id} · ${run.pipeline} · ` +
    `${run.status}</option>`).join("");
  if (previous && runs.some((r) => r.run_id === previous)) {
    select.value = previous;
  }
}

function repaint(): void {
  if (!view) return;
  renderSummary(el("summary"), view);
  renderDag(el("dag"), view, events, selectNode, selectedNode);
  renderGantt(el("gantt"), view);
  renderFeedbackLog(el("feedback-log"), view);
  paintComposer();
}

async function selectNode(id: string): Promise<void> {
  selectedNode = id;
  composer = { ...composer, target: id };
  repaint();
  const node = view?.nodes[id];
  if (!node?.artifactId || !currentRun) {
    renderArtifact(el("artifact"), null);
    return;
  }
  try {
    renderArtifact(el("artifact"), await client.getArtifact(currentRun, node.artifactId));
  } catch (error) {
    renderArtifact(el("artifact"), null, String(error));
  }
}

async function followRun(runId: string): Promise<void> {
  stream?.stop();
  currentRun = runId;
  selectedNode = null;
  const state = await client.getRun(runId);
  events = state.events;
  view = initialView(runId, events);
  repaint();
  stream = streamRun("", runId, 0, {
    onRecord(record) {
      if (!view) return;
      applyRecord(view, record);
      markReady(view, events);
      repaint();
    },
    onEnd() {
      void refreshRunList();
    },
    onError() {
      el("connection").textContent = "reconnecting…";
    },
    onReconnect(fromSeq) {
      el("connection").textContent = `resuming from seq ${fromSeq}`;
    },
  });
  el("connection").textContent = "live";
}

function paintComposer(): void {
  const caps = capsFor(composer.kind);
  const targets = view ? feedbackTargets(view) : [];
  (el("composer-target") as HTMLSelectElement).innerHTML =
    `<option value="">— target —</option>` + targets.map((t) =>
      `<option value="${t}"${composer.target === t ? " selected" : ""}>${t}</option>`
    ).join("");
  const note = el("composer-note") as HTMLTextAreaElement;
  note.disabled = !caps.noteEnabled;
  note.placeholder = caps.noteEnabled
    ? (caps.noteRequired ? "note (required)" : "note")
    : "YesNo feedback carries no note";
  if (!caps.noteEnabled) note.value = "";
  el("composer-amendments").classList.toggle("hidden", !caps.amendmentsEnabled);
  const problems = view ? validate({ ...composer }, targets) : ["no run"];
  (el("composer-submit") as HTMLButtonElement).disabled = problems.length > 0;
  el("composer-problems").textContent = problems.join(" · ");
}

function readComposerInputs(): void {
  composer.target =
    (el("composer-target") as HTMLSelectElement).value || null;
  composer.verdict =
    (document.querySelector("input[name=verdict]:checked") as HTMLInputElement)
      ?.value as Verdict ?? "approve";
  composer.note = (el("composer-note") as HTMLTextAreaElement).value;
  composer.amendments = [...document.querySelectorAll(".amendment-row")].map(
    (row) => ({
      key: (row.querySelector(".amend-key") as HTMLInputElement).value,
      value: (row.querySelector(".amend-value") as HTMLInputElement).value,
    }));
}

async function submitComposer(): Promise<void> {
  if (!view || !currentRun) return;
  readComposerInputs();
  const status = el("composer-status");
  try {
    const body = toRequestBody(composer, feedbackTargets(view));
    const ack = await client.submitFeedback(currentRun, body);
    status.textContent = `acknowledged ${ack.feedback_id}`;
    composer = setKind({ ...composer, note: "", amendments: [] }, composer.kind);
  } catch (error) {
    status.textContent = String(error);
  }
  paintComposer();
}

function wire(): void {
  el("refresh").addEventListener("click", () => void refreshRunList());
  el("follow").addEventListener("click", () => {
    const runId = (el("run-select") as HTMLSelectElement).value;
    if (runId) void followRun(runId);
  });
  for (const radio of document.querySelectorAll("input[name=kind]")) {
    radio.addEventListener("change", (event) => {
      readComposerInputs();
      composer = setKind(composer, (event.target as HTMLInputElement)
        .value as FeedbackKind);
      paintComposer();
    });
  }
  el("composer-target").addEventListener("change", () => {
    readComposerInputs();
    paintComposer();
  });
  el("composer-note").addEventListener("input", () => {
    readComposerInputs();
    paintComposer();
  });
  el("add-amendment").addEventListener("click", () => {
    const row = document.createElement("div");
    row.className = "amendment-row";
    row.innerHTML = `<input class="amend-key" placeholder="param">
      <input class="amend-value" placeholder="value">`;
    el("amendment-rows").appendChild(row);
  });
  el("composer-submit").addEventListener("click", () => void submitComposer());
  void refreshRunList();
}

document.addEventListener("DOMContentLoaded", wire);
