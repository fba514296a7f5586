/** DOM rendering: node grid by layer, Gantt bars, artifact preview. */
import type { ConsoleViewModel, GanttRowView, NodeView } from "./projection.js";
import type { ArtifactDoc, EventShape } from "./types.js";
import { layerByDepth } from "./layout.js";

const STATE_LABEL: Record<string, string> = {
  pending: "Pending",
  ready: "Ready",
  running: "Running",
  done: "Done",
  revoked: "Revoked",
};

export function renderSummary(el: HTMLElement, view: ConsoleViewModel): void {
  const makespan = view.makespan === null ? "–" : view.makespan.toFixed(2);
  el.innerHTML = `
    <span class="badge status-${view.status}">${view.status}</span>
    <span>${view.pipeline || "…"} · ${view.mode} · ${view.clock}</span>
    <span>seed ${view.seed ?? "–"}</span>
    <span>slices ${view.lastSlice + 1}</span>
    <span>makespan ${makespan}</span>
    <span>waits ${view.waitCount}</span>`;
}

export function renderDag(el: HTMLElement, view: ConsoleViewModel,
    events: EventShape[], onSelect: (id: string) => void,
    selected: string | null): void {
  el.textContent = "";
  for (const layer of layerByDepth(events)) {
    const row = document.createElement("div");
    row.className = "dag-layer";
    for (const id of layer) {
      const node = view.nodes[id];
      if (!node) continue;
      row.appendChild(nodeChip(node, onSelect, selected === id));
    }
    el.appendChild(row);
  }
}

function nodeChip(node: NodeView, onSelect: (id: string) => void,
    selected: boolean): HTMLElement {
  const chip = document.createElement("button");
  chip.className = `node state-${node.state}${selected ? " selected" : ""}`;
  chip.dataset.event = node.id;
  const attempt = node.attempt > 1 || node.revocations > 0
    ? `<span class="attempt">a${node.attempt}</span>` : "";
  chip.innerHTML = `<span class="name">${node.id}</span>${attempt}
    <span class="state">${STATE_LABEL[node.state]}</span>`;
  chip.addEventListener("click", () => onSelect(node.id));
  return chip;
}

export function renderGantt(el: HTMLElement, view: ConsoleViewModel): void {
  el.textContent = "";
  const rows = view.gantt;
  if (!rows.length) return;
  const horizon = Math.max(
    ...rows.map((row) => row.end ?? row.start),
    view.makespan ?? 0) || 1;
  const byEvent = new Map<string, GanttRowView[]>();
  for (const row of rows) {
    const list = byEvent.get(row.event) ?? [];
    list.push(row);
    byEvent.set(row.event, list);
  }
  for (const [event, attempts] of [...byEvent.entries()].sort()) {
    const rowEl = document.createElement("div");
    rowEl.className = "gantt-row";
    const label = document.createElement("span");
    label.className = "gantt-label";
    label.textContent = event;
    const track = document.createElement("div");
    track.className = "gantt-track";
    for (const attempt of attempts) {
      const bar = document.createElement("div");
      const end = attempt.end ?? horizon;
      bar.className = `gantt-bar${attempt.revoked ? " revoked" : ""}` +
        `${attempt.end === null ? " open" : ""}`;
      bar.style.left = `${(attempt.start / horizon) * 100}%`;
      bar.style.width = `${Math.max(((end - attempt.start) / horizon) * 100, 0.75)}%`;
      bar.title = `${attempt.event} attempt ${attempt.attempt}: ` +
        `${attempt.start.toFixed(2)} → ${attempt.end?.toFixed(2) ?? "…"}` +
        `${attempt.revoked ? " (revoked)" : ""}`;
      track.appendChild(bar);
    }
    rowEl.append(label, track);
    el.appendChild(rowEl);
  }
}

export function renderArtifact(el: HTMLElement, artifact: ArtifactDoc | null,
    error?: string): void {
  if (error) {
    el.innerHTML = `<p class="error">${error}</p>`;
    return;
  }
  if (!artifact) {
    el.innerHTML = `<p class="dim">Select a node with an artifact.</p>`;
    return;
  }
  el.innerHTML = `
    <div class="artifact-head">
      <span class="badge">${artifact.kind}</span>
      <span>${artifact.id}</span>
      <span class="dim">by ${artifact.producer.event_id} · attempt
        ${artifact.producer.attempt}</span>
      <span class="dim hash">${artifact.content_hash.slice(0, 16)}</span>
    </div>
    <pre>${escapeHtml(JSON.stringify(artifact.payload, null, 2))}</pre>`;
}

export function renderFeedbackLog(el: HTMLElement, view: ConsoleViewModel): void {
  el.textContent = "";
  for (const item of view.feedback.slice().reverse()) {
    const line = document.createElement("div");
    line.className = `feedback-line ${item.verdict}`;
    line.textContent = `[slice ${item.slice}] ${item.kind} ${item.verdict} on ` +
      `${item.target}${item.note ? ` — ${item.note}` : ""}` +
      `${item.error ? ` (${item.error})` : ""}`;
    el.appendChild(line);
  }
}

function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
