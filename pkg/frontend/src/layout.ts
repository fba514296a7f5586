/** Layered DAG layout: each event sits one layer below its deepest dependency. */
import type { EventShape } from "./types.js";

export function layerByDepth(events: EventShape[]): string[][] {
  const depthOf = new Map<string, number>();
  const byId = new Map(events.map((e) => [e.id, e]));

  const depth = (id: string, trail: Set<string>): number => {
    const known = depthOf.get(id);
    if (known !== undefined) return known;
    if (trail.has(id)) return 0;              // defensive: server rejects cycles
    trail.add(id);
    const shape = byId.get(id);
    const value = !shape || shape.deps.length === 0
      ? 0
      : 1 + Math.max(...shape.deps.map((dep) => depth(dep, trail)));
    depthOf.set(id, value);
    return value;
  };

  const layers: string[][] = [];
  for (const event of events) {
    const d = depth(event.id, new Set());
    while (layers.length <= d) layers.push([]);
    layers[d].push(event.id);
  }
  for (const layer of layers) layer.sort();
  return layers;
}
