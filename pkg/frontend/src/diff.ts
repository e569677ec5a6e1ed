// Placement diffing between two solver answers, keyed by event id.

import type { DiffEntry, PlacementDoc } from "./types.js";

export function computeDiff(
  before: PlacementDoc[],
  after: PlacementDoc[],
): DiffEntry[] {
  const old = new Map(before.map((p) => [p.id, p]));
  const next = new Map(after.map((p) => [p.id, p]));
  const out: DiffEntry[] = [];
  for (const [id, p] of next) {
    const prev = old.get(id);
    if (!prev) {
      out.push({ id, name: p.name, kind: "added", fromSlot: null, toSlot: p.start_slot });
    } else if (prev.start_slot !== p.start_slot) {
      out.push({
        id,
        name: p.name,
        kind: "moved",
        fromSlot: prev.start_slot,
        toSlot: p.start_slot,
      });
    }
  }
  for (const [id, p] of old) {
    if (!next.has(id)) {
      out.push({ id, name: p.name, kind: "removed", fromSlot: p.start_slot, toSlot: null });
    }
  }
  out.sort((a, b) => (a.id < b.id ? -1 : a.id > b.id ? 1 : 0));
  return out;
}
