// Pure render-to-string view layer.  Every function maps a view model
// to markup with no DOM access and no hidden inputs, so the same model
// always yields byte-identical markup.

import type {
  DiffEntry,
  HorizonDoc,
  PlacementDoc,
  ScheduleDoc,
  ViewModel,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function parseClock(text: string): number {
  const [h, m] = text.split(":");
  return Number(h) * 60 + Number(m);
}

function formatClock(minutes: number): string {
  const h = Math.floor(minutes / 60) % 24;
  const m = minutes % 60;
  return `${String(h).padStart(2, "0")}:${String(m).padStart(2, "0")}`;
}

export function slotCount(horizon: HorizonDoc): number {
  return Math.floor(
    (parseClock(horizon.day_end) - parseClock(horizon.day_start)) / horizon.slot_minutes,
  );
}

export function slotTime(horizon: HorizonDoc, slot: number): string {
  return formatClock(parseClock(horizon.day_start) + slot * horizon.slot_minutes);
}

function spanLabel(horizon: HorizonDoc, p: PlacementDoc): string {
  return `${slotTime(horizon, p.start_slot)}-${slotTime(horizon, p.end_slot)}`;
}

function sortedPlacements(schedule: ScheduleDoc): PlacementDoc[] {
  return [...schedule.placements].sort((a, b) =>
    a.start_slot - b.start_slot || (a.id < b.id ? -1 : a.id > b.id ? 1 : 0),
  );
}

export function renderBanner(vm: ViewModel): string {
  const parts: string[] = [];
  const { emotion, config } = vm.state;
  if (emotion.arousal >= config.thresholds.t_stress) {
    parts.push(
      `<div class="banner stress">stress mode: arousal ` +
      `${emotion.arousal.toFixed(2)} at or above ` +
      `${config.thresholds.t_stress.toFixed(2)}, pacing rules active</div>`,
    );
  }
  if (vm.ui.notice) {
    parts.push(
      `<div class="banner ${vm.ui.notice.kind}">${escapeHtml(vm.ui.notice.text)}</div>`,
    );
  }
  return parts.join("");
}

export function renderGrid(vm: ViewModel): string {
  const horizon = vm.state.config.horizon;
  const count = slotCount(horizon);
  const moved = new Set(
    (vm.ui.diff ?? []).filter((d) => d.kind === "moved").map((d) => d.id),
  );
  const bySlot: string[][] = Array.from({ length: count }, () => []);
  if (vm.schedule) {
    for (const p of sortedPlacements(vm.schedule)) {
      // never draw outside the day: the grid is the horizon, nothing else
      if (p.start_slot < 0 || p.end_slot > count) continue;
      for (let s = p.start_slot; s < p.end_slot; s++) {
        const classes = ["chip"];
        if (s === p.start_slot) classes.push("starts-here");
        if (moved.has(p.id)) classes.push("moved");
        bySlot[s].push(
          `<span class="${classes.join(" ")}" data-event="${escapeHtml(p.id)}">` +
          `${escapeHtml(p.name)}</span>`,
        );
      }
    }
  }
  const rows = bySlot.map((chips, s) =>
    `<tr><th>${slotTime(horizon, s)}</th><td>${chips.join("")}</td></tr>`,
  );
  return `<table class="grid"><tbody>${rows.join("")}</tbody></table>`;
}

export function renderEventList(vm: ViewModel): string {
  const disabled = vm.ui.pending ? " disabled" : "";
  const items = vm.state.events.map((e) =>
    `<li data-event="${escapeHtml(e.id)}">` +
    `<span class="ev-name">${escapeHtml(e.name)}</span>` +
    ` <span class="ev-meta">${e.duration_min} min, priority ${e.priority.toFixed(2)}, ` +
    `load ${e.cognitive_load.toFixed(2)}${e.sensitive ? ", sensitive" : ""}` +
    `${e.multitask ? ", multitask" : ""}</span>` +
    ` <button type="button" data-del="${escapeHtml(e.id)}"${disabled}>remove</button></li>`,
  );
  if (items.length === 0) return `<p class="empty">no events yet</p>`;
  return `<ul class="events">${items.join("")}</ul>`;
}

export function renderEventForm(vm: ViewModel): string {
  const d = vm.ui.draft;
  const disabled = vm.ui.pending ? " disabled" : "";
  const error = vm.ui.formError
    ? `<p class="form-error">${escapeHtml(vm.ui.formError)}</p>`
    : "";
  return (
    `<form id="event-form">` +
    `<label>name <input name="name" value="${escapeHtml(d.name)}"${disabled}></label>` +
    `<label>duration (min) <input name="duration" type="number" value="${escapeHtml(d.duration)}"${disabled}></label>` +
    `<label>priority <input name="priority" type="range" min="0" max="1" step="0.05" value="${escapeHtml(d.priority)}"${disabled}>` +
    `<output>${escapeHtml(d.priority)}</output></label>` +
    `<label>cognitive load <input name="load" type="range" min="0" max="1" step="0.05" value="${escapeHtml(d.load)}"${disabled}>` +
    `<output>${escapeHtml(d.load)}</output></label>` +
    `<label><input name="multitask" type="checkbox"${d.multitask ? " checked" : ""}${disabled}> multitask</label>` +
    `<label><input name="sensitive" type="checkbox"${d.sensitive ? " checked" : ""}${disabled}> sensitive</label>` +
    `<button type="submit"${disabled}>add event</button>` +
    error +
    `</form>`
  );
}

export function renderGauges(vm: ViewModel): string {
  const { emotion } = vm.state;
  const disabled = vm.ui.pending ? " disabled" : "";
  const dims: Array<[string, number]> = [
    ["valence", emotion.valence],
    ["arousal", emotion.arousal],
    ["dominance", emotion.dominance],
  ];
  const rows = dims.map(([dim, value]) =>
    `<div class="gauge" data-dim="${dim}">` +
    `<span class="dim">${dim}</span>` +
    `<span class="bar"><span class="fill" style="width:${(value * 100).toFixed(1)}%"></span></span>` +
    `<span class="val">${value.toFixed(2)}</span>` +
    `<input class="vad" name="${dim}" type="range" min="0" max="1" step="0.05" ` +
    `value="${value.toFixed(2)}"${disabled}>` +
    `</div>`,
  );
  return (
    `<div class="emotion" data-source="${escapeHtml(emotion.source)}">` +
    rows.join("") +
    `<p class="ev-meta">source: ${escapeHtml(emotion.source)} at ${escapeHtml(emotion.at)}</p>` +
    `</div>`
  );
}

export function renderBreakdown(vm: ViewModel): string {
  if (!vm.schedule) return `<p class="empty">no schedule solved yet</p>`;
  const s = vm.schedule;
  const terms: Array<[string, number]> = [
    ["temporal", s.breakdown_temporal],
    ["cognitive", s.breakdown_cognitive],
    ["emotional", s.breakdown_emotional],
  ];
  const top = Math.max(...terms.map(([, v]) => v), 1e-9);
  const rows = terms.map(([name, value]) =>
    `<div class="term" data-term="${name}">` +
    `<span class="dim">${name}</span>` +
    `<span class="bar"><span class="fill" style="width:${((value / top) * 100).toFixed(1)}%"></span></span>` +
    `<span class="val">${value.toFixed(4)}</span>` +
    `</div>`,
  );
  return (
    `<div class="breakdown">` +
    `<p>objective ${s.objective.toFixed(4)}</p>` +
    rows.join("") +
    `</div>`
  );
}

function diffLine(vm: ViewModel, d: DiffEntry): string {
  const horizon = vm.state.config.horizon;
  const from = d.fromSlot === null ? "off the plan" : slotTime(horizon, d.fromSlot);
  const to = d.toSlot === null ? "off the plan" : slotTime(horizon, d.toSlot);
  const what = d.kind === "moved" ? `${from} → ${to}`
    : d.kind === "added" ? `added at ${to}`
    : `removed from ${from}`;
  return `<li class="${d.kind}" data-event="${escapeHtml(d.id)}">` +
    `${escapeHtml(d.name)}: ${what}</li>`;
}

export function renderDiff(vm: ViewModel): string {
  if (vm.ui.diff === null) return "";
  if (vm.ui.diff.length === 0) {
    return `<div class="diff"><p>re-solved: no placements changed</p></div>`;
  }
  const items = vm.ui.diff.map((d) => diffLine(vm, d));
  return `<div class="diff"><p>re-solved: ${vm.ui.diff.length} changed</p>` +
    `<ul>${items.join("")}</ul></div>`;
}

export function renderScheduleList(vm: ViewModel): string {
  if (!vm.schedule) return "";
  const horizon = vm.state.config.horizon;
  const rows = sortedPlacements(vm.schedule).map((p) =>
    `<li data-event="${escapeHtml(p.id)}">${spanLabel(horizon, p)} ${escapeHtml(p.name)}</li>`,
  );
  return `<ul class="placements">${rows.join("")}</ul>`;
}

export function renderApp(vm: ViewModel): string {
  const solveDisabled = vm.ui.pending || vm.state.events.length === 0;
  return (
    `<div class="app${vm.ui.pending ? " pending" : ""}">` +
    renderBanner(vm) +
    `<div class="columns">` +
    `<section class="day"><h2>day</h2>` + renderGrid(vm) + `</section>` +
    `<section class="side">` +
    `<h2>events</h2>` + renderEventList(vm) + renderEventForm(vm) +
    `<h2>emotion</h2>` + renderGauges(vm) +
    `<button type="button" id="solve"${solveDisabled ? " disabled" : ""}>re-optimize</button>` +
    `<h2>objective</h2>` + renderBreakdown(vm) +
    renderScheduleList(vm) +
    renderDiff(vm) +
    `</section>` +
    `</div>` +
    `</div>`
  );
}
