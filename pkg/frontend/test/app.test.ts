import { beforeEach, describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { App, createApp } from "../src/app.js";
import { MockService, makeEvent, packedSchedule } from "./mock_service.js";

let svc: MockService;
let root: HTMLElement;
let app: App;

function mount(service: MockService): App {
  root = document.createElement("div");
  document.body.appendChild(root);
  return createApp(root, new Client("", service.fetch));
}

function input(selector: string): HTMLInputElement {
  const el = root.querySelector(selector);
  if (!el) throw new Error(`missing ${selector}`);
  return el as HTMLInputElement;
}

function fillForm(fields: Record<string, string>): void {
  for (const [name, value] of Object.entries(fields)) {
    input(`#event-form [name="${name}"]`).value = value;
  }
}

function submitForm(): void {
  root.querySelector("#event-form")!.dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

function moveSlider(dim: string, value: string): void {
  const slider = input(`.vad[name="${dim}"]`);
  slider.value = value;
  slider.dispatchEvent(new Event("change", { bubbles: true }));
}

function requestLines(service: MockService): string[] {
  return service.requests.map((r) => `${r.method} ${r.path}`);
}

beforeEach(() => {
  document.body.innerHTML = "";
  svc = new MockService();
  app = mount(svc);
});

describe("loading", () => {
  it("renders events, gauges and grid from the service state", async () => {
    svc.events = [makeEvent("e1", { name: "focus block", duration_min: 90 })];
    svc.schedule = packedSchedule(svc.events);
    await app.load();
    expect(root.innerHTML).toContain("focus block");
    expect(root.querySelectorAll(".grid tr").length).toBe(18);
    expect(input('.vad[name="arousal"]').value).toBe("0.50");
    expect(root.querySelector(".placements")!.textContent).toContain("09:00-10:30");
  });

  it("renders no placements when nothing is solved yet", async () => {
    await app.load();
    expect(root.innerHTML).toContain("no schedule solved yet");
    expect(requestLines(svc)).toEqual(["GET /state", "GET /schedule"]);
  });
});

describe("submitting an event", () => {
  it("posts the form and renders the new event", async () => {
    await app.load();
    fillForm({ name: "standup", duration: "30", priority: "0.7" });
    submitForm();
    await app.idle();
    expect(requestLines(svc)).toContain("POST /events");
    expect(svc.events.map((e) => e.name)).toEqual(["standup"]);
    expect(root.querySelector(".events")!.textContent).toContain("standup");
    // the form resets after a successful submit
    expect(input('#event-form [name="name"]').value).toBe("");
  });

  it("blocks duration below one minute client-side", async () => {
    await app.load();
    const before = svc.requests.length;
    fillForm({ name: "zero", duration: "0" });
    submitForm();
    await app.idle();
    expect(svc.requests.length).toBe(before);
    expect(root.querySelector(".form-error")!.textContent).toContain("duration");
    // the draft survives so the user can correct it
    expect(input('#event-form [name="name"]').value).toBe("zero");
  });

  it("surfaces a server rejection inline without changing the list", async () => {
    svc.events = [makeEvent("e1", { name: "kept" })];
    await app.load();
    svc.rejectNextEvent = { code: "ValidationFailed", message: "duplicate event id" };
    fillForm({ name: "dup", duration: "30" });
    submitForm();
    await app.idle();
    expect(root.querySelector(".form-error")!.textContent).toContain("duplicate event id");
    const names = [...root.querySelectorAll(".ev-name")].map((n) => n.textContent);
    expect(names).toEqual(["kept"]);
  });
});

describe("what-if sliders", () => {
  beforeEach(async () => {
    svc.events = [
      makeEvent("e1", { name: "focus", duration_min: 90, cognitive_load: 0.9 }),
      makeEvent("e2", { name: "mail", duration_min: 30, cognitive_load: 0.2 }),
    ];
    svc.schedule = packedSchedule(svc.events);
    await app.load();
  });

  it("raising arousal past the threshold re-solves and diffs the answer", async () => {
    // service answer to the stress re-solve: mail pushed one hour later
    const next = packedSchedule(svc.events);
    next.placements[1] = { ...next.placements[1], start_slot: 5, end_slot: 6 };
    svc.solveQueue.push(next);

    moveSlider("arousal", "0.9");
    await app.idle();

    expect(requestLines(svc)).toEqual([
      "GET /state", "GET /schedule",
      "POST /emotion", "POST /solve", "GET /schedule", "GET /state",
    ]);
    expect(svc.requests[2].body).toEqual({ valence: 0.5, arousal: 0.9, dominance: 0.5 });
    expect(root.querySelector(".banner.stress")!.textContent).toContain("stress mode");
    const diff = root.querySelector(".diff")!;
    expect(diff.textContent).toContain("re-solved: 1 changed");
    expect(diff.textContent).toContain("mail: 10:30 → 11:30");
    const chip = root.querySelector('.chip.moved[data-event="e2"]');
    expect(chip).not.toBeNull();
    expect(root.querySelector(".placements")!.textContent).toContain("11:30-12:00 mail");
  });

  it("an unchanged answer renders an empty diff", async () => {
    svc.solveQueue.push(packedSchedule(svc.events));
    moveSlider("dominance", "0.50");
    await app.idle();
    expect(root.querySelector(".diff")!.textContent).toContain("no placements changed");
    expect(root.querySelector(".chip.moved")).toBeNull();
  });

  it("skips solving entirely when there are no events", async () => {
    svc.events = [];
    svc.schedule = null;
    await app.load();
    expect(root.querySelector("#solve")!.hasAttribute("disabled")).toBe(true);
    moveSlider("arousal", "0.9");
    await app.idle();
    const lines = requestLines(svc);
    expect(lines).toContain("POST /emotion");
    expect(lines).not.toContain("POST /solve");
  });

  it("renders an infeasible answer as an error banner", async () => {
    svc.failNextSolve = {
      code: "Infeasible",
      message: "sensitive events cannot be scheduled while distressed",
    };
    moveSlider("arousal", "0.95");
    await app.idle();
    const banner = root.querySelector(".banner.error")!;
    expect(banner.textContent).toContain("Infeasible");
    expect(banner.textContent).toContain("sensitive events");
    // the old schedule stays on screen, untouched
    expect(root.querySelector(".placements")!.textContent).toContain("09:00-10:30 focus");
  });
});

describe("other mutations", () => {
  it("remove button deletes the event and refreshes", async () => {
    svc.events = [makeEvent("e1", { name: "gone" })];
    await app.load();
    (root.querySelector('[data-del="e1"]') as HTMLElement).click();
    await app.idle();
    expect(svc.events).toEqual([]);
    expect(root.innerHTML).toContain("no events yet");
  });

  it("the re-optimize button solves and renders the schedule list", async () => {
    svc.events = [makeEvent("e1", { name: "focus" })];
    await app.load();
    (root.querySelector("#solve") as HTMLElement).click();
    await app.idle();
    expect(requestLines(svc)).toContain("POST /solve");
    expect(root.querySelector(".placements")!.textContent).toContain("focus");
  });

  it("keeps a single mutation in flight and disables controls meanwhile", async () => {
    svc.events = [makeEvent("e1")];
    let release: () => void = () => undefined;
    const gate = new Promise<void>((r) => { release = r; });
    const realFetch = svc.fetch;
    let gated = false;
    (svc as { fetch: typeof svc.fetch }).fetch = async (url, init) => {
      if (gated) await gate;
      return realFetch(url, init);
    };
    app = mount(svc);
    await app.load();

    gated = true;
    const before = svc.requests.length;
    (root.querySelector("#solve") as HTMLElement).click();
    expect(root.querySelector(".app.pending")).not.toBeNull();
    // every control is refused while the first request is in flight;
    // the blocked request itself is not even logged yet
    (root.querySelector("#solve") as HTMLElement).click();
    submitForm();
    expect(svc.requests.length).toBe(before);
    gated = false;
    release();
    await app.idle();
    expect(root.querySelector(".app.pending")).toBeNull();
    expect(requestLines(svc).slice(before)).toEqual([
      "POST /solve", "GET /schedule", "GET /state",
    ]);
  });
});

describe("reload", () => {
  it("reproduces the view byte-identically from server state alone", async () => {
    svc.events = [
      makeEvent("e1", { name: "focus", duration_min: 90, cognitive_load: 0.9 }),
      makeEvent("e2", { name: "mail" }),
    ];
    svc.schedule = packedSchedule(svc.events);
    await app.load();

    // interact so the first view carries transient residue (a diff)
    const next = packedSchedule(svc.events);
    next.placements[1] = { ...next.placements[1], start_slot: 6, end_slot: 7 };
    svc.solveQueue.push(next);
    moveSlider("arousal", "0.9");
    await app.idle();
    expect(root.querySelector(".diff")).not.toBeNull();
    const firstRoot = root;

    // a reload is a fresh app against the same service
    const second = mount(svc);
    await second.load();
    const reloaded = root.innerHTML;
    await second.load();
    expect(root.innerHTML).toBe(reloaded);

    // and the pre-reload residue is gone, by construction
    expect(root.querySelector(".diff")).toBeNull();
    expect(reloaded).not.toBe(firstRoot.innerHTML);

    // a third instance agrees byte for byte
    const third = mount(svc);
    await third.load();
    expect(root.innerHTML).toBe(reloaded);
  });
});
