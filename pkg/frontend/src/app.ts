// Controller: owns the last server responses plus transient UI state,
// re-renders the whole tree after every change, and keeps at most one
// mutation in flight (controls are disabled while pending).

import { ApiError, Client } from "./api.js";
import { computeDiff } from "./diff.js";
import { renderApp, slotCount } from "./view.js";
import type { ScheduleDoc, StateDoc, ViewModel } from "./types.js";
import { freshDraft, freshUi } from "./types.js";

export class App {
  private client: Client;
  private root: HTMLElement;
  private state: StateDoc | null = null;
  private schedule: ScheduleDoc | null = null;
  private ui = freshUi();
  private inflight: Promise<void> | null = null;

  constructor(root: HTMLElement, client: Client) {
    this.root = root;
    this.client = client;
    root.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const form = ev.target as HTMLElement;
      if (form.id === "event-form") this.submitEvent();
    });
    root.addEventListener("click", (ev) => {
      const el = ev.target as HTMLElement;
      const del = el.getAttribute("data-del");
      if (del !== null) this.deleteEvent(del);
      else if (el.id === "solve") this.reoptimize();
    });
    // live label next to each slider; the request fires on release
    root.addEventListener("input", (ev) => {
      const el = ev.target as HTMLInputElement;
      if (el.classList.contains("vad")) {
        const val = el.closest(".gauge")?.querySelector(".val");
        if (val) val.textContent = Number(el.value).toFixed(2);
      }
    });
    root.addEventListener("change", (ev) => {
      const el = ev.target as HTMLInputElement;
      if (el.classList.contains("vad")) this.whatIf();
    });
  }

  /** Fetch everything and render; reload == calling this again. */
  async load(): Promise<void> {
    this.state = await this.client.getState();
    this.schedule = await this.client.getSchedule();
    this.ui = freshUi();
    this.render();
  }

  /** Settles when no request is in flight (for tests). */
  async idle(): Promise<void> {
    while (this.inflight) await this.inflight;
  }

  viewModel(): ViewModel {
    if (!this.state) throw new Error("load() first");
    return { state: this.state, schedule: this.schedule, ui: this.ui };
  }

  render(): void {
    this.root.innerHTML = renderApp(this.viewModel());
  }

  private readForm(): void {
    const form = this.root.querySelector("#event-form") as HTMLFormElement | null;
    if (!form) return;
    const get = (name: string) =>
      form.querySelector(`[name="${name}"]`) as HTMLInputElement;
    this.ui.draft = {
      name: get("name").value,
      duration: get("duration").value,
      priority: get("priority").value,
      load: get("load").value,
      multitask: get("multitask").checked,
      sensitive: get("sensitive").checked,
    };
  }

  private sliderValues(): { v: number; a: number; d: number } {
    const read = (dim: string) => {
      const el = this.root.querySelector(`.vad[name="${dim}"]`) as HTMLInputElement | null;
      return el ? Number(el.value) : 0.5;
    };
    return { v: read("valence"), a: read("arousal"), d: read("dominance") };
  }

  private run(task: () => Promise<void>): Promise<void> {
    if (this.ui.pending) return Promise.resolve();
    this.ui.pending = true;
    this.ui.notice = null;
    this.render();
    const done = task()
      .catch((err) => {
        if (err instanceof ApiError) {
          const hint = err.code === "Infeasible"
            ? " (relax an event or calm the what-if sliders)"
            : "";
          this.ui.notice = { kind: "error", text: `${err.code}: ${err.message}${hint}` };
        } else {
          this.ui.notice = { kind: "error", text: String(err) };
        }
      })
      .then(async () => {
        this.state = await this.client.getState();
        this.ui.pending = false;
        this.inflight = null;
        this.render();
      });
    this.inflight = done;
    return done;
  }

  submitEvent(): Promise<void> {
    this.readForm();
    const d = this.ui.draft;
    const duration = Number(d.duration);
    if (!Number.isInteger(duration) || duration < 1) {
      this.ui.formError = "duration must be a whole number of minutes, at least 1";
      this.render();
      return Promise.resolve();
    }
    const priority = Number(d.priority);
    if (!(priority >= 0 && priority <= 1)) {
      this.ui.formError = "priority must be between 0 and 1";
      this.render();
      return Promise.resolve();
    }
    this.ui.formError = null;
    return this.run(async () => {
      const doc: Record<string, unknown> = {
        duration_min: duration,
        priority,
        cognitive_load: Number(d.load),
        multitask: d.multitask,
        sensitive: d.sensitive,
      };
      if (d.name.trim() !== "") doc.name = d.name.trim();
      try {
        await this.client.addEvent(doc);
        this.ui.draft = freshDraft();
      } catch (err) {
        if (err instanceof ApiError && err.code === "ValidationFailed") {
          this.ui.formError = err.message;
          return;
        }
        throw err;
      }
    });
  }

  deleteEvent(id: string): Promise<void> {
    return this.run(async () => {
      await this.client.deleteEvent(id);
    });
  }

  /** POST the slider triple, then re-solve and diff if there is anything to place. */
  whatIf(): Promise<void> {
    const { v, a, d } = this.sliderValues();
    return this.run(async () => {
      await this.client.setEmotion(v, a, d);
      if (!this.state || this.state.events.length === 0) return;
      await this.resolveAndDiff();
    });
  }

  reoptimize(): Promise<void> {
    return this.run(() => this.resolveAndDiff());
  }

  private async resolveAndDiff(): Promise<void> {
    const before = this.schedule ? this.schedule.placements : [];
    await this.client.solve();
    // render what the service reports, not what solve returned
    const fetched = await this.client.getSchedule();
    if (fetched) {
      this.schedule = fetched;
      this.ui.diff = computeDiff(before, fetched.placements);
    }
  }
}

export function createApp(root: HTMLElement, client: Client): App {
  return new App(root, client);
}

export { slotCount };
