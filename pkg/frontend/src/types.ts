// Wire formats of the scheduling service, mirrored field for field.

export interface EventDoc {
  id: string;
  name: string;
  duration_min: number;
  priority: number;
  multitask: boolean;
  cognitive_load: number;
  sensitive: boolean;
  earliest?: number | null;
  latest?: number | null;
}

export interface EmotionDoc {
  valence: number;
  arousal: number;
  dominance: number;
  at: string;
  source: string;
}

// placements inline the event fields and add the slot span
export interface PlacementDoc extends EventDoc {
  start_slot: number;
  end_slot: number;
}

export interface ScheduleDoc {
  objective: number;
  breakdown_temporal: number;
  breakdown_cognitive: number;
  breakdown_emotional: number;
  placements: PlacementDoc[];
  [extra: string]: unknown;
}

export interface HorizonDoc {
  day_start: string;
  day_end: string;
  slot_minutes: number;
}

export interface ConfigDoc {
  weights: {
    alpha_temporal: number;
    alpha_cognitive: number;
    alpha_emotional: number;
  };
  thresholds: {
    t_stress: number;
    c_high: number;
    c_low: number;
    break_slots: number;
  };
  horizon: HorizonDoc;
}

export interface StateDoc {
  events: EventDoc[];
  emotion: EmotionDoc;
  schedule: ScheduleDoc | null;
  config: ConfigDoc;
  next_event_seq: number;
}

export interface ErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}

// one entry per event whose start slot changed between two solves
export interface DiffEntry {
  id: string;
  name: string;
  kind: "moved" | "added" | "removed";
  fromSlot: number | null;
  toSlot: number | null;
}

export interface EventDraft {
  name: string;
  duration: string;
  priority: string;
  load: string;
  multitask: boolean;
  sensitive: boolean;
}

export interface UiState {
  pending: boolean;
  formError: string | null;
  notice: { kind: "error" | "info"; text: string } | null;
  diff: DiffEntry[] | null;
  draft: EventDraft;
}

export interface ViewModel {
  state: StateDoc;
  schedule: ScheduleDoc | null;
  ui: UiState;
}

export function freshDraft(): EventDraft {
  return {
    name: "",
    duration: "30",
    priority: "0.5",
    load: "0.5",
    multitask: false,
    sensitive: false,
  };
}

export function freshUi(): UiState {
  return {
    pending: false,
    formError: null,
    notice: null,
    diff: null,
    draft: freshDraft(),
  };
}
