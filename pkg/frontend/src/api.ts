// Thin typed client over the service HTTP API.  The fetch function is
// injected so tests can run against an in-memory mock.

import type {
  EmotionDoc,
  ErrorBody,
  ScheduleDoc,
  StateDoc,
} from "./types.js";

export interface FetchResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<FetchResponse>;

export class ApiError extends Error {
  code: string;
  status: number;
  details: Record<string, unknown>;

  constructor(status: number, body: ErrorBody) {
    super(body.message);
    this.code = body.code;
    this.status = status;
    this.details = body.details;
  }
}

export class Client {
  private base: string;
  private fetchFn: FetchLike;

  constructor(base: string, fetchFn: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: Parameters<FetchLike>[1] = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    const parsed = await res.json();
    if (!res.ok) {
      throw new ApiError(res.status, parsed as ErrorBody);
    }
    return parsed;
  }

  getState(): Promise<StateDoc> {
    return this.request("GET", "/state") as Promise<StateDoc>;
  }

  addEvent(doc: Record<string, unknown>): Promise<{ id: string }> {
    return this.request("POST", "/events", doc) as Promise<{ id: string }>;
  }

  deleteEvent(id: string): Promise<{ ok: boolean }> {
    return this.request("DELETE", `/events/${encodeURIComponent(id)}`) as Promise<{ ok: boolean }>;
  }

  setEmotion(valence: number, arousal: number, dominance: number): Promise<EmotionDoc> {
    return this.request("POST", "/emotion", { valence, arousal, dominance }) as Promise<EmotionDoc>;
  }

  solve(): Promise<ScheduleDoc> {
    return this.request("POST", "/solve") as Promise<ScheduleDoc>;
  }

  /** Latest schedule, or null while none has been solved yet. */
  async getSchedule(): Promise<ScheduleDoc | null> {
    try {
      return (await this.request("GET", "/schedule")) as ScheduleDoc;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) return null;
      throw err;
    }
  }
}
