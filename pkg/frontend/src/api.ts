/**
 * HTTP client for the beatlens explain service.
 *
 * Every method maps to exactly one endpoint and returns the parsed JSON
 * payload. Non-2xx responses become ApiError carrying the service's
 * {code, message} envelope, so callers can branch on the machine-readable
 * code instead of scraping message text.
 */

import type {
  Baseline,
  BeatPage,
  ErrorPayload,
  LinkSet,
  Overlay,
  Session,
  Transformation,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, payload: ErrorPayload) {
    super(payload.message);
    this.name = "ApiError";
    this.status = status;
    this.code = payload.code;
  }
}

export interface ListBeatsOptions {
  label?: number;
  page?: number;
  pageSize?: number;
}

export interface OverlayOptions {
  row?: number;
  from?: number;
  to?: number;
}

/**
 * The surface the views talk to. Tests substitute a fixture-backed
 * implementation; production uses HttpApiClient below.
 */
export interface ApiClient {
  listBeats(opts?: ListBeatsOptions): Promise<BeatPage>;
  baseline(beatId: string): Promise<Baseline>;
  createSession(beatId: string): Promise<Session>;
  getSession(sessionId: string): Promise<Session>;
  applyEdit(sessionId: string, edit: Transformation): Promise<Session>;
  links(sessionId: string, upper?: number): Promise<LinkSet>;
  overlay(sessionId: string, opts?: OverlayOptions, signal?: AbortSignal): Promise<Overlay>;
}

export class HttpApiClient implements ApiClient {
  private readonly base: string;

  constructor(baseUrl: string) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(
    path: string,
    init: RequestInit = {},
    signal?: AbortSignal,
  ): Promise<T> {
    const res = await fetch(this.base + path, { ...init, signal });
    const body = await res.json();
    if (!res.ok) {
      throw new ApiError(res.status, body as ErrorPayload);
    }
    return body as T;
  }

  listBeats(opts: ListBeatsOptions = {}): Promise<BeatPage> {
    const params = new URLSearchParams();
    if (opts.label !== undefined) params.set("label", String(opts.label));
    if (opts.page !== undefined) params.set("page", String(opts.page));
    if (opts.pageSize !== undefined) params.set("page_size", String(opts.pageSize));
    const qs = params.toString();
    return this.request<BeatPage>(qs ? `/beats?${qs}` : "/beats");
  }

  baseline(beatId: string): Promise<Baseline> {
    return this.request<Baseline>(`/beats/${encodeURIComponent(beatId)}/baseline`);
  }

  createSession(beatId: string): Promise<Session> {
    return this.request<Session>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ beat_id: beatId }),
    });
  }

  getSession(sessionId: string): Promise<Session> {
    return this.request<Session>(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  applyEdit(sessionId: string, edit: Transformation): Promise<Session> {
    // The edits endpoint takes region as a two-int array, not an object.
    const body = {
      kind: edit.kind,
      magnitude: edit.magnitude,
      region: edit.region === null ? null : [edit.region.start, edit.region.end],
    };
    return this.request<Session>(`/sessions/${encodeURIComponent(sessionId)}/edits`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  links(sessionId: string, upper?: number): Promise<LinkSet> {
    const suffix = upper === undefined ? "" : `?upper=${upper}`;
    return this.request<LinkSet>(`/sessions/${encodeURIComponent(sessionId)}/links${suffix}`);
  }

  overlay(
    sessionId: string,
    opts: OverlayOptions = {},
    signal?: AbortSignal,
  ): Promise<Overlay> {
    const params = new URLSearchParams();
    if (opts.row !== undefined) params.set("row", String(opts.row));
    if (opts.from !== undefined) params.set("from", String(opts.from));
    if (opts.to !== undefined) params.set("to", String(opts.to));
    const qs = params.toString();
    const path = `/sessions/${encodeURIComponent(sessionId)}/overlay${qs ? `?${qs}` : ""}`;
    return this.request<Overlay>(path, {}, signal);
  }
}
