/**
 * Test support: fixture loading and a fixture-backed ApiClient.
 *
 * The fixtures under ../fixtures are responses recorded from the real
 * service, so these tests exercise the exact payload shapes the UI will
 * see in production without needing the service to be running.
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { join, dirname } from "node:path";

import { ApiClient, ApiError, ListBeatsOptions, OverlayOptions } from "../src/api.js";
import type {
  Baseline,
  BeatPage,
  ErrorPayload,
  LinkSet,
  Overlay,
  Session,
  Transformation,
} from "../src/types.js";

const FIXTURE_DIR = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

export function loadFixture<T>(name: string): T {
  const raw = readFileSync(join(FIXTURE_DIR, `${name}.json`), "utf-8");
  return JSON.parse(raw) as T;
}

export interface OverlayCall {
  opts: OverlayOptions;
  signal: AbortSignal | undefined;
}

function abortError(): DOMException {
  return new DOMException("aborted", "AbortError");
}

/**
 * ApiClient over the recorded fixtures. Every call is logged; overlay calls
 * can optionally be held open so tests can observe cancellation.
 */
export class FixtureClient implements ApiClient {
  calls: string[] = [];
  overlayCalls: OverlayCall[] = [];

  /** Responses, swappable per test. */
  beatsPage: BeatPage = loadFixture<BeatPage>("beats");
  session: Session = loadFixture<Session>("session_fresh");
  editResult: Session | ErrorPayload = loadFixture<Session>("session_one_edit");
  editStatus = 200;
  linkSet: LinkSet = loadFixture<LinkSet>("links");
  overlayResult: Overlay = loadFixture<Overlay>("overlay");
  baselineResult: Baseline = loadFixture<Baseline>("baseline");

  /** When true, overlay promises wait until resolveHeldOverlays() runs. */
  holdOverlays = false;
  private heldOverlays: Array<{
    resolve: (o: Overlay) => void;
    reject: (e: unknown) => void;
    signal: AbortSignal | undefined;
  }> = [];

  listBeats(opts: ListBeatsOptions = {}): Promise<BeatPage> {
    this.calls.push(`listBeats:${JSON.stringify(opts)}`);
    return Promise.resolve(this.beatsPage);
  }

  baseline(beatId: string): Promise<Baseline> {
    this.calls.push(`baseline:${beatId}`);
    return Promise.resolve(this.baselineResult);
  }

  createSession(beatId: string): Promise<Session> {
    this.calls.push(`createSession:${beatId}`);
    return Promise.resolve(this.session);
  }

  getSession(sessionId: string): Promise<Session> {
    this.calls.push(`getSession:${sessionId}`);
    return Promise.resolve(this.session);
  }

  applyEdit(sessionId: string, edit: Transformation): Promise<Session> {
    this.calls.push(`applyEdit:${sessionId}:${edit.kind}:${edit.magnitude}`);
    if (this.editStatus !== 200) {
      return Promise.reject(new ApiError(this.editStatus, this.editResult as ErrorPayload));
    }
    return Promise.resolve(this.editResult as Session);
  }

  links(sessionId: string, upper?: number): Promise<LinkSet> {
    this.calls.push(`links:${sessionId}:${upper ?? "default"}`);
    return Promise.resolve(this.linkSet);
  }

  overlay(
    sessionId: string,
    opts: OverlayOptions = {},
    signal?: AbortSignal,
  ): Promise<Overlay> {
    this.calls.push(`overlay:${sessionId}:${opts.row}:${opts.from}:${opts.to}`);
    this.overlayCalls.push({ opts, signal });
    if (signal?.aborted) return Promise.reject(abortError());
    if (!this.holdOverlays) return Promise.resolve(this.overlayResult);
    return new Promise<Overlay>((resolve, reject) => {
      const entry = { resolve, reject, signal };
      this.heldOverlays.push(entry);
      signal?.addEventListener("abort", () => reject(abortError()));
    });
  }

  /** Release held overlay promises; aborted ones have already rejected. */
  resolveHeldOverlays(): void {
    for (const entry of this.heldOverlays) {
      if (!entry.signal?.aborted) entry.resolve(this.overlayResult);
    }
    this.heldOverlays = [];
  }

  overlayCallCount(): number {
    return this.overlayCalls.length;
  }
}

/** Let queued promise callbacks run. */
export async function flushAsync(times = 4): Promise<void> {
  for (let i = 0; i < times; i++) {
    await Promise.resolve();
  }
}
