/**
 * Browser entry point.
 *
 * Thin glue: pick a beat from the pool listing, open a session on it, and
 * mount the session workbench plus the condition toggle. The API base URL
 * comes from the ?api= query parameter and defaults to the local service.
 */

import { ApiClient, HttpApiClient } from "./api.js";
import { ColorScale } from "./colors.js";
import { SessionView } from "./session.js";
import type { Condition } from "./state.js";
import type { BeatSummary } from "./types.js";

const DEFAULT_API_BASE = "http://127.0.0.1:8000";

const CONDITIONS: Condition[] = ["knn", "knn+editor", "baseline"];

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? DEFAULT_API_BASE;
}

async function renderBeatList(
  api: ApiClient,
  scale: ColorScale,
  listEl: HTMLElement,
  onPick: (beat: BeatSummary) => void,
): Promise<void> {
  const page = await api.listBeats({ pageSize: 50 });
  for (const beat of page.beats) {
    const item = document.createElement("button");
    item.className = "beat-item";
    item.textContent = `${beat.id} (${beat.label.name})`;
    item.style.borderLeftColor = scale.color(beat.label);
    item.addEventListener("click", () => onPick(beat));
    listEl.appendChild(item);
  }
}

async function main(): Promise<void> {
  const api = new HttpApiClient(apiBase());
  const scale = new ColorScale();

  const listEl = document.getElementById("beat-list")!;
  const sessionEl = document.getElementById("session")!;
  const toggleEl = document.getElementById("condition-toggle")!;

  let view: SessionView | null = null;

  for (const condition of CONDITIONS) {
    const button = document.createElement("button");
    button.textContent = condition;
    button.addEventListener("click", () => view?.setCondition(condition));
    toggleEl.appendChild(button);
  }

  await renderBeatList(api, scale, listEl, (beat) => {
    void (async () => {
      const session = await api.createSession(beat.id);
      sessionEl.replaceChildren();
      view = new SessionView(sessionEl, { api, scale });
      view.setCondition("knn+editor");
      await view.load(session);
    })();
  });
}

main().catch((err) => {
  const el = document.getElementById("session");
  if (el) el.textContent = `failed to start: ${err instanceof Error ? err.message : err}`;
});
