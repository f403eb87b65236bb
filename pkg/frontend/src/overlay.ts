/**
 * Neighbor overlay for one row's brushed rank range.
 *
 * The query trace stays fully opaque on top; each brushed neighbor is drawn
 * behind it in its class color at reduced opacity, so the eye can compare
 * shapes without losing the query.
 */

import { ColorScale } from "./colors.js";
import { renderWaveform, WaveformGeom } from "./waveform.js";
import type { Overlay } from "./types.js";

export const OVERLAY_QUERY_OPACITY = 1.0;
export const OVERLAY_NEIGHBOR_OPACITY = 0.35;

export function renderOverlay(
  parent: SVGElement,
  overlay: Overlay,
  geom: WaveformGeom,
  scale: ColorScale,
  queryColor: string,
): void {
  for (const sig of overlay.signals) {
    const line = renderWaveform(parent, sig.samples, geom, {
      color: scale.color(sig.label),
      opacity: OVERLAY_NEIGHBOR_OPACITY,
      strokeWidth: 1,
      role: "neighbor",
    });
    line.setAttribute("data-beat", sig.beat_id);
    line.setAttribute("data-rank", String(sig.rank));
  }
  renderWaveform(parent, overlay.query.samples, geom, {
    color: queryColor,
    opacity: OVERLAY_QUERY_OPACITY,
    strokeWidth: 1.8,
    role: "query",
  });
}
