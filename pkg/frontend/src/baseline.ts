/**
 * Surrogate-saliency panel for one beat.
 *
 * Shows the beat's waveform with the salient sample regions shaded, a strip
 * of per-segment surrogate weights under it, and a caption naming the
 * predicted class in full with its probability to two decimals.
 */

import { ColorScale, withAlpha } from "./colors.js";
import { svgEl } from "./svg.js";
import { renderWaveform, sampleX, WaveformGeom } from "./waveform.js";
import type { Baseline } from "./types.js";

export const SALIENCE_BAND_ALPHA = 0.18;

export function baselineCaption(baseline: Baseline): string {
  return `${baseline.predicted.name} (p = ${baseline.probability.toFixed(2)})`;
}

export interface BaselinePanelGeom {
  wave: WaveformGeom;
  weightStripHeight: number;
}

export function renderBaselinePanel(
  parent: Element,
  baseline: Baseline,
  scale: ColorScale,
  geom: BaselinePanelGeom,
): HTMLElement {
  const root = document.createElement("div");
  root.className = "baseline";

  const caption = document.createElement("div");
  caption.className = "baseline-caption";
  caption.textContent = baselineCaption(baseline);
  root.appendChild(caption);

  const classColor = scale.color(baseline.predicted);
  const svg = svgEl("svg", {
    width: geom.wave.width,
    height: geom.wave.height + geom.weightStripHeight,
    class: "baseline-chart",
  });

  // shaded bands first so the trace draws over them
  for (const region of baseline.salient_regions) {
    const x0 = sampleX(region.start, geom.wave);
    const x1 = sampleX(region.end, geom.wave);
    const band = svgEl("rect", {
      x: x0.toFixed(2),
      y: 0,
      width: (x1 - x0).toFixed(2),
      height: geom.wave.height,
      fill: withAlpha(classColor, SALIENCE_BAND_ALPHA),
      class: "salient-band",
    });
    band.setAttribute("data-start", String(region.start));
    band.setAttribute("data-end", String(region.end));
    svg.appendChild(band);
  }

  renderWaveform(svg, baseline.samples, geom.wave, { color: classColor, role: "baseline-trace" });

  const weights = baseline.per_segment_weights;
  const maxAbs = Math.max(1e-12, ...weights.map((w) => Math.abs(w)));
  const stripTop = geom.wave.height;
  const halfStrip = geom.weightStripHeight / 2;
  baseline.segment_bounds.forEach(([start, end], i) => {
    const x0 = sampleX(start, geom.wave);
    const x1 = sampleX(Math.max(end - 1, start), geom.wave);
    const w = weights[i];
    const h = (Math.abs(w) / maxAbs) * halfStrip;
    const bar = svgEl("rect", {
      x: x0.toFixed(2),
      y: (w >= 0 ? stripTop + halfStrip - h : stripTop + halfStrip).toFixed(2),
      width: Math.max(x1 - x0, 1).toFixed(2),
      height: Math.max(h, 0.5).toFixed(2),
      // weight sign decides whether the segment pushed toward or away
      fill: w >= 0 ? classColor : "#999",
      class: "segment-weight",
    });
    bar.setAttribute("data-segment", String(i));
    svg.appendChild(bar);
  });

  root.appendChild(svg);
  parent.appendChild(root);
  return root;
}
