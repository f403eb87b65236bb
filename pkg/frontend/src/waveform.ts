/**
 * Waveform rendering for fixed-length beats.
 *
 * Samples are normalized to [0, 1] by the service, so the vertical scale is
 * fixed and every waveform in a session shares the same geometry. That keeps
 * overlaid signals and the per-row traces visually comparable.
 */

import { svgEl } from "./svg.js";

export interface WaveformGeom {
  width: number;
  height: number;
  pad: number;
  /** Number of samples the x axis spans. */
  n: number;
}

export const DEFAULT_WAVEFORM_GEOM: Omit<WaveformGeom, "n"> = {
  width: 260,
  height: 110,
  pad: 6,
};

export function sampleX(i: number, geom: WaveformGeom): number {
  const inner = geom.width - 2 * geom.pad;
  const denom = Math.max(geom.n - 1, 1);
  return geom.pad + (i / denom) * inner;
}

export function valueY(v: number, geom: WaveformGeom): number {
  const inner = geom.height - 2 * geom.pad;
  return geom.height - geom.pad - v * inner;
}

export function waveformPoints(samples: number[], geom: WaveformGeom): string {
  const parts: string[] = [];
  for (let i = 0; i < samples.length; i++) {
    parts.push(`${sampleX(i, geom).toFixed(2)},${valueY(samples[i], geom).toFixed(2)}`);
  }
  return parts.join(" ");
}

export interface WaveformStyle {
  color: string;
  opacity?: number;
  strokeWidth?: number;
  role?: string;
}

export function renderWaveform(
  parent: SVGElement,
  samples: number[],
  geom: WaveformGeom,
  style: WaveformStyle,
): SVGPolylineElement {
  const line = svgEl("polyline", {
    points: waveformPoints(samples, geom),
    fill: "none",
    stroke: style.color,
    "stroke-width": style.strokeWidth ?? 1.5,
    opacity: style.opacity ?? 1,
  });
  if (style.role) line.setAttribute("data-role", style.role);
  parent.appendChild(line);
  return line;
}
