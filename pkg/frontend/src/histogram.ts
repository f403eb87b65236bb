/**
 * Neighbor class histogram for one session row.
 *
 * Bars appear in the order the API sends them, which is already most
 * frequent first; the client never re-sorts. Hovering a bar reports the
 * exact count through the callback so the shell can surface it, and each
 * bar also carries a <title> for the native tooltip.
 */

import { ColorScale } from "./colors.js";
import { svgEl } from "./svg.js";
import type { HistogramBin } from "./types.js";

export interface HistogramGeom {
  width: number;
  height: number;
  pad: number;
  barGap: number;
}

export const DEFAULT_HISTOGRAM_GEOM: HistogramGeom = {
  width: 140,
  height: 110,
  pad: 6,
  barGap: 4,
};

export interface HistogramHover {
  code: number;
  name: string;
  count: number;
}

export function renderHistogram(
  parent: SVGElement,
  bins: HistogramBin[],
  scale: ColorScale,
  geom: HistogramGeom = DEFAULT_HISTOGRAM_GEOM,
  onHover?: (hover: HistogramHover | null) => void,
): SVGRectElement[] {
  const innerW = geom.width - 2 * geom.pad;
  const innerH = geom.height - 2 * geom.pad;
  const maxCount = Math.max(1, ...bins.map((b) => b.count));
  const slot = bins.length > 0 ? innerW / bins.length : innerW;
  const barW = Math.max(1, slot - geom.barGap);

  const rects: SVGRectElement[] = [];
  bins.forEach((bin, i) => {
    const h = (bin.count / maxCount) * innerH;
    const rect = svgEl("rect", {
      x: geom.pad + i * slot + geom.barGap / 2,
      y: geom.height - geom.pad - h,
      width: barW,
      height: h,
      fill: scale.color(bin.label),
    });
    rect.setAttribute("data-code", String(bin.label.code));
    rect.setAttribute("data-count", String(bin.count));

    const title = svgEl("title");
    title.textContent = `${bin.label.name}: ${bin.count}`;
    rect.appendChild(title);

    if (onHover) {
      rect.addEventListener("mouseenter", () =>
        onHover({ code: bin.label.code, name: bin.label.name, count: bin.count }),
      );
      rect.addEventListener("mouseleave", () => onHover(null));
    }
    parent.appendChild(rect);
    rects.push(rect);
  });
  return rects;
}
