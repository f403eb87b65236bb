/**
 * Rank strip: one dot per retrieved neighbor, left to right in exactly the
 * rank order the API returned. The client never re-sorts; rank 0 is always
 * the leftmost dot.
 *
 * A horizontal drag across the strip brushes a half-open rank range
 * [from, to). The brush is the only selection mechanism here; the enclosing
 * view decides what to fetch when the brush settles.
 */

import { ColorScale } from "./colors.js";
import { svgEl } from "./svg.js";
import type { Neighbor } from "./types.js";

export interface DotStripGeom {
  width: number;
  height: number;
  pad: number;
  /** Rank slots across the strip, normally the session k. */
  k: number;
}

export const DEFAULT_DOTSTRIP_GEOM: Omit<DotStripGeom, "k"> = {
  width: 420,
  height: 30,
  pad: 6,
};

export function slotWidth(geom: DotStripGeom): number {
  return (geom.width - 2 * geom.pad) / Math.max(geom.k, 1);
}

export function rankCenterX(rank: number, geom: DotStripGeom): number {
  return geom.pad + (rank + 0.5) * slotWidth(geom);
}

/** Map an x offset inside the strip to the rank slot under it. */
export function rankFromX(x: number, geom: DotStripGeom): number {
  const raw = Math.floor((x - geom.pad) / slotWidth(geom));
  return Math.min(Math.max(raw, 0), geom.k - 1);
}

export interface BrushRange {
  from: number;
  to: number;
}

export interface DotStripCallbacks {
  /** Fired on every brush change; settled=true once the drag ends. */
  onBrush?: (range: BrushRange, settled: boolean) => void;
  onHoverDot?: (neighbor: Neighbor | null) => void;
}

export class DotStrip {
  readonly svg: SVGSVGElement;
  private readonly geom: DotStripGeom;
  private readonly callbacks: DotStripCallbacks;
  private readonly brushRect: SVGRectElement;
  private range: BrushRange;
  private dragAnchor: number | null = null;

  constructor(
    parent: Element,
    neighbors: Neighbor[],
    scale: ColorScale,
    geom: DotStripGeom,
    initial: BrushRange,
    callbacks: DotStripCallbacks = {},
  ) {
    this.geom = geom;
    this.callbacks = callbacks;
    this.range = initial;

    this.svg = svgEl("svg", {
      width: geom.width,
      height: geom.height,
      class: "dotstrip",
    });

    this.brushRect = svgEl("rect", {
      y: 1,
      height: geom.height - 2,
      fill: "rgba(120,120,120,0.18)",
      stroke: "#888",
      "stroke-width": 1,
      class: "brush",
    });
    this.svg.appendChild(this.brushRect);

    for (const nb of neighbors) {
      const dot = svgEl("circle", {
        cx: rankCenterX(nb.rank, geom),
        cy: geom.height / 2,
        r: 4,
        fill: scale.color(nb.label),
      });
      dot.setAttribute("data-rank", String(nb.rank));
      dot.setAttribute("data-beat", nb.beat_id);
      if (callbacks.onHoverDot) {
        dot.addEventListener("mouseenter", () => callbacks.onHoverDot?.(nb));
        dot.addEventListener("mouseleave", () => callbacks.onHoverDot?.(null));
      }
      this.svg.appendChild(dot);
    }

    this.svg.addEventListener("mousedown", (ev) => this.dragStart(ev as MouseEvent));
    parent.appendChild(this.svg);
    this.paintBrush();
  }

  brush(): BrushRange {
    return { ...this.range };
  }

  setBrush(from: number, to: number, opts: { notify?: boolean; settled?: boolean } = {}): void {
    const lo = Math.max(0, Math.min(from, this.geom.k));
    const hi = Math.max(lo + 1, Math.min(to, this.geom.k));
    this.range = { from: lo, to: hi };
    this.paintBrush();
    if (opts.notify) {
      this.callbacks.onBrush?.({ ...this.range }, opts.settled ?? false);
    }
  }

  private paintBrush(): void {
    const slot = slotWidth(this.geom);
    const x = this.geom.pad + this.range.from * slot;
    const w = (this.range.to - this.range.from) * slot;
    this.brushRect.setAttribute("x", x.toFixed(2));
    this.brushRect.setAttribute("width", w.toFixed(2));
    this.brushRect.setAttribute("data-from", String(this.range.from));
    this.brushRect.setAttribute("data-to", String(this.range.to));
  }

  private localX(ev: MouseEvent): number {
    const rect = this.svg.getBoundingClientRect();
    return ev.clientX - rect.left;
  }

  private dragStart(ev: MouseEvent): void {
    this.dragAnchor = rankFromX(this.localX(ev), this.geom);
    this.setBrush(this.dragAnchor, this.dragAnchor + 1, { notify: true, settled: false });
    const move = (e: Event) => this.dragMove(e as MouseEvent);
    const up = () => {
      window.removeEventListener("mousemove", move);
      window.removeEventListener("mouseup", up);
      this.dragEnd();
    };
    window.addEventListener("mousemove", move);
    window.addEventListener("mouseup", up);
  }

  private dragMove(ev: MouseEvent): void {
    if (this.dragAnchor === null) return;
    const rank = rankFromX(this.localX(ev), this.geom);
    const from = Math.min(this.dragAnchor, rank);
    const to = Math.max(this.dragAnchor, rank) + 1;
    this.setBrush(from, to, { notify: true, settled: false });
  }

  private dragEnd(): void {
    if (this.dragAnchor === null) return;
    this.dragAnchor = null;
    this.setBrush(this.range.from, this.range.to, { notify: true, settled: true });
  }
}
