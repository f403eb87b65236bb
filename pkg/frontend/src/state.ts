/**
 * View state shared across the workbench panels.
 *
 * Holds the per-row brush ranges, the active row, the sample-region
 * selection used by the editor, the current hover readout, and which
 * condition the workbench is showing. Panels read through this object and
 * re-render on change notifications; none of it is server state.
 */

import type { BrushRange } from "./dotstrip.js";
import type { Link, Neighbor, Region } from "./types.js";
import type { HistogramHover } from "./histogram.js";

export type Condition = "knn" | "knn+editor" | "baseline";

export type Hover =
  | { kind: "class"; hover: HistogramHover }
  | { kind: "neighbor"; neighbor: Neighbor }
  | { kind: "link"; link: Link }
  | null;

/** Fresh rows start brushed to the first five ranks. */
export const DEFAULT_BRUSH_SPAN = 5;

export class ViewState {
  private readonly brushes = new Map<number, BrushRange>();
  private readonly listeners: Array<() => void> = [];
  private activeRowIndex = 0;
  inputRegion: Region | null = null;
  hover: Hover = null;
  condition: Condition = "knn";

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  activeRow(): number {
    return this.activeRowIndex;
  }

  setActiveRow(row: number): void {
    if (row === this.activeRowIndex) return;
    this.activeRowIndex = row;
    this.notify();
  }

  /** Brush for a row, defaulting to [0, min(5, count)). */
  brush(row: number, count: number): BrushRange {
    const stored = this.brushes.get(row);
    if (stored) return { ...stored };
    return { from: 0, to: Math.min(DEFAULT_BRUSH_SPAN, Math.max(count, 1)) };
  }

  setBrush(row: number, range: BrushRange): void {
    this.brushes.set(row, { ...range });
    this.notify();
  }

  setInputRegion(region: Region | null): void {
    this.inputRegion = region;
    this.notify();
  }

  setHover(hover: Hover): void {
    this.hover = hover;
    this.notify();
  }

  setCondition(condition: Condition): void {
    if (condition === this.condition) return;
    this.condition = condition;
    this.notify();
  }
}
