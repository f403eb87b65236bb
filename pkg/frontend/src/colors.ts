/**
 * Class color bookkeeping.
 *
 * The service ships a hex color with every label payload. All panels must
 * paint a class the same way, so the scale records each code/color pair the
 * first time it appears and refuses any later payload that disagrees. A
 * mismatch would mean two panels silently encoding the same class with
 * different colors, which is exactly the bug this guards against.
 */

import type { ClassLabel } from "./types.js";

export class ColorScale {
  private readonly byCode = new Map<number, string>();
  private readonly byColor = new Map<string, number>();

  color(label: ClassLabel): string {
    const known = this.byCode.get(label.code);
    if (known !== undefined) {
      if (known !== label.color) {
        throw new Error(
          `class ${label.code} seen with colors ${known} and ${label.color}`,
        );
      }
      return known;
    }
    const holder = this.byColor.get(label.color);
    if (holder !== undefined && holder !== label.code) {
      throw new Error(
        `color ${label.color} already assigned to class ${holder}, refused for class ${label.code}`,
      );
    }
    this.byCode.set(label.code, label.color);
    this.byColor.set(label.color, label.code);
    return label.color;
  }

  /** Codes registered so far, in first-seen order. */
  codes(): number[] {
    return [...this.byCode.keys()];
  }
}

/** "#rrggbb" to "rgba(r,g,b,alpha)". */
export function withAlpha(hex: string, alpha: number): string {
  const m = /^#([0-9a-fA-F]{6})$/.exec(hex);
  if (!m) throw new Error(`expected #rrggbb color, got ${hex}`);
  const v = parseInt(m[1], 16);
  const r = (v >> 16) & 0xff;
  const g = (v >> 8) & 0xff;
  const b = v & 0xff;
  return `rgba(${r},${g},${b},${alpha})`;
}
