/** Rank strip geometry, brushing, and dot ordering. */

import { describe, expect, it } from "vitest";

import { ColorScale } from "../src/colors.js";
import {
  BrushRange,
  DotStrip,
  rankCenterX,
  rankFromX,
  slotWidth,
} from "../src/dotstrip.js";
import type { Session } from "../src/types.js";
import { loadFixture } from "./helpers.js";

const GEOM = { width: 420, height: 30, pad: 6, k: 50 };

describe("rank geometry", () => {
  it("maps rank centers back to the same rank", () => {
    for (const rank of [0, 1, 7, 25, 49]) {
      expect(rankFromX(rankCenterX(rank, GEOM), GEOM)).toBe(rank);
    }
  });

  it("clamps positions outside the strip to the edge ranks", () => {
    expect(rankFromX(-100, GEOM)).toBe(0);
    expect(rankFromX(GEOM.width + 100, GEOM)).toBe(GEOM.k - 1);
  });

  it("tiles the strip with equal slots", () => {
    const slot = slotWidth(GEOM);
    expect(slot * GEOM.k).toBeCloseTo(GEOM.width - 2 * GEOM.pad, 10);
    expect(rankCenterX(1, GEOM) - rankCenterX(0, GEOM)).toBeCloseTo(slot, 10);
  });
});

describe("DotStrip", () => {
  function mountStrip(onBrush?: (r: BrushRange, settled: boolean) => void): DotStrip {
    const session = loadFixture<Session>("session_fresh");
    const host = document.createElement("div");
    document.body.appendChild(host);
    return new DotStrip(
      host,
      session.rows[0].neighbors.neighbors,
      new ColorScale(),
      GEOM,
      { from: 0, to: 5 },
      { onBrush },
    );
  }

  it("draws one dot per neighbor with the class color", () => {
    const session = loadFixture<Session>("session_fresh");
    const strip = mountStrip();
    const dots = [...strip.svg.querySelectorAll("circle")];
    expect(dots.length).toBe(50);
    dots.forEach((dot, i) => {
      expect(dot.getAttribute("fill")).toBe(
        session.rows[0].neighbors.neighbors[i].label.color,
      );
    });
  });

  it("clamps brush ranges to the strip and keeps them non-empty", () => {
    const strip = mountStrip();
    strip.setBrush(-3, 200);
    expect(strip.brush()).toEqual({ from: 0, to: 50 });
    strip.setBrush(10, 10);
    expect(strip.brush()).toEqual({ from: 10, to: 11 });
  });

  it("notifies only when asked, carrying the settled flag", () => {
    const seen: Array<[BrushRange, boolean]> = [];
    const strip = mountStrip((r, settled) => seen.push([r, settled]));

    strip.setBrush(2, 8);
    expect(seen).toEqual([]);

    strip.setBrush(2, 8, { notify: true, settled: false });
    strip.setBrush(2, 9, { notify: true, settled: true });
    expect(seen).toEqual([
      [{ from: 2, to: 8 }, false],
      [{ from: 2, to: 9 }, true],
    ]);
  });

  it("keeps the brush rect in sync with the range", () => {
    const strip = mountStrip();
    strip.setBrush(5, 12);
    const rect = strip.svg.querySelector(".brush")!;
    expect(rect.getAttribute("data-from")).toBe("5");
    expect(rect.getAttribute("data-to")).toBe("12");
    const slot = slotWidth(GEOM);
    expect(Number(rect.getAttribute("x"))).toBeCloseTo(GEOM.pad + 5 * slot, 1);
    expect(Number(rect.getAttribute("width"))).toBeCloseTo(7 * slot, 1);
  });
});
