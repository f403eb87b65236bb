/**
 * Rank links between two adjacent session rows.
 *
 * Each link is a beat retrieved for both rows, drawn as a line from its
 * rank slot in the upper strip to its rank slot in the lower strip. Links
 * that touch the active row's brushed ranks are drawn fully opaque; all
 * others stay faint so shared structure is visible without burying the
 * selection.
 */

import { svgEl } from "./svg.js";
import type { BrushRange, DotStripGeom } from "./dotstrip.js";
import { rankCenterX } from "./dotstrip.js";
import type { Link, LinkSet } from "./types.js";

export const LINK_OPAQUE = 1.0;
export const LINK_FAINT = 0.15;

/**
 * A link is emphasized when its rank on the active row's side falls inside
 * that row's brush. Pairs not involving the active row have nothing to
 * emphasize.
 */
export function linkEmphasized(
  link: Link,
  set: LinkSet,
  activeRow: number,
  brush: BrushRange,
): boolean {
  if (activeRow === set.upper) {
    return link.rank_in_upper >= brush.from && link.rank_in_upper < brush.to;
  }
  if (activeRow === set.lower) {
    return link.rank_in_lower >= brush.from && link.rank_in_lower < brush.to;
  }
  return false;
}

export interface LinkBandGeom {
  width: number;
  height: number;
  strip: DotStripGeom;
}

export function renderLinks(
  parent: Element,
  set: LinkSet,
  geom: LinkBandGeom,
  activeRow: number,
  brush: BrushRange,
  colorFor?: (link: Link) => string,
  onHover?: (link: Link | null) => void,
): SVGSVGElement {
  const svg = svgEl("svg", {
    width: geom.width,
    height: geom.height,
    class: "links",
  });
  svg.setAttribute("data-upper", String(set.upper));
  svg.setAttribute("data-lower", String(set.lower));

  for (const link of set.links) {
    const line = svgEl("line", {
      x1: rankCenterX(link.rank_in_upper, geom.strip),
      y1: 0,
      x2: rankCenterX(link.rank_in_lower, geom.strip),
      y2: geom.height,
      stroke: colorFor ? colorFor(link) : "#888",
      "stroke-width": 1,
      opacity: linkEmphasized(link, set, activeRow, brush) ? LINK_OPAQUE : LINK_FAINT,
    });
    line.setAttribute("data-beat", link.beat_id);
    line.setAttribute("data-rank-upper", String(link.rank_in_upper));
    line.setAttribute("data-rank-lower", String(link.rank_in_lower));
    if (onHover) {
      line.addEventListener("mouseenter", () => onHover(link));
      line.addEventListener("mouseleave", () => onHover(null));
    }
    svg.appendChild(line);
  }

  parent.appendChild(svg);
  return svg;
}
