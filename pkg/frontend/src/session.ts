/**
 * Session workbench: the stacked rows of one probing session.
 *
 * Each row shows the (possibly transformed) beat on the left, the rank
 * strip of its retrieved neighbors in the middle, and the neighbor class
 * histogram on the right. Link bands between adjacent rows show which
 * neighbors survived the edit. Brushing a rank range on any strip fetches
 * that row's overlay after the brush settles; a superseding brush cancels
 * the in-flight fetch.
 *
 * All server interaction goes through the injected ApiClient. A rejected
 * edit changes nothing here except the editor banner.
 */

import { ApiClient, ApiError } from "./api.js";
import { ColorScale } from "./colors.js";
import { BrushRange, DotStrip, DotStripGeom, DEFAULT_DOTSTRIP_GEOM } from "./dotstrip.js";
import { EditPanel } from "./editor.js";
import { renderHistogram, DEFAULT_HISTOGRAM_GEOM } from "./histogram.js";
import { LINK_FAINT, LINK_OPAQUE, LinkBandGeom, linkEmphasized, renderLinks } from "./links.js";
import { renderOverlay } from "./overlay.js";
import { renderBaselinePanel } from "./baseline.js";
import { ViewState } from "./state.js";
import { clear, svgEl } from "./svg.js";
import { renderWaveform, sampleX, WaveformGeom, DEFAULT_WAVEFORM_GEOM } from "./waveform.js";
import type {
  Baseline,
  LinkSet,
  Overlay,
  Session,
  SessionRow,
  Transformation,
} from "./types.js";

export const DEFAULT_OVERLAY_DEBOUNCE_MS = 150;
const LINK_BAND_HEIGHT = 36;
const OVERLAY_PLOT_HEIGHT = 72;

export interface SessionViewOptions {
  api: ApiClient;
  state?: ViewState;
  scale?: ColorScale;
  overlayDebounceMs?: number;
}

interface RowRefs {
  waveSvg: SVGSVGElement;
  overlaySvg: SVGSVGElement;
  strip: DotStrip;
  selectionRect: SVGRectElement | null;
}

export function describeTransformation(t: Transformation | null): string {
  if (t === null) return "input";
  const where =
    t.region === null ? "whole signal" : `[${t.region.start}, ${t.region.end})`;
  return `${t.kind} x${t.magnitude} on ${where}`;
}

export class SessionView {
  readonly root: HTMLElement;
  session: Session | null = null;
  linkSets: LinkSet[] = [];

  private readonly api: ApiClient;
  private readonly state: ViewState;
  private readonly scale: ColorScale;
  private readonly debounceMs: number;

  private readonly rowsEl: HTMLElement;
  private readonly sideEl: HTMLElement;
  private readonly bannerEl: HTMLElement;
  private readonly readoutEl: HTMLElement;

  private rowRefs = new Map<number, RowRefs>();
  private linkSvgs = new Map<number, SVGSVGElement>();
  private overlays = new Map<number, Overlay>();
  private editor: EditPanel | null = null;
  private baselineCache: Baseline | null = null;

  private overlayTimers = new Map<number, ReturnType<typeof setTimeout>>();
  private overlayAborts = new Map<number, AbortController>();
  private overlaySeq = new Map<number, number>();

  constructor(parent: Element, opts: SessionViewOptions) {
    this.api = opts.api;
    this.state = opts.state ?? new ViewState();
    this.scale = opts.scale ?? new ColorScale();
    this.debounceMs = opts.overlayDebounceMs ?? DEFAULT_OVERLAY_DEBOUNCE_MS;

    this.root = document.createElement("div");
    this.root.className = "session-view";

    this.bannerEl = document.createElement("div");
    this.bannerEl.className = "banner";
    this.bannerEl.setAttribute("role", "status");
    this.bannerEl.hidden = true;

    this.rowsEl = document.createElement("div");
    this.rowsEl.className = "rows";

    this.sideEl = document.createElement("div");
    this.sideEl.className = "side";

    this.readoutEl = document.createElement("div");
    this.readoutEl.className = "hover-readout";

    this.root.append(this.bannerEl, this.rowsEl, this.sideEl, this.readoutEl);
    parent.appendChild(this.root);

    this.state.onChange(() => this.updateReadout());
  }

  async load(session: Session): Promise<void> {
    this.session = session;
    await this.refreshLinks();
    this.render();
  }

  overlayFor(row: number): Overlay | undefined {
    return this.overlays.get(row);
  }

  brushFor(row: number): BrushRange {
    const sessionRow = this.session?.rows[row];
    const count = sessionRow ? sessionRow.neighbors.count : 1;
    return this.state.brush(row, count);
  }

  setCondition(condition: "knn" | "knn+editor" | "baseline"): void {
    this.state.setCondition(condition);
    this.render();
  }

  private waveGeom(row: SessionRow): WaveformGeom {
    return { ...DEFAULT_WAVEFORM_GEOM, n: row.beat.length };
  }

  private stripGeom(): DotStripGeom {
    const k = this.session ? this.session.k : 1;
    return { ...DEFAULT_DOTSTRIP_GEOM, k };
  }

  render(): void {
    const session = this.session;
    if (!session) return;

    clear(this.rowsEl);
    clear(this.sideEl);
    this.rowRefs.clear();
    this.linkSvgs.clear();
    this.editor = null;

    const showRows = this.state.condition !== "baseline";
    if (showRows) {
      session.rows.forEach((row, i) => {
        if (i > 0) this.renderLinkBand(i - 1);
        this.renderRow(row);
      });
      if (this.state.condition === "knn+editor") {
        this.editor = new EditPanel(this.sideEl, {
          onApply: (edit) => void this.submitEdit(edit),
        });
        this.editor.setRegion(this.state.inputRegion);
      }
      // every visible row gets its overlay refreshed for its current brush
      for (const row of session.rows) {
        this.scheduleOverlay(row.row_index, this.brushFor(row.row_index));
      }
    } else {
      this.renderBaseline();
    }
    this.updateReadout();
  }

  private renderRow(row: SessionRow): void {
    const rowEl = document.createElement("div");
    rowEl.className = "row";
    rowEl.setAttribute("data-row-index", String(row.row_index));

    const caption = document.createElement("div");
    caption.className = "row-caption";
    caption.textContent =
      `${describeTransformation(row.transformation)} | ` +
      `predicted ${row.prediction.predicted.name} | majority ${row.majority.name}`;
    rowEl.appendChild(caption);

    const panes = document.createElement("div");
    panes.className = "row-panes";

    const geom = this.waveGeom(row);
    const waveSvg = svgEl("svg", {
      width: geom.width,
      height: geom.height,
      class: "wave",
    });
    panes.appendChild(waveSvg);

    // the overlay plot sits directly above the brushable strip
    const middle = document.createElement("div");
    middle.className = "strip-column";
    const overlaySvg = svgEl("svg", {
      width: this.stripGeom().width,
      height: OVERLAY_PLOT_HEIGHT,
      class: "overlay-plot",
    });
    middle.appendChild(overlaySvg);

    const strip = new DotStrip(
      middle,
      row.neighbors.neighbors,
      this.scale,
      this.stripGeom(),
      this.brushFor(row.row_index),
      {
        onBrush: (range, settled) => this.handleBrush(row.row_index, range, settled),
        onHoverDot: (nb) =>
          this.state.setHover(nb === null ? null : { kind: "neighbor", neighbor: nb }),
      },
    );
    panes.appendChild(middle);

    const histSvg = svgEl("svg", {
      width: DEFAULT_HISTOGRAM_GEOM.width,
      height: DEFAULT_HISTOGRAM_GEOM.height,
      class: "hist",
    });
    renderHistogram(histSvg, row.histogram, this.scale, DEFAULT_HISTOGRAM_GEOM, (hover) =>
      this.state.setHover(hover === null ? null : { kind: "class", hover }),
    );
    panes.appendChild(histSvg);

    rowEl.appendChild(panes);
    this.rowsEl.appendChild(rowEl);

    const refs: RowRefs = { waveSvg, overlaySvg, strip, selectionRect: null };
    this.rowRefs.set(row.row_index, refs);
    this.paintRowWave(row.row_index);
    this.paintOverlay(row.row_index);

    if (row.row_index === 0) {
      this.wireRegionSelection(waveSvg, geom);
    }

    waveSvg.addEventListener("mousedown", () => this.setActiveRow(row.row_index));
    strip.svg.addEventListener("mousedown", () => this.setActiveRow(row.row_index));
  }

  /** Redraw one row's input plot: selection band plus the beat trace. */
  private paintRowWave(rowIndex: number): void {
    const session = this.session;
    const refs = this.rowRefs.get(rowIndex);
    if (!session || !refs) return;
    const row = session.rows[rowIndex];
    const geom = this.waveGeom(row);
    clear(refs.waveSvg);
    refs.selectionRect = null;

    const region = this.state.inputRegion;
    if (rowIndex === 0 && region !== null) {
      const x0 = sampleX(region.start, geom);
      const x1 = sampleX(region.end, geom);
      refs.selectionRect = svgEl("rect", {
        x: x0.toFixed(2),
        y: 0,
        width: Math.max(x1 - x0, 1).toFixed(2),
        height: geom.height,
        fill: "rgba(80,80,80,0.12)",
        class: "region-selection",
      });
      refs.waveSvg.appendChild(refs.selectionRect);
    }

    renderWaveform(refs.waveSvg, row.beat.samples, geom, {
      color: this.scale.color(row.prediction.predicted),
      role: "input",
    });
  }

  /** Redraw one row's overlay plot from its last fetched overlay. */
  private paintOverlay(rowIndex: number): void {
    const session = this.session;
    const refs = this.rowRefs.get(rowIndex);
    if (!session || !refs) return;
    const row = session.rows[rowIndex];
    clear(refs.overlaySvg);
    const overlay = this.overlays.get(rowIndex);
    if (!overlay) return;
    const geom: WaveformGeom = {
      width: this.stripGeom().width,
      height: OVERLAY_PLOT_HEIGHT,
      pad: 4,
      n: row.beat.length,
    };
    renderOverlay(refs.overlaySvg, overlay, geom, this.scale, this.scale.color(row.prediction.predicted));
  }

  private renderLinkBand(upper: number): void {
    const band = document.createElement("div");
    band.className = "linkband";
    band.setAttribute("data-upper", String(upper));
    const set = this.linkSets[upper];
    if (set) {
      const geom: LinkBandGeom = {
        width: this.stripGeom().width,
        height: LINK_BAND_HEIGHT,
        strip: this.stripGeom(),
      };
      const active = this.state.activeRow();
      const svg = renderLinks(
        band,
        set,
        geom,
        active,
        this.brushFor(active),
        (link) => this.linkColor(link.beat_id),
        (link) => this.state.setHover(link === null ? null : { kind: "link", link }),
      );
      this.linkSvgs.set(upper, svg);
    }
    this.rowsEl.appendChild(band);
  }

  private linkColor(beatId: string): string {
    const session = this.session;
    if (session) {
      for (const row of session.rows) {
        for (const nb of row.neighbors.neighbors) {
          if (nb.beat_id === beatId) return this.scale.color(nb.label);
        }
      }
    }
    return "#888";
  }

  private renderBaseline(): void {
    const session = this.session!;
    if (this.baselineCache) {
      renderBaselinePanel(this.sideEl, this.baselineCache, this.scale, {
        wave: { ...DEFAULT_WAVEFORM_GEOM, n: this.baselineCache.samples.length },
        weightStripHeight: 34,
      });
      return;
    }
    const placeholder = document.createElement("div");
    placeholder.className = "baseline-loading";
    placeholder.textContent = "loading baseline";
    this.sideEl.appendChild(placeholder);
    void this.api
      .baseline(session.input_beat_id)
      .then((baseline) => {
        this.baselineCache = baseline;
        if (this.state.condition === "baseline") this.render();
      })
      .catch((err) => this.showBanner(messageOf(err)));
  }

  private wireRegionSelection(waveSvg: SVGSVGElement, geom: WaveformGeom): void {
    let anchor: number | null = null;
    const sampleFromEvent = (ev: MouseEvent): number => {
      const rect = waveSvg.getBoundingClientRect();
      const x = ev.clientX - rect.left;
      const inner = geom.width - 2 * geom.pad;
      const frac = (x - geom.pad) / (inner || 1);
      const i = Math.round(frac * (geom.n - 1));
      return Math.min(Math.max(i, 0), geom.n);
    };
    waveSvg.addEventListener("mousedown", (ev) => {
      anchor = sampleFromEvent(ev as MouseEvent);
      const move = (e: Event) => {
        if (anchor === null) return;
        const here = sampleFromEvent(e as MouseEvent);
        const start = Math.min(anchor, here);
        const end = Math.max(anchor, here);
        this.setInputRegion(end > start ? { start, end } : null);
      };
      const up = () => {
        window.removeEventListener("mousemove", move);
        window.removeEventListener("mouseup", up);
        anchor = null;
      };
      window.addEventListener("mousemove", move);
      window.addEventListener("mouseup", up);
    });
  }

  setInputRegion(region: { start: number; end: number } | null): void {
    this.state.setInputRegion(region);
    this.editor?.setRegion(region);
    this.paintRowWave(0);
  }

  setActiveRow(row: number): void {
    this.state.setActiveRow(row);
    this.updateLinkOpacities();
  }

  handleBrush(rowIndex: number, range: BrushRange, settled: boolean): void {
    this.state.setBrush(rowIndex, range);
    if (this.state.activeRow() !== rowIndex) {
      this.state.setActiveRow(rowIndex);
    }
    this.updateLinkOpacities();
    if (settled) {
      // a settled brush fetches once, immediately, and cancels any pending timer
      const pending = this.overlayTimers.get(rowIndex);
      if (pending !== undefined) {
        clearTimeout(pending);
        this.overlayTimers.delete(rowIndex);
      }
      this.fetchOverlay(rowIndex, range);
    } else {
      this.scheduleOverlay(rowIndex, range);
    }
  }

  /** Re-apply the opaque/faint split without rebuilding the bands. */
  updateLinkOpacities(): void {
    const active = this.state.activeRow();
    const brush = this.brushFor(active);
    this.linkSvgs.forEach((svg, upper) => {
      const set = this.linkSets[upper];
      if (!set) return;
      const lines = svg.querySelectorAll("line");
      lines.forEach((line, i) => {
        const on = linkEmphasized(set.links[i], set, active, brush);
        line.setAttribute("opacity", String(on ? LINK_OPAQUE : LINK_FAINT));
      });
    });
  }

  scheduleOverlay(rowIndex: number, range: BrushRange): void {
    const existing = this.overlayTimers.get(rowIndex);
    if (existing !== undefined) clearTimeout(existing);
    const timer = setTimeout(() => {
      this.overlayTimers.delete(rowIndex);
      this.fetchOverlay(rowIndex, range);
    }, this.debounceMs);
    this.overlayTimers.set(rowIndex, timer);
  }

  private fetchOverlay(rowIndex: number, range: BrushRange): void {
    const session = this.session;
    if (!session) return;

    this.overlayAborts.get(rowIndex)?.abort();
    const controller = new AbortController();
    this.overlayAborts.set(rowIndex, controller);
    const seq = (this.overlaySeq.get(rowIndex) ?? 0) + 1;
    this.overlaySeq.set(rowIndex, seq);

    void this.api
      .overlay(
        session.session_id,
        { row: rowIndex, from: range.from, to: range.to },
        controller.signal,
      )
      .then((overlay) => {
        if (this.overlaySeq.get(rowIndex) !== seq) return; // superseded
        this.overlays.set(rowIndex, overlay);
        this.paintOverlay(rowIndex);
      })
      .catch((err) => {
        if (isAbort(err)) return;
        this.showBanner(messageOf(err));
      });
  }

  async submitEdit(edit: Transformation): Promise<void> {
    const session = this.session;
    if (!session) return;
    try {
      const updated = await this.api.applyEdit(session.session_id, edit);
      this.session = updated;
      this.editor?.clearBanner();
      this.hideBanner();
      await this.refreshLinks();
      this.render();
    } catch (err) {
      if (err instanceof ApiError) {
        // rejected edit: session view stays exactly as it was
        if (this.editor) {
          this.editor.showRejection(err.message);
        } else {
          this.showBanner(err.message);
        }
        return;
      }
      throw err;
    }
  }

  private async refreshLinks(): Promise<void> {
    const session = this.session;
    if (!session) return;
    const wanted = session.rows.length - 1;
    const sets: LinkSet[] = [];
    for (let upper = 0; upper < wanted; upper++) {
      const kept = this.linkSets[upper];
      if (kept && kept.upper === upper) {
        sets.push(kept);
        continue;
      }
      sets.push(await this.api.links(session.session_id, upper));
    }
    this.linkSets = sets;
  }

  private showBanner(message: string): void {
    this.bannerEl.textContent = message;
    this.bannerEl.hidden = false;
  }

  private hideBanner(): void {
    this.bannerEl.textContent = "";
    this.bannerEl.hidden = true;
  }

  bannerText(): string | null {
    return this.bannerEl.hidden ? null : this.bannerEl.textContent;
  }

  editorPanel(): EditPanel | null {
    return this.editor;
  }

  private updateReadout(): void {
    const hover = this.state.hover;
    if (hover === null) {
      this.readoutEl.textContent = "";
    } else if (hover.kind === "class") {
      this.readoutEl.textContent = `${hover.hover.name}: ${hover.hover.count}`;
    } else if (hover.kind === "neighbor") {
      const nb = hover.neighbor;
      this.readoutEl.textContent =
        `#${nb.rank} ${nb.beat_id} (${nb.label.name}, d = ${nb.distance.toFixed(3)})`;
    } else {
      const link = hover.link;
      this.readoutEl.textContent =
        `${link.beat_id}: rank ${link.rank_in_upper} to ${link.rank_in_lower}`;
    }
  }
}

function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}

function messageOf(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
