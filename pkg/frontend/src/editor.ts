/**
 * Edit panel: pick a transformation kind, set its magnitude on a bounded
 * slider, and apply it to the latest row of the session.
 *
 * The core transformations accept any magnitude on the legal side of 1; the
 * sliders deliberately stay inside a useful range. Amplify and stretch run
 * over (1.0, 2.0] and dampen and compress over [0.5, 1.0), with the open
 * endpoints stepped in so the slider can never emit an illegal value.
 *
 * A rejected edit must leave the session view untouched, so rejection here
 * is just a banner: the message from the service, shown until the next
 * attempt or an explicit dismiss.
 */

import type { Region, Transformation, TransformationKind } from "./types.js";

export const MAGNITUDE_STEP = 0.01;

export const KINDS: TransformationKind[] = ["amplify", "dampen", "stretch", "compress"];

export interface SliderBounds {
  min: number;
  max: number;
  initial: number;
}

export function sliderBounds(kind: TransformationKind): SliderBounds {
  if (kind === "amplify" || kind === "stretch") {
    // (1.0, 2.0]: 1.0 itself is the identity and illegal for these kinds
    return { min: 1 + MAGNITUDE_STEP, max: 2, initial: 1.25 };
  }
  // [0.5, 1.0): 1.0 is excluded on this side instead
  return { min: 0.5, max: 1 - MAGNITUDE_STEP, initial: 0.8 };
}

export interface EditorOptions {
  onApply: (edit: Transformation) => void;
}

export class EditPanel {
  readonly root: HTMLElement;
  private readonly kindSelect: HTMLSelectElement;
  private readonly slider: HTMLInputElement;
  private readonly magnitudeLabel: HTMLElement;
  private readonly regionLabel: HTMLElement;
  private readonly banner: HTMLElement;
  private region: Region | null = null;

  constructor(parent: Element, opts: EditorOptions) {
    this.root = document.createElement("div");
    this.root.className = "editor";

    this.kindSelect = document.createElement("select");
    this.kindSelect.className = "editor-kind";
    for (const kind of KINDS) {
      const option = document.createElement("option");
      option.value = kind;
      option.textContent = kind;
      this.kindSelect.appendChild(option);
    }

    this.slider = document.createElement("input");
    this.slider.type = "range";
    this.slider.className = "editor-magnitude";
    this.slider.step = String(MAGNITUDE_STEP);

    this.magnitudeLabel = document.createElement("span");
    this.magnitudeLabel.className = "editor-magnitude-label";

    this.regionLabel = document.createElement("span");
    this.regionLabel.className = "editor-region-label";

    const applyButton = document.createElement("button");
    applyButton.className = "editor-apply";
    applyButton.textContent = "Apply";

    this.banner = document.createElement("div");
    this.banner.className = "editor-banner";
    this.banner.setAttribute("role", "status");
    this.banner.hidden = true;

    this.kindSelect.addEventListener("change", () => this.applyKindBounds());
    this.slider.addEventListener("input", () => this.updateMagnitudeLabel());
    applyButton.addEventListener("click", () => opts.onApply(this.value()));

    this.root.append(
      this.kindSelect,
      this.slider,
      this.magnitudeLabel,
      this.regionLabel,
      applyButton,
      this.banner,
    );
    parent.appendChild(this.root);

    this.applyKindBounds();
    this.setRegion(null);
  }

  kind(): TransformationKind {
    return this.kindSelect.value as TransformationKind;
  }

  setKind(kind: TransformationKind): void {
    this.kindSelect.value = kind;
    this.applyKindBounds();
  }

  magnitude(): number {
    return Number(this.slider.value);
  }

  setMagnitude(value: number): void {
    const bounds = sliderBounds(this.kind());
    const clamped = Math.min(Math.max(value, bounds.min), bounds.max);
    this.slider.value = clamped.toFixed(2);
    this.updateMagnitudeLabel();
  }

  setRegion(region: Region | null): void {
    this.region = region === null ? null : { ...region };
    this.regionLabel.textContent =
      region === null ? "whole signal" : `samples [${region.start}, ${region.end})`;
  }

  value(): Transformation {
    return {
      kind: this.kind(),
      magnitude: this.magnitude(),
      region: this.region === null ? null : { ...this.region },
    };
  }

  showRejection(message: string): void {
    this.banner.textContent = message;
    this.banner.hidden = false;
  }

  clearBanner(): void {
    this.banner.textContent = "";
    this.banner.hidden = true;
  }

  bannerText(): string | null {
    return this.banner.hidden ? null : this.banner.textContent;
  }

  private applyKindBounds(): void {
    const bounds = sliderBounds(this.kind());
    this.slider.min = String(bounds.min);
    this.slider.max = String(bounds.max);
    this.slider.value = String(bounds.initial);
    this.updateMagnitudeLabel();
  }

  private updateMagnitudeLabel(): void {
    this.magnitudeLabel.textContent = Number(this.slider.value).toFixed(2);
  }
}
