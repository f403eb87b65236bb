/**
 * Wire types for the beatlens JSON API.
 *
 * Field names mirror the HTTP payloads exactly, so everything here stays
 * snake_case. These are the only shapes the UI is allowed to consume; no
 * view module reaches around them to the service internals.
 */

export interface ClassLabel {
  code: number;
  name: string;
  color: string;
}

export interface Region {
  start: number;
  end: number;
}

export type TransformationKind = "amplify" | "dampen" | "stretch" | "compress";

export interface Transformation {
  kind: TransformationKind;
  magnitude: number;
  region: Region | null;
}

export interface Beat {
  id: string;
  samples: number[];
  length: number;
  sample_rate_hz: number;
  /** Ground-truth class; null for beats derived by a transformation. */
  label: ClassLabel | null;
}

export interface Prediction {
  probabilities: number[];
  predicted: ClassLabel;
}

export interface Neighbor {
  beat_id: string;
  rank: number;
  distance: number;
  label: ClassLabel;
}

export interface HistogramBin {
  label: ClassLabel;
  count: number;
}

export interface NeighborSet {
  k: number;
  count: number;
  neighbors: Neighbor[];
}

export interface SessionRow {
  row_index: number;
  transformation: Transformation | null;
  beat: Beat;
  prediction: Prediction;
  majority: ClassLabel;
  histogram: HistogramBin[];
  neighbors: NeighborSet;
}

export interface Session {
  session_id: string;
  input_beat_id: string;
  k: number;
  created_at: number;
  updated_at: number;
  rows: SessionRow[];
}

export interface Link {
  beat_id: string;
  rank_in_upper: number;
  rank_in_lower: number;
}

export interface LinkSet {
  upper: number;
  lower: number;
  links: Link[];
}

export interface OverlaySignal {
  beat_id: string;
  rank: number;
  distance: number;
  label: ClassLabel;
  samples: number[];
}

export interface Overlay {
  row: number;
  from: number;
  to: number;
  query: { beat_id: string; samples: number[] };
  signals: OverlaySignal[];
}

export interface BeatSummary {
  id: string;
  label: ClassLabel;
  length: number;
  prediction: { argmax: ClassLabel; majority: ClassLabel };
}

export interface BeatPage {
  total: number;
  page: number;
  page_size: number;
  beats: BeatSummary[];
}

export interface Baseline {
  beat_id: string;
  samples: number[];
  predicted: ClassLabel;
  probability: number;
  num_segments: number;
  segment_bounds: Array<[number, number]>;
  per_segment_weights: number[];
  salient_regions: Region[];
}

export interface ErrorPayload {
  code: string;
  message: string;
}
