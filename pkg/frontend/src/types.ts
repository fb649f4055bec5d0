// Wire types for the retrieval service API.

export interface ClassInfo {
  name: string;
  count: number;
}

export interface ImageRef {
  id: number;
  label: string;
}

export interface SegmentDistances {
  histogram: number;
  moments: number;
  hu: number;
}

export interface QueryEntry {
  id: number;
  label: string;
  path: string;
  distance: number;
  segments: SegmentDistances;
}

export interface RankedDocument {
  k: number;
  entries: QueryEntry[];
}

export interface EvalRow {
  class: string;
  precision: number;
  recall: number;
}

export interface FeatureReport {
  rows: EvalRow[];
  mean_precision: number;
  mean_recall: number;
}

export interface EvalSummary {
  k: number;
  mode: string;
  classes: string[];
  features: Record<string, FeatureReport>;
}

export type QuerySource = { kind: "id"; id: number } | { kind: "upload"; name: string };
