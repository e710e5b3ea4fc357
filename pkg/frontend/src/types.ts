/**
 * Wire types mirroring the evaluation service's JSON payloads.
 *
 * Exact values travel as rational strings (e.g. "14/5"); the service also
 * sends float conveniences (`value_num`) which the UI displays verbatim —
 * the client never recomputes domain values.
 */

export type Viewpoint = "Implementer" | "Coordinator" | "Sponsor";

export type Level = "Process" | "Project" | "Product" | "Organization" | "External";

export const VIEWPOINTS: readonly Viewpoint[] = ["Implementer", "Coordinator", "Sponsor"];

export const LEVELS: readonly Level[] = [
  "Process",
  "Project",
  "Product",
  "Organization",
  "External",
];

export type IndicatorKind = "primary" | "complementary";

export interface CellIndicatorPayload {
  id: string;
  kind: IndicatorKind;
}

export interface ScopeCellPayload {
  level: Level;
  viewpoint: Viewpoint;
  roles: string[];
  indicators: CellIndicatorPayload[];
}

export interface ScopeDoc {
  levels: Level[];
  cells: ScopeCellPayload[];
}

export interface CoverageReport {
  scope_warnings: string[];
  complementary_violations: string[];
  holistic: boolean;
  clean: boolean;
}

export type Staleness = "fresh" | "stale" | "absent";

export interface KiviatAxisPayload {
  axis: string;
  value: string | null;
  value_num: number | null;
  staleness: Staleness;
  coverage: string | null;
  note: string;
}

export interface KiviatSeriesPayload {
  kind: "viewpoints" | "levels";
  context: string;
  as_of: string;
  axes: KiviatAxisPayload[];
}

export interface SviInputRow {
  metric_id: string;
  weight: string;
  rating: number | null;
  valid: boolean;
  reason: string;
}

export interface SviPayload {
  viewpoint: Viewpoint | null;
  level: Level;
  entity_id: string;
  value: string;
  value_num: number;
  validity_coverage: string;
  coverage_num: number;
  stale: boolean;
  computed_at: string;
  inputs: SviInputRow[];
}

export interface WhatIfResponse {
  revision: number;
  svi: SviPayload;
  transient: boolean;
}

export interface DivergencePairPayload {
  viewpoint_a: Viewpoint;
  viewpoint_b: Viewpoint;
  delta: string;
  delta_num: number;
  sign_divergence: boolean;
  delta_flag: boolean;
  flagged: boolean;
}

export interface DivergenceReportPayload {
  level: Level;
  threshold: string;
  clean: boolean;
  pairs: DivergencePairPayload[];
}

export interface WeightPayload {
  viewpoint: Viewpoint;
  level: Level;
  metric_id: string;
  weight: string;
}

export interface RatingPayload {
  metric_id: string;
  entity_id: string;
  rating: number;
  source_instance: string;
  rated_at: string;
}

export interface InstancePayload {
  id: string;
  scheduled_date: string;
  level: Level;
  entity_ids: string[];
  strategy: string;
  experts: string[];
  purpose: "establish-baseline" | "compare";
  status: "planned" | "done";
  executed_at: string | null;
  results: {
    metric_id: string;
    observed: string;
    classification: string | null;
    baseline_id: string | null;
  }[];
}

export interface WriteResult<T = unknown> {
  revision: number;
  result: T;
}
