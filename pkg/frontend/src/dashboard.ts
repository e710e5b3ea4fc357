/**
 * Holistic dashboard: per-level viewpoint radar, cross-level aggregated
 * radar, divergence flags with links to the underlying evaluations, and the
 * what-if weight panel backed by the service's transient scoring endpoint.
 */

import { ApiClient } from "./api.js";
import { buildRadarView, type RadarView } from "./radar.js";
import type { UiSession } from "./session.js";
import type {
  DivergencePairPayload,
  InstancePayload,
  Level,
  SviPayload,
  Viewpoint,
} from "./types.js";

export interface DivergenceFlagView {
  pair: DivergencePairPayload;
  description: string;
  /** Links to the evaluation instances whose ratings fed the two scores. */
  evaluationLinks: { id: string; href: string }[];
}

export interface WhatIfState {
  viewpoint: Viewpoint;
  level: Level;
  entityId: string;
  weights: Record<string, string>;
  preview: SviPayload | null;
  applied: boolean;
}

export class DashboardModel {
  viewpointRadar: RadarView | null = null;
  aggregatedRadar: RadarView | null = null;
  divergenceFlags: DivergenceFlagView[] = [];
  whatIf: WhatIfState | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly session: UiSession,
  ) {}

  async loadViewpointRadar(level: Level, entityId: string): Promise<RadarView> {
    const series = await this.api.getKiviatViewpoints(level, entityId, this.session.asOf);
    this.viewpointRadar = buildRadarView(series);
    return this.viewpointRadar;
  }

  async loadAggregatedRadar(levels?: Level[], viewpoint?: Viewpoint): Promise<RadarView> {
    const series = await this.api.getKiviatLevels(this.session.asOf, levels, viewpoint);
    this.aggregatedRadar = buildRadarView(series);
    return this.aggregatedRadar;
  }

  async loadDivergence(
    level: Level,
    entityId: string,
    threshold?: string,
  ): Promise<DivergenceFlagView[]> {
    const report = await this.api.getDivergence(level, entityId, this.session.asOf, threshold);
    let instances: InstancePayload[] = [];
    if (report.pairs.some((pair) => pair.flagged)) {
      instances = await this.api.getSchedule();
    }
    const doneAtLevel = instances.filter(
      (instance) => instance.level === level && instance.status === "done",
    );
    this.divergenceFlags = report.pairs
      .filter((pair) => pair.flagged)
      .map((pair) => ({
        pair,
        description:
          `${pair.viewpoint_a} and ${pair.viewpoint_b} diverge by ${pair.delta} ` +
          (pair.sign_divergence ? "(opposite signs)" : "(beyond threshold)"),
        evaluationLinks: doneAtLevel.map((instance) => ({
          id: instance.id,
          href: `#/evaluations/${instance.id}`,
        })),
      }));
    return this.divergenceFlags;
  }

  startWhatIf(viewpoint: Viewpoint, level: Level, entityId: string): WhatIfState {
    this.whatIf = { viewpoint, level, entityId, weights: {}, preview: null, applied: false };
    return this.whatIf;
  }

  /** Slider move: re-query the transient endpoint; nothing persists. */
  async moveWhatIfWeight(metricId: string, raw: string): Promise<SviPayload> {
    if (!this.whatIf) throw new Error("no what-if panel open");
    this.whatIf.weights[metricId] = raw;
    const response = await this.api.whatIfSvi({
      viewpoint: this.whatIf.viewpoint,
      level: this.whatIf.level,
      entityId: this.whatIf.entityId,
      asOf: this.session.asOf,
      weights: this.whatIf.weights,
    });
    this.whatIf.preview = response.svi;
    return response.svi;
  }

  /** Apply persists the tried weights through the revisioned write path. */
  async applyWhatIf() {
    if (!this.whatIf) throw new Error("no what-if panel open");
    const state = this.whatIf;
    const weights = Object.entries(state.weights).map(([metricId, weight]) => ({
      viewpoint: state.viewpoint,
      level: state.level,
      metric_id: metricId,
      weight,
    }));
    const outcome = await this.session.submit(
      `apply what-if weights for ${state.viewpoint}/${state.level}`,
      (expectedRevision) => this.api.putWeights(weights, { expectedRevision }),
    );
    if (outcome.kind === "applied") state.applied = true;
    return outcome;
  }
}
