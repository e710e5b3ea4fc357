/**
 * Rating and weight entry for one (viewpoint, level, entity) scope.
 *
 * Impact ratings use the 11-point selector (-5..+5, integers only); invalid
 * entries are blocked client-side and the service re-validates on submit.
 * Weights show a live normalized-sum display; an all-zero weight set disables
 * submission. The score preview always comes from the service's transient
 * what-if endpoint — the form does no scoring math of its own.
 */

import { ApiClient } from "./api.js";
import type { EditOutcome, UiSession } from "./session.js";
import type { Level, SviPayload, Viewpoint, WeightPayload } from "./types.js";

export const RATING_MIN = -5;
export const RATING_MAX = 5;

/** The 11 selectable points, in display order. */
export const RATING_SCALE: readonly number[] = Array.from(
  { length: RATING_MAX - RATING_MIN + 1 },
  (_unused, index) => RATING_MIN + index,
);

export type RatingCheck =
  | { ok: true; value: number }
  | { ok: false; error: string };

export function checkRating(raw: unknown): RatingCheck {
  const value = typeof raw === "string" && raw.trim() !== "" ? Number(raw) : raw;
  if (typeof value !== "number" || !Number.isFinite(value)) {
    return { ok: false, error: "rating must be a number" };
  }
  if (!Number.isInteger(value)) {
    return { ok: false, error: "rating must be an integer" };
  }
  if (value < RATING_MIN || value > RATING_MAX) {
    return { ok: false, error: `rating must lie between ${RATING_MIN} and ${RATING_MAX}` };
  }
  return { ok: true, value };
}

export interface WeightEntry {
  metricId: string;
  raw: string;
}

export interface WeightSummary {
  /** Raw sum for the live display (client-side arithmetic is presentation
   * only; scores always come from the service). */
  total: number;
  shares: { metricId: string; share: number | null }[];
  allZero: boolean;
  invalid: string[];
  submitEnabled: boolean;
}

function parseWeight(raw: string): number | null {
  const trimmed = raw.trim();
  if (trimmed === "") return null;
  if (trimmed.includes("/")) {
    const [top, bottom] = trimmed.split("/", 2);
    const numerator = Number(top);
    const denominator = Number(bottom);
    if (!Number.isFinite(numerator) || !Number.isFinite(denominator) || denominator === 0) {
      return null;
    }
    return numerator / denominator;
  }
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : null;
}

export function summarizeWeights(entries: WeightEntry[]): WeightSummary {
  const invalid: string[] = [];
  let total = 0;
  const parsed: { metricId: string; value: number | null }[] = [];
  for (const entry of entries) {
    const value = parseWeight(entry.raw);
    if (value === null || value < 0) {
      invalid.push(entry.metricId);
      parsed.push({ metricId: entry.metricId, value: null });
      continue;
    }
    parsed.push({ metricId: entry.metricId, value });
    total += value;
  }
  const allZero = invalid.length === 0 && total === 0;
  return {
    total,
    shares: parsed.map(({ metricId, value }) => ({
      metricId,
      share: value === null || total === 0 ? null : value / total,
    })),
    allZero,
    invalid,
    submitEnabled: invalid.length === 0 && !allZero && entries.length > 0,
  };
}

export interface RatingDraft {
  metricId: string;
  raw: string;
  check: RatingCheck;
  sourceInstance: string;
}

export class RatingFormModel {
  guidelines = "";
  readonly ratings = new Map<string, RatingDraft>();
  readonly weights = new Map<string, string>();
  lastPreview: SviPayload | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly session: UiSession,
    readonly viewpoint: Viewpoint,
    readonly level: Level,
    readonly entityId: string,
  ) {}

  /** Guideline text is a project artifact shown beside the rating control. */
  async loadGuidelines(): Promise<string> {
    this.guidelines = await this.api.getRatingGuidelines();
    return this.guidelines;
  }

  setRating(metricId: string, raw: string, sourceInstance: string): RatingCheck {
    const check = checkRating(raw);
    this.ratings.set(metricId, { metricId, raw, check, sourceInstance });
    return check;
  }

  setWeight(metricId: string, raw: string): void {
    this.weights.set(metricId, raw);
  }

  weightSummary(): WeightSummary {
    return summarizeWeights(
      [...this.weights.entries()].map(([metricId, raw]) => ({ metricId, raw })),
    );
  }

  ratingsValid(): boolean {
    return (
      this.ratings.size > 0 && [...this.ratings.values()].every((draft) => draft.check.ok)
    );
  }

  canSubmit(): boolean {
    return this.ratingsValid() && this.weightSummary().submitEnabled;
  }

  /** Ask the service what the score would be under the drafted weights. */
  async previewSvi(): Promise<SviPayload> {
    const weights: Record<string, string> = {};
    for (const [metricId, raw] of this.weights) weights[metricId] = raw.trim();
    const response = await this.api.whatIfSvi({
      viewpoint: this.viewpoint,
      level: this.level,
      entityId: this.entityId,
      asOf: this.session.asOf,
      weights,
    });
    this.lastPreview = response.svi;
    return response.svi;
  }

  /** Persist ratings then weights, each write carrying the session revision. */
  async submit(ratedAt: string): Promise<EditOutcome> {
    if (!this.canSubmit()) {
      throw new Error("form is not submittable (invalid ratings or degenerate weights)");
    }
    for (const draft of this.ratings.values()) {
      if (!draft.check.ok) continue;
      const value = draft.check.value;
      const outcome = await this.session.submit(
        `rate ${draft.metricId} for ${this.entityId}`,
        (expectedRevision) =>
          this.api.postRating(
            {
              metric_id: draft.metricId,
              entity_id: this.entityId,
              rating: value,
              source_instance: draft.sourceInstance,
              rated_at: ratedAt,
            },
            { expectedRevision },
          ),
      );
      if (outcome.kind === "conflict") return outcome;
    }
    const weights: WeightPayload[] = [...this.weights.entries()].map(
      ([metricId, raw]) => ({
        viewpoint: this.viewpoint,
        level: this.level,
        metric_id: metricId,
        weight: raw.trim(),
      }),
    );
    return this.session.submit(`weights for ${this.viewpoint}/${this.level}`, (expectedRevision) =>
      this.api.putWeights(weights, { expectedRevision }),
    );
  }
}
