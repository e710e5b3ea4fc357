/**
 * Recording proxy standing in for the evaluation service.
 *
 * Implements the documented API semantics the UI relies on — revisioned
 * writes with 409 on stale revisions, transient what-if scoring computed
 * service-side, canned chart/report fixtures — and records every request so
 * contract tests can assert that all domain values shown by the UI came from
 * the service.
 */

import type { FetchLike } from "../../src/api.js";
import type {
  CoverageReport,
  DivergenceReportPayload,
  InstancePayload,
  KiviatSeriesPayload,
  RatingPayload,
  ScopeDoc,
  SviPayload,
  WeightPayload,
} from "../../src/types.js";

export interface RecordedRequest {
  method: string;
  path: string;
  body: any;
}

function rational(raw: string): number {
  const text = raw.trim();
  if (text.includes("/")) {
    const [a, b] = text.split("/", 2);
    return Number(a) / Number(b);
  }
  return Number(text);
}

export class MockService {
  revision = 0;
  scope: ScopeDoc | null = null;
  weights: WeightPayload[] = [];
  ratings: RatingPayload[] = [];
  guidelines = "rate the change relative to the baseline band";
  coverage: CoverageReport = {
    scope_warnings: [],
    complementary_violations: [],
    holistic: true,
    clean: true,
  };
  kiviatFixtures = new Map<string, KiviatSeriesPayload>();
  divergenceFixture: DivergenceReportPayload | null = null;
  schedule: InstancePayload[] = [];
  /** Entity ratings used by the service-side what-if computation. */
  whatIfRatings = new Map<string, Map<string, number>>();
  rejectScopeWith: string | null = null;

  readonly requests: RecordedRequest[] = [];

  readonly fetch: FetchLike = async (url, init) => {
    const parsed = new URL(url);
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.requests.push({ method, path: parsed.pathname + parsed.search, body });
    return this.route(method, parsed, body);
  };

  requestsFor(pathPrefix: string): RecordedRequest[] {
    return this.requests.filter((r) => r.path.startsWith(pathPrefix));
  }

  private json(payload: unknown, status = 200): Response {
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "content-type": "application/json" },
    });
  }

  private writeGuard(body: any): Response | null {
    const expected = body?.expected_revision;
    if (expected !== undefined && expected !== null && expected !== this.revision) {
      return this.json(
        {
          error: `revision conflict: write expected revision ${expected}, store is at ${this.revision}`,
          current_revision: this.revision,
        },
        409,
      );
    }
    return null;
  }

  private computeWhatIf(body: any): SviPayload {
    // The service owns the scoring math; the client only displays it.
    const weights: Record<string, string> = body.weights ?? {};
    const byMetric = this.whatIfRatings.get(body.entity_id) ?? new Map<string, number>();
    let total = 0;
    for (const raw of Object.values(weights)) total += rational(raw);
    let value = 0;
    let coverage = 0;
    const inputs = Object.entries(weights).map(([metricId, raw]) => {
      const share = total === 0 ? 0 : rational(raw) / total;
      const rating = byMetric.get(metricId);
      const valid = rating !== undefined;
      if (valid) {
        value += share * (rating as number);
        coverage += share;
      }
      return {
        metric_id: metricId,
        weight: String(share),
        rating: valid ? (rating as number) : null,
        valid,
        reason: valid ? "" : "no rating",
      };
    });
    return {
      viewpoint: body.viewpoint,
      level: body.level,
      entity_id: body.entity_id,
      value: String(value),
      value_num: value,
      validity_coverage: String(coverage),
      coverage_num: coverage,
      stale: coverage < 1,
      computed_at: body.as_of ?? "2024-11-01",
      inputs,
    };
  }

  private route(method: string, url: URL, body: any): Response {
    const path = url.pathname;
    if (method === "GET" && path === "/revision") {
      return this.json({ revision: this.revision });
    }
    if (method === "GET" && path === "/scope") {
      return this.json({ scope: this.scope });
    }
    if (method === "PUT" && path === "/scope") {
      const conflict = this.writeGuard(body);
      if (conflict) return conflict;
      if (this.rejectScopeWith) {
        return this.json({ error: this.rejectScopeWith }, 422);
      }
      // the real service only reads "assignments" on writes
      this.scope = { levels: body.levels, cells: body.assignments ?? [] };
      this.revision += 1;
      return this.json({ revision: this.revision, result: { coverage_warnings: [] } });
    }
    if (method === "GET" && path === "/scope/coverage") {
      return this.json(this.coverage);
    }
    if (method === "GET" && path === "/rating-guidelines") {
      return this.json({ text: this.guidelines });
    }
    if (method === "GET" && path === "/weights") {
      return this.json({ weights: this.weights });
    }
    if (method === "PUT" && path === "/weights") {
      const conflict = this.writeGuard(body);
      if (conflict) return conflict;
      const keyed = new Map(
        this.weights.map((w) => [`${w.viewpoint}/${w.level}/${w.metric_id}`, w]),
      );
      for (const weight of body.weights as WeightPayload[]) {
        keyed.set(`${weight.viewpoint}/${weight.level}/${weight.metric_id}`, weight);
      }
      this.weights = [...keyed.values()];
      this.revision += 1;
      return this.json({ revision: this.revision, result: { count: body.weights.length } });
    }
    if (method === "POST" && path === "/ratings") {
      const conflict = this.writeGuard(body);
      if (conflict) return conflict;
      const rating: RatingPayload = {
        metric_id: body.metric_id,
        entity_id: body.entity_id,
        rating: body.rating,
        source_instance: body.source_instance,
        rated_at: body.rated_at,
      };
      this.ratings = this.ratings.filter(
        (r) =>
          !(
            r.metric_id === rating.metric_id &&
            r.entity_id === rating.entity_id &&
            r.source_instance === rating.source_instance
          ),
      );
      this.ratings.push(rating);
      const byEntity = this.whatIfRatings.get(rating.entity_id) ?? new Map<string, number>();
      byEntity.set(rating.metric_id, rating.rating);
      this.whatIfRatings.set(rating.entity_id, byEntity);
      this.revision += 1;
      return this.json({ revision: this.revision, result: rating });
    }
    if (method === "POST" && path === "/svi/what-if") {
      // transient: no revision bump, nothing stored
      return this.json({
        revision: this.revision,
        svi: this.computeWhatIf(body),
        transient: true,
      });
    }
    if (method === "GET" && path === "/kiviat") {
      const kind = url.searchParams.get("kind") ?? "viewpoints";
      const key =
        kind === "viewpoints"
          ? `viewpoints/${url.searchParams.get("level")}/${url.searchParams.get("entity_id")}`
          : "levels";
      const fixture = this.kiviatFixtures.get(key);
      if (!fixture) return this.json({ error: `no fixture for ${key}` }, 404);
      return this.json(fixture);
    }
    if (method === "GET" && path === "/reports/divergence") {
      if (!this.divergenceFixture) return this.json({ error: "no fixture" }, 404);
      return this.json(this.divergenceFixture);
    }
    if (method === "GET" && path === "/schedule") {
      return this.json({ instances: this.schedule });
    }
    return this.json({ error: `no route for ${method} ${path}` }, 404);
  }
}

/** Radar fixture mirroring the worked holistic-view outcome on the Process
 * level: the Implementer perceives the change as more valuable than the
 * Coordinator, and the Sponsor axis has no computable score. */
export function processRadarFixture(): KiviatSeriesPayload {
  return {
    kind: "viewpoints",
    context: "Process/pilot1",
    as_of: "2024-11-01",
    axes: [
      {
        axis: "Implementer",
        value: "14/5",
        value_num: 2.8,
        staleness: "fresh",
        coverage: "1",
        note: "",
      },
      {
        axis: "Coordinator",
        value: "2",
        value_num: 2.0,
        staleness: "fresh",
        coverage: "1",
        note: "",
      },
      {
        axis: "Sponsor",
        value: null,
        value_num: null,
        staleness: "absent",
        coverage: null,
        note: "no subjective weights defined for (Sponsor, Process)",
      },
    ],
  };
}
