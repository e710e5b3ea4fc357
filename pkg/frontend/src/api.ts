/**
 * Thin client over the evaluation service's HTTP API.
 *
 * Every write carries the caller's expected revision; a 409 surfaces as a
 * ConflictError holding the service's current revision so the session layer
 * can prompt for reload-and-merge instead of overwriting.
 */

import type {
  CoverageReport,
  DivergenceReportPayload,
  InstancePayload,
  KiviatSeriesPayload,
  Level,
  RatingPayload,
  ScopeDoc,
  SviPayload,
  Viewpoint,
  WeightPayload,
  WhatIfResponse,
  WriteResult,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ConflictError extends Error {
  constructor(
    message: string,
    readonly currentRevision: number,
  ) {
    super(message);
    this.name = "ConflictError";
  }
}

interface WriteOptions {
  expectedRevision: number;
  actor?: string;
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const payload = text ? JSON.parse(text) : null;
    if (response.status === 409) {
      throw new ConflictError(
        payload?.error ?? "revision conflict",
        payload?.current_revision ?? -1,
      );
    }
    if (!response.ok) {
      throw new ApiError(payload?.error ?? `${method} ${path} failed`, response.status);
    }
    return payload as T;
  }

  private write<T>(method: string, path: string, payload: object, options: WriteOptions) {
    return this.request<WriteResult<T>>(method, path, {
      ...payload,
      expected_revision: options.expectedRevision,
      actor: options.actor ?? "ui",
    });
  }

  getRevision(): Promise<number> {
    return this.request<{ revision: number }>("GET", "/revision").then((r) => r.revision);
  }

  getScope(): Promise<ScopeDoc | null> {
    return this.request<{ scope: ScopeDoc | null }>("GET", "/scope").then((r) => r.scope);
  }

  putScope(scope: ScopeDoc, options: WriteOptions) {
    // the write payload names the rows "assignments"; reads return "cells"
    return this.write<{ coverage_warnings: string[] }>(
      "PUT",
      "/scope",
      { levels: scope.levels, assignments: scope.cells },
      options,
    );
  }

  getScopeCoverage(): Promise<CoverageReport> {
    return this.request<CoverageReport>("GET", "/scope/coverage");
  }

  getRatingGuidelines(): Promise<string> {
    return this.request<{ text: string }>("GET", "/rating-guidelines").then((r) => r.text);
  }

  getWeights(): Promise<WeightPayload[]> {
    return this.request<{ weights: WeightPayload[] }>("GET", "/weights").then(
      (r) => r.weights,
    );
  }

  putWeights(weights: WeightPayload[], options: WriteOptions) {
    return this.write<{ count: number }>("PUT", "/weights", { weights }, options);
  }

  postRating(rating: RatingPayload, options: WriteOptions) {
    return this.write<RatingPayload>("POST", "/ratings", rating, options);
  }

  getSvi(viewpoint: Viewpoint, level: Level, entityId: string, asOf: string): Promise<SviPayload> {
    const query = new URLSearchParams({
      viewpoint,
      level,
      entity_id: entityId,
      as_of: asOf,
    });
    return this.request<SviPayload>("GET", `/svi?${query}`);
  }

  whatIfSvi(request: {
    viewpoint: Viewpoint;
    level: Level;
    entityId: string;
    asOf: string;
    weights: Record<string, string>;
  }): Promise<WhatIfResponse> {
    return this.request<WhatIfResponse>("POST", "/svi/what-if", {
      viewpoint: request.viewpoint,
      level: request.level,
      entity_id: request.entityId,
      as_of: request.asOf,
      weights: request.weights,
    });
  }

  getKiviatViewpoints(level: Level, entityId: string, asOf: string): Promise<KiviatSeriesPayload> {
    const query = new URLSearchParams({
      kind: "viewpoints",
      level,
      entity_id: entityId,
      as_of: asOf,
    });
    return this.request<KiviatSeriesPayload>("GET", `/kiviat?${query}`);
  }

  getKiviatLevels(asOf: string, levels?: Level[], viewpoint?: Viewpoint): Promise<KiviatSeriesPayload> {
    const query = new URLSearchParams({ kind: "levels", as_of: asOf });
    if (levels && levels.length) query.set("levels", levels.join(","));
    if (viewpoint) query.set("viewpoint", viewpoint);
    return this.request<KiviatSeriesPayload>("GET", `/kiviat?${query}`);
  }

  getDivergence(level: Level, entityId: string, asOf: string, threshold?: string) {
    const query = new URLSearchParams({ level, entity_id: entityId, as_of: asOf });
    if (threshold) query.set("threshold", threshold);
    return this.request<DivergenceReportPayload>("GET", `/reports/divergence?${query}`);
  }

  getSchedule(): Promise<InstancePayload[]> {
    return this.request<{ instances: InstancePayload[] }>("GET", "/schedule").then(
      (r) => r.instances,
    );
  }
}
