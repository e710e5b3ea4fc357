/**
 * Kiviat (radar) chart geometry and SVG rendering.
 *
 * Axes keep the service's order (the fixed enumeration order, so charts are
 * comparable across sessions). Absent axes are rendered as labelled spokes
 * with no data point — never as zero — and stale axes draw distinctly.
 */

import type { KiviatSeriesPayload, Staleness } from "./types.js";

export const VALUE_MIN = -5;
export const VALUE_MAX = 5;

export interface RadarAxisView {
  axis: string;
  state: "present" | "absent";
  value: number | null;
  staleness: Staleness;
  /** What the UI shows for this axis: a number, or the word "absent". */
  displayValue: string;
  /** Validity coverage as served (rational string); shown as a badge when < 1. */
  coverage: string | null;
  note: string;
  angle: number;
  point: { x: number; y: number } | null;
}

export interface RadarView {
  kind: string;
  context: string;
  asOf: string;
  size: number;
  center: { x: number; y: number };
  radius: number;
  axes: RadarAxisView[];
  /** Polygon over present axes only (absent axes contribute no vertex). */
  polygon: { x: number; y: number }[];
  stale: boolean;
}

function polar(center: { x: number; y: number }, radius: number, angle: number) {
  return {
    x: center.x + radius * Math.sin(angle),
    y: center.y - radius * Math.cos(angle),
  };
}

/** Map a score in [-5, +5] onto [0, radius] (the rim is +5, the center -5). */
function valueRadius(value: number, radius: number): number {
  const clamped = Math.min(Math.max(value, VALUE_MIN), VALUE_MAX);
  return ((clamped - VALUE_MIN) / (VALUE_MAX - VALUE_MIN)) * radius;
}

export function buildRadarView(series: KiviatSeriesPayload, size = 320): RadarView {
  const center = { x: size / 2, y: size / 2 };
  const radius = size * 0.38;
  const count = Math.max(series.axes.length, 1);
  const axes: RadarAxisView[] = series.axes.map((axis, index) => {
    const angle = (2 * Math.PI * index) / count;
    const present = axis.value_num !== null && axis.staleness !== "absent";
    return {
      axis: axis.axis,
      state: present ? "present" : "absent",
      value: present ? axis.value_num : null,
      staleness: axis.staleness,
      displayValue: present ? String(axis.value_num) : "absent",
      coverage: axis.coverage,
      note: axis.note,
      angle,
      point: present ? polar(center, valueRadius(axis.value_num as number, radius), angle) : null,
    };
  });
  return {
    kind: series.kind,
    context: series.context,
    asOf: series.as_of,
    size,
    center,
    radius,
    axes,
    polygon: axes.flatMap((axis) => (axis.point ? [axis.point] : [])),
    stale: axes.some((axis) => axis.staleness === "stale"),
  };
}

const fmt = (n: number) => n.toFixed(1);

/** Render a standalone SVG string (kept DOM-free so it is testable headless). */
export function radarSvg(view: RadarView): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${view.size} ${view.size}" ` +
      `class="kiviat kiviat-${view.kind}" role="img" aria-label="${view.context}">`,
  );
  for (const ring of [0.25, 0.5, 0.75, 1]) {
    parts.push(
      `<circle cx="${fmt(view.center.x)}" cy="${fmt(view.center.y)}" ` +
        `r="${fmt(view.radius * ring)}" class="ring" fill="none"/>`,
    );
  }
  for (const axis of view.axes) {
    const end = polar(view.center, view.radius, axis.angle);
    const spokeClass = axis.state === "absent" ? "spoke absent" : "spoke";
    parts.push(
      `<line x1="${fmt(view.center.x)}" y1="${fmt(view.center.y)}" ` +
        `x2="${fmt(end.x)}" y2="${fmt(end.y)}" class="${spokeClass}"/>`,
    );
    const label = polar(view.center, view.radius * 1.12, axis.angle);
    let labelText =
      axis.state === "absent"
        ? `${axis.axis} (absent)`
        : `${axis.axis}: ${axis.displayValue}`;
    if (axis.staleness === "stale") {
      labelText += ` [stale, coverage ${axis.coverage ?? "< 1"}]`;
    }
    parts.push(
      `<text x="${fmt(label.x)}" y="${fmt(label.y)}" class="axis-label ${axis.state}" ` +
        `text-anchor="middle">${labelText}</text>`,
    );
  }
  if (view.polygon.length >= 2) {
    const points = view.polygon.map((p) => `${fmt(p.x)},${fmt(p.y)}`).join(" ");
    const polygonClass = view.stale ? "score stale" : "score";
    parts.push(`<polygon points="${points}" class="${polygonClass}"/>`);
  }
  for (const axis of view.axes) {
    if (!axis.point) continue;
    const markerClass = axis.staleness === "stale" ? "marker stale" : "marker";
    parts.push(
      `<circle cx="${fmt(axis.point.x)}" cy="${fmt(axis.point.y)}" r="4" ` +
        `class="${markerClass}"><title>${axis.axis}: ${axis.displayValue}` +
        `${axis.staleness === "stale" ? " (stale)" : ""}</title></circle>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
