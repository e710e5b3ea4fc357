import { describe, expect, it } from "vitest";

import { buildRadarView, radarSvg } from "../src/radar.js";
import { processRadarFixture } from "./helpers/mockService.js";
import type { KiviatSeriesPayload } from "../src/types.js";

describe("radar geometry", () => {
  it("keeps the service's axis order", () => {
    const view = buildRadarView(processRadarFixture());
    expect(view.axes.map((a) => a.axis)).toEqual(["Implementer", "Coordinator", "Sponsor"]);
  });

  it("maps higher scores to points farther from the center", () => {
    const view = buildRadarView(processRadarFixture());
    const [implementer, coordinator] = view.axes;
    const distance = (p: { x: number; y: number }) =>
      Math.hypot(p.x - view.center.x, p.y - view.center.y);
    expect(distance(implementer!.point!)).toBeGreaterThan(distance(coordinator!.point!));
  });

  it("renders absent axes as absent, never as zero", () => {
    const view = buildRadarView(processRadarFixture());
    const sponsor = view.axes[2]!;
    expect(sponsor.state).toBe("absent");
    expect(sponsor.displayValue).toBe("absent");
    expect(sponsor.point).toBeNull();
    // the polygon skips the absent axis instead of dropping to a zero vertex
    expect(view.polygon).toHaveLength(2);

    const zeroSeries: KiviatSeriesPayload = {
      ...processRadarFixture(),
      axes: processRadarFixture().axes.map((axis) =>
        axis.axis === "Sponsor"
          ? { ...axis, value: "0", value_num: 0, staleness: "fresh" as const }
          : axis,
      ),
    };
    const zeroView = buildRadarView(zeroSeries);
    const zeroSponsor = zeroView.axes[2]!;
    expect(zeroSponsor.state).toBe("present");
    expect(zeroSponsor.displayValue).toBe("0");
    expect(zeroSponsor.point).not.toBeNull();
    expect(zeroView.polygon).toHaveLength(3);
  });

  it("marks stale axes distinctly with a coverage badge", () => {
    const series = processRadarFixture();
    series.axes[0]!.staleness = "stale";
    series.axes[0]!.coverage = "1/2";
    const view = buildRadarView(series);
    expect(view.stale).toBe(true);
    expect(view.axes[0]!.coverage).toBe("1/2");
    const svg = radarSvg(view);
    expect(svg).toContain('class="marker stale"');
    expect(svg).toContain('class="score stale"');
    expect(svg).toContain("[stale, coverage 1/2]");
  });

  it("renders an SVG with labelled spokes and absent styling", () => {
    const svg = radarSvg(buildRadarView(processRadarFixture()));
    expect(svg).toContain("<svg");
    expect(svg).toContain("Implementer: 2.8");
    expect(svg).toContain("Sponsor (absent)");
    expect(svg).toContain('class="spoke absent"');
    expect(svg).not.toContain("Sponsor: 0");
  });
});
