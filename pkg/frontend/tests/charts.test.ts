/** Chart geometry from the recorded sweep: the rising current curve, flat
 * constants, and the EFuse availability strip segments. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  availabilityRuns,
  bandGeometry,
  numberBand,
  replacementTimeline,
} from "../src/charts.js";
import type { SweepJson } from "../src/types.js";

const sweep = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "sweep-2021-2035.json"), "utf8"),
) as SweepJson;

describe("value curves", () => {
  it("ProcessingUnits.Current rises from ~31.3 to ~52.1 A", () => {
    const band = numberBand(sweep, "ProcessingUnits.Current");
    expect(band.unit).toBe("A");
    expect(band.lower[0]).toBeCloseTo(31.25, 2);
    expect(band.lower[band.lower.length - 1]).toBeCloseTo(52.08, 2);
    const lows = band.lower.filter((v): v is number => v !== null);
    for (let i = 1; i < lows.length; i += 1) {
      expect(lows[i]!).toBeGreaterThanOrEqual(lows[i - 1]!);
    }
  });

  it("constant BatteryVoltage gives a flat line and no band area", () => {
    const band = numberBand(sweep, "BlFuse.BatteryVoltage");
    expect(new Set(band.lower).size).toBe(1);
    const geo = bandGeometry(band, 400, 120);
    expect(geo.area).toBe("");
    expect(geo.min).toBe(48);
    expect(geo.max).toBe(48);
    const ys = new Set(
      geo.line
        .slice(1)
        .split(" L")
        .map((p) => p.split(",")[1]),
    );
    expect(ys.size).toBe(1);
  });

  it("an uncertain series yields a closed band path", () => {
    const band = numberBand(sweep, "Fuse.MaxLoadCurrent");
    const geo = bandGeometry(band, 400, 120);
    expect(geo.area).toMatch(/^M.*Z$/);
  });
});

describe("availability overview strip", () => {
  it("EFuse shows yellow, split, green, orange segments in order", () => {
    const runs = availabilityRuns(sweep.blocks["EFuse"]!.cases);
    expect(runs.map((r) => r.caseName)).toEqual([
      "not_yet",
      "maybe",
      "currently",
      "no_longer",
    ]);
    const byName = Object.fromEntries(runs.map((r) => [r.caseName, r]));
    expect(sweep.months[byName["not_yet"]!.start]).toBe("2021-01");
    expect(sweep.months[byName["maybe"]!.start]).toBe("2023-01");
    expect(sweep.months[byName["currently"]!.start]).toBe("2025-01");
    expect(sweep.months[byName["no_longer"]!.start]).toBe("2026-12");
  });

  it("always-available blocks are one light blue run", () => {
    const runs = availabilityRuns(sweep.blocks["Vehicle.Headlights"]!.cases);
    expect(runs).toHaveLength(1);
    expect(runs[0]?.caseName).toBe("always");
  });
});

describe("replacement timeline", () => {
  it("tracks the selected fuse and leaves the uncertain window open", () => {
    const timeline = replacementTimeline(
      sweep.blocks["Vehicle.Fuse"]!.replacement,
    );
    const byMonth = Object.fromEntries(
      sweep.months.map((m, i) => [m, timeline[i]]),
    );
    expect(byMonth["2021-06"]).toBe(1); // only BlFuse available
    expect(byMonth["2024-01"]).toBeNull(); // EFuse maybe: selection open
    expect(byMonth["2025-06"]).toBe(2); // EFuse wins on its KPI
    expect(byMonth["2030-01"]).toBe(1); // EFuse overloaded again
  });
});
