/** Fixture tests against recorded solve responses: requirement coloring at
 * Jan2021 / Jan2024 / Jan2030 and the selected-implementation marker. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { buildView, findCard } from "../src/render.js";
import { paintFor } from "../src/colors.js";
import type { ModelJson, SolveJson } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");

function load<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf8")) as T;
}

const model = load<ModelJson>("model.json");

function viewAt(iso: string) {
  return buildView(model, load<SolveJson>(`solve-${iso}.json`));
}

describe("requirement row coloring from recorded responses", () => {
  it("renders the market-entry requirement yellow at Jan2021 (not yet)", () => {
    const efuse = findCard(viewAt("2021-01"), "EFuse");
    expect(efuse).not.toBeNull();
    const timeReq = efuse!.requirements[1];
    expect(timeReq?.caseName).toBe("not_yet");
    expect(timeReq?.paint).toMatchObject({ kind: "solid", name: "yellow" });
  });

  it("renders it split green/red at Jan2024 (maybe)", () => {
    const efuse = findCard(viewAt("2024-01"), "EFuse");
    const timeReq = efuse!.requirements[1];
    expect(timeReq?.caseName).toBe("maybe");
    expect(timeReq?.paint.kind).toBe("split");
    expect(timeReq?.paint.name).toBe("split");
  });

  it("renders the load requirement orange at Jan2030 (no longer)", () => {
    const efuse = findCard(viewAt("2030-01"), "EFuse");
    const loadReq = efuse!.requirements[0];
    expect(loadReq?.caseName).toBe("no_longer");
    expect(loadReq?.paint).toMatchObject({ kind: "solid", name: "orange" });
    // while the time requirement is simply satisfied now
    expect(efuse!.requirements[1]?.paint).toMatchObject({ name: "green" });
  });
});

describe("selection marker", () => {
  it("marks BlFuse as the selected implementation at Jan2030", () => {
    const cards = viewAt("2030-01");
    const fuse = findCard(cards, "Vehicle.Fuse");
    expect(fuse?.selectedImpl).toBe("BlFuse");
    expect(findCard(cards, "BlFuse")?.markedSelected).toBe(true);
    expect(findCard(cards, "EFuse")?.markedSelected).toBe(false);
  });
});

describe("view structure", () => {
  it("shows solved values next to formulas, straight from the payload", () => {
    const cards = viewAt("2030-01");
    const vehicle = findCard(cards, "Vehicle");
    const total = vehicle!.properties[0];
    expect(total?.label).toBe("TotalCurrent");
    expect(total?.formula).toBe("SUM(Current)");
    expect(total?.value).toBe("49.64A");
  });

  it("renders blocks without requirements without requirement rows", () => {
    const headlights = findCard(viewAt("2030-01"), "Vehicle.Headlights");
    expect(headlights!.requirements).toHaveLength(0);
    expect(headlights!.caseName).toBe("always");
    expect(headlights!.paint).toMatchObject({ name: "lightblue" });
  });

  it("exposes reference paths for highlighting", () => {
    const fuse = findCard(viewAt("2030-01"), "Vehicle.Fuse");
    expect(fuse!.requirements[0]?.refPaths).toEqual([
      "MaxLoadCurrent",
      "Vehicle.TotalCurrent",
    ]);
  });
});

describe("the client never computes semantics", () => {
  it("reflects a tampered case field verbatim instead of recomputing", () => {
    const solve = load<SolveJson>("solve-2030-01.json");
    const tampered: SolveJson = JSON.parse(JSON.stringify(solve));
    tampered.blocks["EFuse"]!.requirements![0]!.case = "never";
    const efuse = findCard(buildView(model, tampered), "EFuse");
    expect(efuse!.requirements[0]?.caseName).toBe("never");
    expect(efuse!.requirements[0]?.paint).toMatchObject({ name: "red" });
  });

  it("reflects tampered values verbatim", () => {
    const solve = load<SolveJson>("solve-2030-01.json");
    const tampered: SolveJson = JSON.parse(JSON.stringify(solve));
    (tampered.values["Vehicle.TotalCurrent"] as { lower: number }).lower = 7;
    (tampered.values["Vehicle.TotalCurrent"] as { upper: number }).upper = 7;
    const vehicle = findCard(buildView(model, tampered), "Vehicle");
    expect(vehicle!.properties[0]?.value).toBe("7A");
  });
});

describe("case to color mapping", () => {
  it("covers the six cases", () => {
    expect(paintFor("always")).toMatchObject({ name: "lightblue" });
    expect(paintFor("currently")).toMatchObject({ name: "green" });
    expect(paintFor("not_yet")).toMatchObject({ name: "yellow" });
    expect(paintFor("no_longer")).toMatchObject({ name: "orange" });
    expect(paintFor("maybe")).toMatchObject({ kind: "split" });
    expect(paintFor("never")).toMatchObject({ name: "red" });
  });
});
