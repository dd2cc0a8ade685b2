/** Chart geometry: value curves with uncertainty bands and per-block
 * availability strips.  Pure functions from payload series to SVG path
 * data; no rendering here. */

import type { CaseName, SweepJson, ValueJson } from "./types.js";

export interface NumberBand {
  months: string[];
  lower: (number | null)[];
  upper: (number | null)[];
  unit: string;
}

export function numberBand(sweep: SweepJson, refKey: string): NumberBand {
  const series = sweep.series[refKey] ?? [];
  const lower: (number | null)[] = [];
  const upper: (number | null)[] = [];
  let unit = "";
  for (const v of series) {
    if (v.kind === "number") {
      lower.push(v.lower);
      upper.push(v.upper);
      unit = v.unit || unit;
    } else {
      lower.push(null);
      upper.push(null);
    }
  }
  return { months: sweep.months, lower, upper, unit };
}

export interface BandGeometry {
  line: string; // midline path
  area: string; // closed band path (empty when the band is degenerate)
  min: number;
  max: number;
}

/** SVG path data for a band in a width x height viewport. */
export function bandGeometry(
  band: NumberBand,
  width: number,
  height: number,
  pad = 4,
): BandGeometry {
  const xs: number[] = [];
  const los: number[] = [];
  const his: number[] = [];
  band.lower.forEach((lo, i) => {
    const hi = band.upper[i];
    if (lo === null || hi === null || hi === undefined) {
      return;
    }
    xs.push(i);
    los.push(lo);
    his.push(hi as number);
  });
  if (xs.length === 0) {
    return { line: "", area: "", min: 0, max: 0 };
  }
  const min = Math.min(...los);
  const max = Math.max(...his);
  const spanX = Math.max(1, band.lower.length - 1);
  const spanY = max - min || 1;
  const px = (i: number): number => pad + (i / spanX) * (width - 2 * pad);
  const py = (v: number): number =>
    height - pad - ((v - min) / spanY) * (height - 2 * pad);
  const pt = (i: number, v: number): string =>
    `${px(i).toFixed(2)},${py(v).toFixed(2)}`;
  const mid = xs.map((x, k) =>
    pt(x, ((los[k] as number) + (his[k] as number)) / 2),
  );
  const line = `M${mid.join(" L")}`;
  let area = "";
  if (his.some((h, k) => h !== los[k])) {
    const top = xs.map((x, k) => pt(x, his[k] as number));
    const bottom = xs
      .map((x, k) => pt(x, los[k] as number))
      .reverse();
    area = `M${top.join(" L")} L${bottom.join(" L")} Z`;
  }
  return { line, area, min, max };
}

export interface CaseRun {
  caseName: CaseName;
  start: number; // sample index, inclusive
  end: number; // sample index, exclusive
}

/** Run-length encoding of an availability case series. */
export function availabilityRuns(cases: CaseName[]): CaseRun[] {
  const runs: CaseRun[] = [];
  for (let i = 0; i < cases.length; i += 1) {
    const current = cases[i] as CaseName;
    const last = runs[runs.length - 1];
    if (last && last.caseName === current) {
      last.end = i + 1;
    } else {
      runs.push({ caseName: current, start: i, end: i + 1 });
    }
  }
  return runs;
}

/** Selected-alternative timeline: the definite index per sample or null
 * when the selection is uncertain. */
export function replacementTimeline(
  values: ValueJson[] | undefined,
): (number | null)[] {
  if (!values) {
    return [];
  }
  return values.map((v) => {
    if (v.kind === "number" && v.lower !== null && v.lower === v.upper) {
      return v.lower;
    }
    return null;
  });
}
