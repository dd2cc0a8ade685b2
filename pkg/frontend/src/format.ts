/** Text presentation of API values.  Formatting only: every number shown
 * comes straight from payload fields, never from client-side evaluation. */

import type { ValueJson } from "./types.js";

function num(x: number | null, infSign: string): string {
  return x === null ? infSign : String(x);
}

export function formatValue(v: ValueJson | undefined): string {
  if (!v) {
    return "";
  }
  if (v.kind === "boolean") {
    return v.value;
  }
  if (v.kind === "number") {
    if (v.tainted) {
      return "empty";
    }
    const unit = v.unit ?? "";
    if (v.lower !== null && v.lower === v.upper) {
      return `${v.lower}${unit}`;
    }
    return `[${num(v.lower, "-inf")}${unit}..${num(v.upper, "inf")}${unit}]`;
  }
  if (v.kind === "date") {
    if (v.tainted) {
      return "empty";
    }
    if (v.lower !== null && v.lower === v.upper) {
      return v.lower;
    }
    return `[${v.lower ?? "-inf"}..${v.upper ?? "inf"}]`;
  }
  if (v.tainted) {
    return "empty";
  }
  if (v.lowerMonths !== null && v.lowerMonths === v.upperMonths) {
    return `months(${v.lowerMonths})`;
  }
  return `months [${num(v.lowerMonths, "-inf")}..${num(v.upperMonths, "inf")}]`;
}

export function isoToMonth(iso: string): number {
  const [year, month] = iso.split("-");
  return Number(year) * 12 + (Number(month) - 1);
}

export function monthToIso(index: number): string {
  const year = Math.floor(index / 12);
  const month = (index % 12) + 1;
  return `${String(year).padStart(4, "0")}-${String(month).padStart(2, "0")}`;
}
