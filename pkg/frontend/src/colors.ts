/** The availability color code.
 *
 * Requirement rows: green = satisfied, yellow = not yet satisfied, orange =
 * no longer satisfied, half green / half red = maybe, red = never.  The
 * block overview additionally shows light blue for always-available.
 */

import type { CaseName } from "./types.js";

export type Paint =
  | { kind: "solid"; name: string; css: string }
  | { kind: "split"; name: "split"; upper: string; lower: string };

const GREEN = "#69b34c";
const LIGHT_BLUE = "#a8d5f2";
const YELLOW = "#f2c744";
const ORANGE = "#ef8d33";
const RED = "#d64545";
const GREY = "#cccccc";

const SOLID: Record<string, Paint> = {
  currently: { kind: "solid", name: "green", css: GREEN },
  always: { kind: "solid", name: "lightblue", css: LIGHT_BLUE },
  not_yet: { kind: "solid", name: "yellow", css: YELLOW },
  no_longer: { kind: "solid", name: "orange", css: ORANGE },
  never: { kind: "solid", name: "red", css: RED },
};

/** Paint for a requirement row or an availability bar segment. */
export function paintFor(caseName: CaseName | null | undefined): Paint {
  if (!caseName) {
    return { kind: "solid", name: "grey", css: GREY };
  }
  if (caseName === "maybe") {
    return { kind: "split", name: "split", upper: GREEN, lower: RED };
  }
  const paint = SOLID[caseName];
  return paint ?? { kind: "solid", name: "grey", css: GREY };
}

/** Trace highlighting: green for changed since T-1, red for constant. */
export function tracePaint(changed: boolean | undefined): Paint {
  return changed
    ? { kind: "solid", name: "green", css: GREEN }
    : { kind: "solid", name: "red", css: RED };
}
