/** Time slider orchestration: debounced fetches, stale responses discarded
 * by sequence number.  Pure async logic, no DOM. */

import type { SolveJson } from "./types.js";

export class SolveController {
  private seq = 0;
  private applied = 0;

  constructor(
    private readonly fetchSolve: (tIso: string) => Promise<SolveJson>,
    private readonly onApply: (payload: SolveJson) => void,
  ) {}

  /** Returns true when the response was applied, false when discarded. */
  async setTime(tIso: string): Promise<boolean> {
    this.seq += 1;
    const mine = this.seq;
    const payload = await this.fetchSolve(tIso);
    if (mine <= this.applied) {
      return false; // a newer response already rendered
    }
    this.applied = mine;
    this.onApply(payload);
    return true;
  }
}

/** Trailing-edge debounce used by the slider. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  delayMs: number,
  timers: {
    set: (cb: () => void, ms: number) => number;
    clear: (id: number) => void;
  } = {
    set: (cb, ms) => setTimeout(cb, ms) as unknown as number,
    clear: (id) => clearTimeout(id),
  },
): (...args: A) => void {
  let pending: number | null = null;
  return (...args: A) => {
    if (pending !== null) {
      timers.clear(pending);
    }
    pending = timers.set(() => {
      pending = null;
      fn(...args);
    }, delayMs);
  };
}
