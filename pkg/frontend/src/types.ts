/** JSON payload shapes served by the roadmap API. */

export type CaseName =
  | "always"
  | "currently"
  | "not_yet"
  | "no_longer"
  | "maybe"
  | "never";

export interface BooleanJson {
  kind: "boolean";
  value: "true" | "false" | "maybe" | "tainted";
}

export interface NumberJson {
  kind: "number";
  lower: number | null;
  upper: number | null;
  unit: string;
  tainted?: boolean;
}

export interface DateJson {
  kind: "date";
  lower: string | null;
  upper: string | null;
  tainted?: boolean;
}

export interface DurationJson {
  kind: "duration";
  lowerMonths: number | null;
  upperMonths: number | null;
  tainted?: boolean;
}

export type ValueJson = BooleanJson | NumberJson | DateJson | DurationJson;

export interface ReferenceSpan {
  path: string;
  span: [number, number];
}

export interface MemberJson {
  element: "property" | "requirement" | "kpi";
  id: string;
  span: [number, number];
  name?: string;
  formula?: string;
  condition?: string;
  metric?: string;
  declaredType?: string;
  references?: ReferenceSpan[];
}

export interface BlockJson {
  id: string;
  name: string;
  implements: string[];
  members: MemberJson[];
  children: BlockJson[];
}

export interface ModelJson {
  name: string;
  source: string;
  blocks: BlockJson[];
}

export interface RequirementSolveJson {
  reference: string;
  value: ValueJson;
  case?: CaseName;
}

export interface BlockSolveJson {
  availability: ValueJson;
  replacement: ValueJson;
  case?: CaseName;
  selected?: string;
  requirements?: RequirementSolveJson[];
}

export interface SolveJson {
  t: string;
  converged: boolean;
  rounds: number;
  values: Record<string, ValueJson>;
  blocks: Record<string, BlockSolveJson>;
}

export interface BlockSweepJson {
  availability: string[];
  cases: CaseName[];
  requirements?: Record<string, { values: string[]; cases: CaseName[] }>;
  replacement?: ValueJson[];
}

export interface SweepJson {
  from: string;
  to: string;
  step: number;
  months: string[];
  series: Record<string, ValueJson[]>;
  blocks: Record<string, BlockSweepJson>;
}

export interface TraceJson {
  reference: string;
  t: string;
  value: ValueJson;
  elements: string[];
  changedSincePrevious: Record<string, boolean>;
}
