/** Pure view construction: (model JSON, solve JSON) to renderable cards.
 *
 * The UI never computes semantics.  Values are copied from
 * ``solve.values``, requirement colors from each requirement's ``case``
 * field, and the selected implementation from ``blocks[id].selected``.
 */

import { paintFor, type Paint } from "./colors.js";
import { formatValue } from "./format.js";
import type {
  BlockJson,
  CaseName,
  MemberJson,
  ModelJson,
  SolveJson,
} from "./types.js";

export interface PropertyRow {
  elementId: string;
  label: string;
  formula: string | null;
  value: string;
  refPaths: string[];
}

export interface KpiRow {
  elementId: string;
  metric: string;
  perImplementation: { key: string; value: string }[];
  refPaths: string[];
}

export interface RequirementRow {
  elementId: string;
  reference: string;
  condition: string;
  value: string;
  caseName: CaseName | null;
  paint: Paint;
  refPaths: string[];
}

export interface BlockCard {
  id: string;
  name: string;
  implementsIds: string[];
  availability: string;
  caseName: CaseName | null;
  paint: Paint;
  selectedImpl: string | null;
  markedSelected: boolean;
  properties: PropertyRow[];
  kpis: KpiRow[];
  requirements: RequirementRow[];
  children: BlockCard[];
}

function displayKey(
  block: BlockJson,
  name: string,
  values: Record<string, unknown>,
): string {
  const short = `${block.name}.${name}`;
  if (short in values) {
    return short;
  }
  return `${block.id}.${name}`;
}

function requirementRows(
  block: BlockJson,
  solve: SolveJson,
): RequirementRow[] {
  const slot = solve.blocks[block.id];
  const reqMembers = block.members.filter((m) => m.element === "requirement");
  const rows: RequirementRow[] = [];
  (slot?.requirements ?? []).forEach((req, i) => {
    const member: MemberJson | undefined = reqMembers[i];
    rows.push({
      elementId: member?.id ?? req.reference,
      reference: req.reference,
      condition: member?.condition ?? "",
      value: formatValue(req.value),
      caseName: req.case ?? null,
      paint: paintFor(req.case),
      refPaths: (member?.references ?? []).map((r) => r.path),
    });
  });
  return rows;
}

function buildCard(block: BlockJson, solve: SolveJson): BlockCard {
  const slot = solve.blocks[block.id];
  const properties: PropertyRow[] = [];
  const kpis: KpiRow[] = [];
  let kpiOrdinal = 0;
  for (const member of block.members) {
    if (member.element === "property" && member.name) {
      const key = displayKey(block, member.name, solve.values);
      properties.push({
        elementId: member.id,
        label: member.name,
        formula: member.formula ?? member.declaredType ?? null,
        value: formatValue(solve.values[key]),
        refPaths: (member.references ?? []).map((r) => r.path),
      });
    } else if (member.element === "kpi") {
      kpiOrdinal += 1;
      const prefixShort = `${block.name}.?kpi${kpiOrdinal}(`;
      const prefixFull = `${block.id}.?kpi${kpiOrdinal}(`;
      const per = Object.keys(solve.values)
        .filter((k) => k.startsWith(prefixShort) || k.startsWith(prefixFull))
        .sort()
        .map((k) => ({ key: k, value: formatValue(solve.values[k]) }));
      kpis.push({
        elementId: member.id,
        metric: member.metric ?? "",
        perImplementation: per,
        refPaths: (member.references ?? []).map((r) => r.path),
      });
    }
  }
  return {
    id: block.id,
    name: block.name,
    implementsIds: block.implements,
    availability: formatValue(slot?.availability),
    caseName: slot?.case ?? null,
    paint: paintFor(slot?.case),
    selectedImpl: slot?.selected ?? null,
    markedSelected: false,
    properties,
    kpis,
    requirements: requirementRows(block, solve),
    children: block.children.map((c) => buildCard(c, solve)),
  };
}

/** Cards in hierarchy order; implementations selected somewhere get their
 * marker (the green arrow analog) set. */
export function buildView(model: ModelJson, solve: SolveJson): BlockCard[] {
  const cards = model.blocks.map((b) => buildCard(b, solve));
  const selected = new Set<string>();
  for (const slot of Object.values(solve.blocks)) {
    if (slot.selected) {
      selected.add(slot.selected);
    }
  }
  const mark = (card: BlockCard): void => {
    card.markedSelected = selected.has(card.id);
    card.children.forEach(mark);
  };
  cards.forEach(mark);
  return cards;
}

/** Depth-first search over cards. */
export function findCard(cards: BlockCard[], id: string): BlockCard | null {
  for (const card of cards) {
    if (card.id === id) {
      return card;
    }
    const hit = findCard(card.children, id);
    if (hit) {
      return hit;
    }
  }
  return null;
}
