/** DOM application of the pure view structures. */

import { paintFor, tracePaint, type Paint } from "./colors.js";
import type { BlockCard, KpiRow, PropertyRow, RequirementRow } from "./render.js";
import { availabilityRuns, bandGeometry, type NumberBand } from "./charts.js";
import type { CaseName, TraceJson } from "./types.js";

export interface Handlers {
  onSelectExpression(elementId: string, refPaths: string[]): void;
  onSelectValue(reference: string, elementId: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function applyPaint(node: HTMLElement, paint: Paint): void {
  if (paint.kind === "solid") {
    node.style.background = paint.css;
  } else {
    node.style.background =
      `linear-gradient(180deg, ${paint.upper} 50%, ${paint.lower} 50%)`;
  }
  node.dataset.paint = paint.name;
}

function propertyRow(
  card: BlockCard,
  row: PropertyRow,
  handlers: Handlers,
): HTMLElement {
  const div = el("div", "row property");
  div.dataset.element = row.elementId;
  const label = el("span", "name", row.label);
  const formula = el("span", "formula", row.formula ? `= ${row.formula}` : "");
  formula.onclick = () => handlers.onSelectExpression(row.elementId, row.refPaths);
  const value = el("span", "value", row.value);
  value.title = "show trace";
  value.onclick = () => handlers.onSelectValue(`${card.name}.${row.label}`,
                                               row.elementId);
  div.append(label, formula, value);
  return div;
}

function kpiRow(row: KpiRow, handlers: Handlers): HTMLElement {
  const div = el("div", "row kpi");
  div.dataset.element = row.elementId;
  const label = el("span", "name", "kpi");
  const formula = el("span", "formula", row.metric);
  formula.onclick = () => handlers.onSelectExpression(row.elementId, row.refPaths);
  const values = el("span", "value",
    row.perImplementation.map((p) => `${p.key}=${p.value}`).join("  "));
  div.append(label, formula, values);
  return div;
}

function requirementRow(row: RequirementRow, handlers: Handlers): HTMLElement {
  const div = el("div", "row requirement");
  div.dataset.element = row.elementId;
  div.dataset.case = row.caseName ?? "";
  applyPaint(div, row.paint);
  const label = el("span", "name", "require");
  const formula = el("span", "formula", row.condition);
  formula.onclick = () => handlers.onSelectExpression(row.elementId, row.refPaths);
  const value = el("span", "value", row.value);
  div.append(label, formula, value);
  return div;
}

export function renderCard(card: BlockCard, handlers: Handlers): HTMLElement {
  const root = el("section", "card");
  root.dataset.block = card.id;
  const title = el("header", "title");
  const caption = el("span", "block-name", card.name);
  title.append(caption);
  if (card.markedSelected) {
    const badge = el("span", "selected-badge", "✔ selected");
    title.append(badge);
  }
  if (card.implementsIds.length) {
    title.append(el("span", "impl-note",
      `implements ${card.implementsIds.join(", ")}`));
  }
  if (card.caseName) {
    const chip = el("span", "case-chip", card.caseName.replace("_", " "));
    applyPaint(chip, card.paint);
    title.append(chip);
  }
  root.append(title);
  if (card.selectedImpl) {
    root.append(el("div", "selection-note",
      `→ selected implementation: ${card.selectedImpl}`));
  }
  for (const kpi of card.kpis) {
    root.append(kpiRow(kpi, handlers));
  }
  for (const prop of card.properties) {
    root.append(propertyRow(card, prop, handlers));
  }
  for (const req of card.requirements) {
    root.append(requirementRow(req, handlers));
  }
  if (card.children.length) {
    const kids = el("div", "children");
    for (const child of card.children) {
      kids.append(renderCard(child, handlers));
    }
    root.append(kids);
  }
  return root;
}

export function renderCards(
  host: HTMLElement,
  cards: BlockCard[],
  handlers: Handlers,
): void {
  host.replaceChildren(...cards.map((c) => renderCard(c, handlers)));
}

/** Reference highlighting: mark every property row whose display path is
 * referenced by the clicked formula. */
export function highlightReferences(host: HTMLElement, paths: string[]): void {
  host.querySelectorAll(".ref-highlight").forEach((n) =>
    n.classList.remove("ref-highlight"));
  const wanted = new Set(paths.map((p) => p.split("(")[0]));
  host.querySelectorAll<HTMLElement>(".row.property").forEach((row) => {
    const card = row.closest<HTMLElement>(".card");
    const block = card?.dataset.block ?? "";
    const name = row.querySelector(".name")?.textContent ?? "";
    const shortBlock = block.split(".").pop() ?? block;
    const candidates = [name, `${shortBlock}.${name}`, `${block}.${name}`];
    if (candidates.some((c) => wanted.has(c))) {
      row.classList.add("ref-highlight");
    }
  });
}

/** Trace highlighting: green = changed since T-1, red = constant. */
export function highlightTrace(host: HTMLElement, trace: TraceJson): void {
  host.querySelectorAll<HTMLElement>(".trace-highlight").forEach((n) => {
    n.classList.remove("trace-highlight");
    n.style.outline = "";
  });
  const elements = new Set(trace.elements);
  host.querySelectorAll<HTMLElement>("[data-element]").forEach((row) => {
    const id = row.dataset.element ?? "";
    if (!elements.has(id) && !elements.has(id.split("/")[0] ?? "")) {
      return;
    }
    const changedByRef = Object.entries(trace.changedSincePrevious)
      .some(([ref, changed]) => changed && id.startsWith(ref.split(".?")[0] ?? ref));
    const paint = tracePaint(changedByRef);
    row.classList.add("trace-highlight");
    row.style.outline = `3px solid ${paint.kind === "solid" ? paint.css : "#999"}`;
  });
}

export function renderAvailabilityStrip(
  cases: CaseName[],
  width = 420,
  height = 14,
): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  const total = Math.max(1, cases.length);
  for (const run of availabilityRuns(cases)) {
    const paint = paintFor(run.caseName);
    const x = (run.start / total) * width;
    const w = ((run.end - run.start) / total) * width;
    if (paint.kind === "split") {
      for (const [y, css] of [[0, paint.upper], [height / 2, paint.lower]] as
           [number, string][]) {
        const rect = document.createElementNS(svg.namespaceURI, "rect");
        rect.setAttribute("x", x.toFixed(2));
        rect.setAttribute("y", String(y));
        rect.setAttribute("width", w.toFixed(2));
        rect.setAttribute("height", String(height / 2));
        rect.setAttribute("fill", css);
        svg.append(rect);
      }
    } else {
      const rect = document.createElementNS(svg.namespaceURI, "rect");
      rect.setAttribute("x", x.toFixed(2));
      rect.setAttribute("y", "0");
      rect.setAttribute("width", w.toFixed(2));
      rect.setAttribute("height", String(height));
      rect.setAttribute("fill", paint.css);
      svg.append(rect);
    }
  }
  return svg;
}

export function renderBandChart(
  band: NumberBand,
  width = 420,
  height = 120,
): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("class", "band-chart");
  const geo = bandGeometry(band, width, height);
  if (geo.area) {
    const area = document.createElementNS(svg.namespaceURI, "path");
    area.setAttribute("d", geo.area);
    area.setAttribute("fill", "rgba(105, 179, 76, 0.25)");
    svg.append(area);
  }
  if (geo.line) {
    const line = document.createElementNS(svg.namespaceURI, "path");
    line.setAttribute("d", geo.line);
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "#2b6cb0");
    line.setAttribute("stroke-width", "1.5");
    svg.append(line);
  }
  const label = document.createElementNS(svg.namespaceURI, "text");
  label.setAttribute("x", "6");
  label.setAttribute("y", "12");
  label.setAttribute("class", "band-label");
  label.textContent = `${geo.min.toFixed(2)} .. ${geo.max.toFixed(2)} ${band.unit}`;
  svg.append(label);
  return svg;
}
