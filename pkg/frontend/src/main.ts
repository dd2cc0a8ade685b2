/** Application wiring: slider, fetches, and panel updates. */

import { ApiClient, ApiError } from "./api.js";
import { numberBand, replacementTimeline } from "./charts.js";
import { SolveController, debounce } from "./controller.js";
import { isoToMonth, monthToIso } from "./format.js";
import { buildView } from "./render.js";
import {
  highlightReferences,
  highlightTrace,
  renderAvailabilityStrip,
  renderBandChart,
  renderCards,
} from "./dom.js";
import type { ModelJson, SolveJson, SweepJson } from "./types.js";

const HORIZON_FROM = "2021-01";
const HORIZON_TO = "2040-01";

const api = new ApiClient("");

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

async function start(): Promise<void> {
  const models = await api.models();
  const modelId = models[0];
  if (!modelId) {
    byId("status").textContent = "no models served";
    return;
  }
  let model: ModelJson = await api.model(modelId);
  const cardsHost = byId<HTMLDivElement>("cards");
  const status = byId<HTMLSpanElement>("status");
  const slider = byId<HTMLInputElement>("time-slider");
  const timeLabel = byId<HTMLSpanElement>("time-label");
  const plots = byId<HTMLDivElement>("plots");
  const overview = byId<HTMLDivElement>("overview");
  const editor = byId<HTMLTextAreaElement>("editor");
  const editorStatus = byId<HTMLSpanElement>("editor-status");

  slider.min = String(isoToMonth(HORIZON_FROM));
  slider.max = String(isoToMonth(HORIZON_TO));
  slider.value = String(isoToMonth("2030-01"));
  editor.value = model.source;

  let currentT = monthToIso(Number(slider.value));
  let lastSolve: SolveJson | null = null;

  const handlers = {
    onSelectExpression(_elementId: string, refPaths: string[]): void {
      highlightReferences(cardsHost, refPaths);
    },
    onSelectValue(reference: string, _elementId: string): void {
      api
        .trace(modelId, reference, currentT)
        .then((trace) => highlightTrace(cardsHost, trace))
        .catch((err) => {
          status.textContent = `trace failed: ${err.message}`;
        });
    },
  };

  const apply = (payload: SolveJson): void => {
    lastSolve = payload;
    renderCards(cardsHost, buildView(model, payload), handlers);
    status.textContent = payload.converged
      ? `solved ${payload.t} in ${payload.rounds} rounds`
      : `bounds after ${payload.rounds} rounds (safe superset)`;
  };

  const controller = new SolveController(
    (tIso) => api.solve(modelId, tIso),
    apply,
  );

  const requestSolve = debounce((tIso: string) => {
    void controller.setTime(tIso).catch((err: Error) => {
      status.textContent = `solve failed: ${err.message}`;
    });
  }, 150);

  slider.oninput = () => {
    currentT = monthToIso(Number(slider.value));
    timeLabel.textContent = currentT;
    requestSolve(currentT);
  };

  const renderSweep = (sweep: SweepJson): void => {
    plots.replaceChildren();
    const plotRefs = Object.keys(sweep.series).filter((k) => {
      const first = sweep.series[k]?.[0];
      return first?.kind === "number" && !k.includes("?");
    });
    for (const refKey of plotRefs) {
      const band = numberBand(sweep, refKey);
      if (band.lower.every((v) => v === null)) {
        continue;
      }
      const wrap = document.createElement("figure");
      const cap = document.createElement("figcaption");
      cap.textContent = refKey;
      wrap.append(cap, renderBandChart(band));
      plots.append(wrap);
    }
    overview.replaceChildren();
    for (const [blockId, entry] of Object.entries(sweep.blocks)) {
      const row = document.createElement("div");
      row.className = "overview-row";
      const label = document.createElement("span");
      label.textContent = blockId;
      const strip = renderAvailabilityStrip(entry.cases);
      row.append(label, strip);
      const timeline = replacementTimeline(entry.replacement);
      if (timeline.length) {
        const note = document.createElement("span");
        note.className = "repl-note";
        const first = timeline[0];
        note.textContent = ` selection varies (starts at ${first ?? "?"})`;
        row.append(note);
      }
      overview.append(row);
    }
  };

  byId<HTMLButtonElement>("apply-source").onclick = async () => {
    try {
      await api.putSource(modelId, editor.value);
      model = await api.model(modelId);
      editorStatus.textContent = "applied";
      requestSolve(currentT);
      void api
        .sweep(modelId, HORIZON_FROM, HORIZON_TO)
        .then(renderSweep)
        .catch(() => undefined);
    } catch (err) {
      if (err instanceof ApiError) {
        editorStatus.textContent = err.span
          ? `rejected: ${err.message} at ${err.span[0]}..${err.span[1]}`
          : `rejected: ${err.message}`;
      } else {
        editorStatus.textContent = String(err);
      }
    }
  };

  timeLabel.textContent = currentT;
  await controller.setTime(currentT);
  void api
    .sweep(modelId, HORIZON_FROM, HORIZON_TO)
    .then(renderSweep)
    .catch((err: Error) => {
      status.textContent = `sweep failed: ${err.message}`;
    });
}

start().catch((err) => {
  const status = document.getElementById("status");
  if (status) {
    status.textContent = `API unreachable: ${err}`;
  }
});
