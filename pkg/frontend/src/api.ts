/** Typed fetch client for the roadmap API. */

import type {
  ModelJson,
  SolveJson,
  SweepJson,
  TraceJson,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly span?: [number, number],
  ) {
    super(message);
  }
}

async function expectJson<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(
      (body as { error?: string }).error ?? `HTTP ${resp.status}`,
      resp.status,
      (body as { span?: [number, number] }).span,
    );
  }
  return body as T;
}

export class ApiClient {
  constructor(private readonly base = "") {}

  async models(): Promise<string[]> {
    const body = await expectJson<{ models: string[] }>(
      await fetch(`${this.base}/api/models`),
    );
    return body.models;
  }

  model(id: string): Promise<ModelJson> {
    return fetch(`${this.base}/api/models/${id}`).then((r) =>
      expectJson<ModelJson>(r),
    );
  }

  solve(id: string, tIso: string): Promise<SolveJson> {
    return fetch(`${this.base}/api/models/${id}/solve?t=${tIso}`).then((r) =>
      expectJson<SolveJson>(r),
    );
  }

  sweep(id: string, from: string, to: string, step = 1): Promise<SweepJson> {
    const q = `from=${from}&to=${to}&step=${step}`;
    return fetch(`${this.base}/api/models/${id}/sweep?${q}`).then((r) =>
      expectJson<SweepJson>(r),
    );
  }

  trace(id: string, ref: string, tIso: string): Promise<TraceJson> {
    const q = `ref=${encodeURIComponent(ref)}&t=${tIso}`;
    return fetch(`${this.base}/api/models/${id}/trace?${q}`).then((r) =>
      expectJson<TraceJson>(r),
    );
  }

  async putSource(id: string, source: string): Promise<void> {
    await expectJson(
      await fetch(`${this.base}/api/models/${id}/source`, {
        method: "PUT",
        headers: { "content-type": "text/plain" },
        body: source,
      }),
    );
  }
}
