"""HTTP API for the browser UI and other clients.

Every response is JSON built by the same serializer the CLI uses.  Errors
come back as ``{"error": ..., "span": [start, end]?}`` with status 400
(malformed query), 404 (unknown model or reference), or 422 (replacement
model source fails validation).

Model replacement via PUT is atomic: a fully validated session object is
swapped in, so concurrent readers see either the old model or the new one.
Sweeps are cached per (from, to, step) and shared between requests.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .analysis import DEFAULT_FROM, DEFAULT_TO, Sweep, sweep as run_sweep
from .errors import RoadmapError
from .lowering import ConstraintSystem, lower
from .model import Model, parse_model
from .serialize import model_json, solve_json, sweep_json, trace_json
from .solver import Solver
from .values import parse_iso_month

DEFAULT_HORIZON = (DEFAULT_FROM, DEFAULT_TO)


@dataclass
class ApiSession:
    """One served model: parsed source, lowered constraints, cached sweeps.

    Sessions are immutable after construction; editing the source builds a
    replacement session. The caches only ever add entries for fixed inputs,
    so sharing them between threads is safe."""

    model_id: str
    source: str
    model: Model
    system: ConstraintSystem
    solver: Solver
    sweeps: dict[tuple[int, int, int], Sweep] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @staticmethod
    def create(model_id: str, source: str) -> "ApiSession":
        model = parse_model(source)
        system = lower(model)
        return ApiSession(model_id=model_id, source=source, model=model,
                          system=system, solver=Solver(system))

    def sweep(self, lo: int, hi: int, step: int = 1) -> Sweep:
        key = (lo, hi, step)
        with self.lock:
            if key not in self.sweeps:
                self.sweeps[key] = run_sweep(self.system, lo, hi, step,
                                             solver=self.solver)
            return self.sweeps[key]

    def default_sweep(self) -> Sweep:
        return self.sweep(*DEFAULT_HORIZON)


def _error(status: int, message: str, span=None) -> JSONResponse:
    body = {"error": message}
    if span:
        body["span"] = list(span)
    return JSONResponse(body, status_code=status)


def create_app(sources: dict[str, str]) -> FastAPI:
    app = FastAPI(title="roadmap-dsl", version="0.1.0",
                  description="Solve and explore time-dependent technology "
                              "roadmap models.")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    sessions: dict[str, ApiSession] = {
        model_id: ApiSession.create(model_id, source)
        for model_id, source in sources.items()
    }

    def session_of(model_id: str) -> ApiSession | JSONResponse:
        session = sessions.get(model_id)
        if session is None:
            return _error(404, f"unknown model {model_id!r}")
        return session

    def month_param(text: Optional[str], name: str, default: Optional[int]):
        if text is None:
            if default is None:
                raise ValueError(f"query parameter {name!r} is required")
            return default
        try:
            return parse_iso_month(text)
        except (ValueError, IndexError):
            raise ValueError(f"{name} must look like YYYY-MM, got {text!r}")

    @app.get("/api/models")
    def list_models():
        return {"models": sorted(sessions)}

    @app.get("/api/models/{model_id}")
    def get_model(model_id: str):
        session = session_of(model_id)
        if isinstance(session, JSONResponse):
            return session
        return model_json(session.model, session.source)

    @app.get("/api/models/{model_id}/solve")
    def get_solve(model_id: str, t: Optional[str] = None):
        session = session_of(model_id)
        if isinstance(session, JSONResponse):
            return session
        try:
            month = month_param(t, "t", None)
        except ValueError as err:
            return _error(400, str(err))
        ctx = session.default_sweep() \
            if DEFAULT_FROM <= month <= DEFAULT_TO else None
        result = session.solver.at(month)
        return solve_json(session.system, result, month, sweep_ctx=ctx)

    @app.get("/api/models/{model_id}/sweep")
    def get_sweep(model_id: str,
                  from_: Optional[str] = Query(None, alias="from"),
                  to: Optional[str] = None,
                  step: int = 1):
        session = session_of(model_id)
        if isinstance(session, JSONResponse):
            return session
        try:
            lo = month_param(from_, "from", DEFAULT_FROM)
            hi = month_param(to, "to", DEFAULT_TO)
        except ValueError as err:
            return _error(400, str(err))
        if lo > hi:
            return _error(400, "'from' must not be after 'to'")
        if step < 1:
            return _error(400, "'step' must be at least 1")
        sw = session.sweep(lo, hi, step)
        return sweep_json(session.system, sw)

    @app.get("/api/models/{model_id}/trace")
    def get_trace(model_id: str, ref: Optional[str] = None,
                  t: Optional[str] = None):
        session = session_of(model_id)
        if isinstance(session, JSONResponse):
            return session
        if ref is None:
            return _error(400, "query parameter 'ref' is required")
        try:
            month = month_param(t, "t", None)
        except ValueError as err:
            return _error(400, str(err))
        try:
            reference = session.system.reference(ref)
        except KeyError:
            return _error(404, f"unknown reference {ref!r}")
        ctx = session.default_sweep() \
            if DEFAULT_FROM < month <= DEFAULT_TO else None
        result = session.solver.at(month)
        return trace_json(session.system, result, reference, month,
                          sweep_ctx=ctx)

    @app.put("/api/models/{model_id}/source")
    async def put_source(model_id: str, request: Request):
        if model_id not in sessions:
            return _error(404, f"unknown model {model_id!r}")
        raw = await request.body()
        text = raw.decode("utf-8", errors="replace")
        if request.headers.get("content-type", "").startswith("application/json"):
            import json
            try:
                payload = json.loads(text)
                text = payload["source"]
            except (ValueError, TypeError, KeyError):
                return _error(400, "JSON body must be {\"source\": \"...\"}")
        try:
            replacement = ApiSession.create(model_id, text)
        except RoadmapError as err:
            return _error(422, err.message, err.span)
        sessions[model_id] = replacement  # atomic swap
        return {"ok": True, "model": model_id}

    _mount_ui(app)
    return app


def _mount_ui(app: FastAPI) -> None:
    """Serve the built browser UI when its static assets are present."""
    import pathlib

    from fastapi.staticfiles import StaticFiles

    candidates = [
        pathlib.Path(__file__).resolve().parents[2] / "frontend" / "dist",
        pathlib.Path.cwd() / "frontend" / "dist",
    ]
    for dist in candidates:
        if (dist / "index.html").exists():
            app.mount("/", StaticFiles(directory=str(dist), html=True),
                      name="ui")
            return
