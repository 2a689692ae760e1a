"""FastAPI application wrapping the engine.

All state lives in an in-process ``AppState``: a single graph guarded by a
lock (the engine is fast enough that coarse locking is fine at this scale).
Engine errors surface as JSON bodies with a machine-readable code.
"""

from __future__ import annotations

import os
import threading
import time
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional

import httpx
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..decisions import rank_options, record_feedback
from ..errors import (
    DeliveryFailed,
    EngineError,
    NotFound,
    Precondition,
    QuerySyntaxError,
    UnboundVariable,
)
from ..graph import GraphStore, ts_to_text
from ..ingest import ingest_dir
from ..metrics import DEFAULT_SCOPES, compute_metrics, emit_radar_csv
from ..models.simulation import SimulationConfig, simulate_work_orders
from ..ontology import register_default_ontology
from ..pipeline import PipelineConfig, run_pipeline
from ..pql import evaluate, parse, render_value
from ..reasoner import materialize_all
from . import schemas as s

_BAD_REQUEST = (QuerySyntaxError, UnboundVariable, Precondition, ValueError)


class AppState:
    def __init__(self, graph: Optional[GraphStore] = None):
        self.graph = graph if graph is not None else GraphStore()
        self.registry = register_default_ontology()
        self.lock = threading.RLock()
        self.retry_delays = (0.1, 0.2, 0.4)


def _error_response(exc: Exception) -> JSONResponse:
    code = getattr(exc, "code", "engine.error")
    if isinstance(exc, NotFound):
        status = 404
    elif isinstance(exc, _BAD_REQUEST):
        status = 400
        if isinstance(exc, ValueError):
            code = "request.invalid"
    elif isinstance(exc, DeliveryFailed):
        status = 502
    else:
        status = 500
    return JSONResponse(status_code=status,
                        content={"code": code, "message": str(exc)})


def _insight_out(graph, node) -> s.InsightOut:
    refers = [other.properties["uuid"]
              for _, other in graph.neighbors(node.id, "out", "REFERS_TO")]
    return s.InsightOut(
        uuid=node.properties["uuid"],
        kind=node.properties.get("kind", ""),
        date=ts_to_text(node.properties["date"]),
        severity=node.properties["severity"],
        description=node.properties.get("description", ""),
        refers_to=refers,
    )


def create_app(state: Optional[AppState] = None) -> FastAPI:
    if state is None:
        state = AppState()
        snapshot = os.environ.get("ACT_SNAPSHOT")
        if snapshot and Path(snapshot).exists():
            state.graph = GraphStore.snapshot_load(Path(snapshot))

    app = FastAPI(title="act engine", version=__version__)
    app.state.engine = state

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        return _error_response(exc)

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return _error_response(exc)

    @app.get("/api/v1/health", response_model=s.HealthResponse)
    def health():
        with state.lock:
            return s.HealthResponse(
                status="ok",
                nodes=sum(1 for _ in state.graph.nodes()),
                edges=sum(1 for _ in state.graph.edges()),
                version=__version__,
            )

    @app.post("/api/v1/ingest", response_model=s.IngestResponse)
    def ingest(body: s.IngestRequest):
        path = Path(body.data_dir)
        if not path.is_dir():
            raise NotFound(f"no such data directory: {body.data_dir}")
        with state.lock:
            report = ingest_dir(path, state.graph, state.registry)
        return s.IngestResponse(
            nodes_created=report.nodes_created,
            nodes_updated=report.nodes_updated,
            edges_created=report.edges_created,
            rejects=[f"{src}:{line}: {reason}"
                     for src, line, reason in report.rejects],
        )

    @app.post("/api/v1/reason", response_model=s.ReasonResponse)
    def reason():
        with state.lock:
            report = materialize_all(state.graph)
        return s.ReasonResponse(rounds=report.rounds,
                                edges_created=report.edges_created)

    @app.post("/api/v1/query", response_model=s.QueryResponse)
    def query(body: s.QueryRequest):
        parsed = parse(body.text)
        with state.lock:
            rows = evaluate(parsed, state.graph)
            rendered = [[render_value(v, state.graph) for v in row]
                        for row in rows]
        columns = [item.to_text() for item in parsed.return_items]
        return s.QueryResponse(columns=columns, rows=rendered)

    @app.post("/api/v1/simulate", response_model=s.SimulateResponse)
    def simulate(body: s.SimulateRequest):
        with state.lock:
            forecasts = simulate_work_orders(
                state.graph, SimulationConfig(body.n_trials, body.rng_seed))
        return s.SimulateResponse(forecasts=[
            {
                "work_order_uuid": fc.work_order_uuid,
                "trials": fc.trial_count,
                "low_confidence": fc.low_confidence,
                "quantiles": {f"p{int(round(p * 100))}": ts_to_text(ts)
                              for p, ts in fc.completion_quantiles.items()},
            }
            for fc in forecasts
        ])

    @app.post("/api/v1/pipeline", response_model=s.PipelineResponse)
    def pipeline(body: s.PipelineRequest):
        now = None
        if body.now:
            now = datetime.fromisoformat(body.now)
            if now.tzinfo is None:
                now = now.replace(tzinfo=timezone.utc)
        config = PipelineConfig(
            data_dir=Path(body.data_dir) if body.data_dir else None,
            now=now, n_trials=body.n_trials, rng_seed=body.rng_seed)
        with state.lock:
            run = run_pipeline(state.graph, config, state.registry)
        return s.PipelineResponse(
            ok=run.ok,
            steps=[s.PipelineStepOut(name=st.name, seconds=st.seconds,
                                     counts=st.counts)
                   for st in run.steps],
            failed_step=run.failed_step,
            error=run.error,
        )

    @app.get("/api/v1/usecases", response_model=list[s.UseCaseOut])
    def usecases():
        with state.lock:
            return [
                s.UseCaseOut(uuid=n.properties["uuid"],
                             description=n.properties.get("description", ""))
                for n in state.graph.nodes_by_label("UseCase")
            ]

    @app.get("/api/v1/forecasts", response_model=list[s.ForecastOut])
    def forecasts(use_case: Optional[str] = None):
        graph = state.graph
        with state.lock:
            out = []
            for node in graph.nodes_by_label("Forecast"):
                if use_case is not None:
                    linked = {uc.properties["uuid"] for _, uc
                              in graph.neighbors(node.id, "out", "RELATES_TO")}
                    if use_case not in linked:
                        continue
                model = ""
                for _, m in graph.neighbors(node.id, "out", "FORECASTED_FROM"):
                    model = m.properties["uuid"]
                props = {k: (ts_to_text(v) if isinstance(v, datetime) else v)
                         for k, v in node.properties.items()}
                out.append(s.ForecastOut(
                    uuid=node.properties["uuid"], model_uuid=model,
                    kind=node.properties.get("kind", ""), properties=props))
        return out

    @app.get("/api/v1/insights", response_model=list[s.InsightOut])
    def insights(since: Optional[str] = None):
        cutoff = None
        if since:
            cutoff = datetime.fromisoformat(since)
            if cutoff.tzinfo is None:
                cutoff = cutoff.replace(tzinfo=timezone.utc)
        with state.lock:
            nodes = state.graph.nodes_by_label("Insight")
            out = [_insight_out(state.graph, n) for n in nodes
                   if cutoff is None or n.properties["date"] >= cutoff]
        out.sort(key=lambda i: (-i.severity, i.date, i.uuid))
        return out

    @app.get("/api/v1/insights/{insight_uuid}/options",
             response_model=list[s.OptionOut])
    def insight_options(insight_uuid: str):
        with state.lock:
            rows = rank_options(state.graph, insight_uuid)
        return [s.OptionOut(**row) for row in rows]

    @app.post("/api/v1/feedback", response_model=s.FeedbackResponse)
    def feedback(body: s.FeedbackRequest):
        with state.lock:
            result = record_feedback(
                state.graph, body.insight_uuid, body.verdict, body.user,
                option_uuid=body.option_uuid,
                alternative_text=body.alternative_text)
        return s.FeedbackResponse(**result)

    @app.get("/api/v1/metrics", response_model=s.MetricsResponse)
    def metrics(sample_fraction: float = 1.0, seed: int = 0):
        with state.lock:
            results = [compute_metrics(state.graph, scope, sample_fraction, seed)
                       for scope in DEFAULT_SCOPES]
        return s.MetricsResponse(
            scopes=[s.MetricsOut(**vars(m)) for m in results],
            csv=emit_radar_csv(results),
        )

    @app.post("/api/v1/actuate", response_model=s.ActuateResponse)
    def actuate(body: s.ActuateRequest):
        with state.lock:
            graph = state.graph
            insight = graph.node_by_key("Insight", "uuid", body.insight_uuid)
            if insight is None:
                raise NotFound(f"no insight with uuid {body.insight_uuid!r}")
            option = graph.node_by_key("DecisionMakingOption", "uuid",
                                       body.option_uuid)
            if option is None:
                raise NotFound(
                    f"no decision-making option with uuid {body.option_uuid!r}")
            accepted = any(
                fb.properties.get("verdict") == "accepted"
                and graph.has_edge("FEEDBACK_FOR", fb.id, insight.id)
                for _, fb in graph.neighbors(option.id, "in", "FEEDBACK_ON"))
            if not accepted:
                raise Precondition(
                    "option must have accepted feedback for this insight "
                    "before actuation")
            payload = {
                "insight_uuid": body.insight_uuid,
                "option_uuid": body.option_uuid,
                "description": option.properties.get("description", ""),
            }
        attempts = 0
        for delay in (*state.retry_delays, None):
            attempts += 1
            try:
                response = httpx.post(body.webhook_url, json=payload,
                                      timeout=5.0)
                if response.status_code < 400:
                    return s.ActuateResponse(delivered=True, attempts=attempts)
            except httpx.HTTPError:
                pass
            if delay is None:
                break
            time.sleep(delay)
        raise DeliveryFailed(
            f"webhook not delivered after {attempts} attempts", attempts)

    @app.post("/api/v1/snapshot", response_model=s.SnapshotResponse)
    def snapshot(body: s.SnapshotRequest):
        path = Path(body.path)
        with state.lock:
            state.graph.snapshot_save(path)
            nodes = sum(1 for _ in state.graph.nodes())
            edges = sum(1 for _ in state.graph.edges())
        return s.SnapshotResponse(path=str(path), nodes=nodes, edges=edges)

    ui_dir = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True),
                  name="ui")

    return app
