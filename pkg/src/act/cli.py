"""Command-line interface.

Two modes share one command set: with ``--server URL`` each command is a
thin client over the HTTP API; without it, commands operate on a local
snapshot file (``--snapshot``, default ``act.snapshot``), loading it,
applying the operation, and writing it back.
"""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import click
import httpx
import uvicorn

from .decisions import rank_options, record_feedback
from .errors import EngineError
from .graph import GraphStore, ts_to_text
from .ingest import ingest_dir
from .metrics import DEFAULT_SCOPES, compute_metrics, emit_radar_csv
from .models.simulation import SimulationConfig, simulate_work_orders
from .ontology import register_default_ontology
from .pipeline import PipelineConfig, run_pipeline
from .pql import evaluate, parse, render_value
from .reasoner import materialize_all
from .synth import ScenarioSpec, generate_scenario


class Context:
    def __init__(self, server: str | None, snapshot: Path):
        self.server = server.rstrip("/") if server else None
        self.snapshot = snapshot

    def load(self) -> GraphStore:
        if self.snapshot.exists():
            return GraphStore.snapshot_load(self.snapshot)
        return GraphStore()

    def save(self, graph: GraphStore) -> None:
        graph.snapshot_save(self.snapshot)

    def post(self, path: str, payload: dict) -> dict:
        response = httpx.post(f"{self.server}/api/v1{path}", json=payload,
                              timeout=120.0)
        return self._unwrap(response)

    def get(self, path: str, params: dict | None = None) -> dict | list:
        response = httpx.get(f"{self.server}/api/v1{path}", params=params,
                             timeout=120.0)
        return self._unwrap(response)

    @staticmethod
    def _unwrap(response: httpx.Response):
        body = response.json()
        if response.status_code >= 400:
            code = body.get("code", "http.error")
            raise click.ClickException(f"[{code}] {body.get('message', '')}")
        return body


pass_context = click.make_pass_decorator(Context)


def _emit(data) -> None:
    click.echo(json.dumps(data, indent=2, sort_keys=True, default=str))


@click.group()
@click.option("--server", envvar="ACT_SERVER", default=None,
              help="Operate against a running server instead of a local snapshot.")
@click.option("--snapshot", envvar="ACT_SNAPSHOT", default="act.snapshot",
              type=click.Path(path_type=Path), show_default=True,
              help="Local snapshot file used when no server is given.")
@click.pass_context
def main(ctx, server, snapshot):
    """Actionable cognitive twin engine."""
    ctx.obj = Context(server, snapshot)


def _engine_errors(fn):
    """Render engine errors as clean CLI failures."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EngineError as exc:
            raise click.ClickException(f"[{exc.code}] {exc}")

    return wrapper


@main.command()
@click.argument("out_dir", type=click.Path(path_type=Path))
@click.option("--seed", default=42, show_default=True)
@click.option("--horizon-days", default=28, show_default=True)
def synth(out_dir, seed, horizon_days):
    """Write a deterministic synthetic scenario as CSV files."""
    files = generate_scenario(
        ScenarioSpec(seed=seed, horizon_days=horizon_days), out_dir)
    click.echo(f"wrote {len(files)} files to {out_dir}")


@main.command()
@click.argument("data_dir", type=click.Path(exists=True, path_type=Path))
@pass_context
@_engine_errors
def ingest(ctx, data_dir):
    """Ingest a directory of CSV files."""
    if ctx.server:
        _emit(ctx.post("/ingest", {"data_dir": str(data_dir)}))
        return
    graph = ctx.load()
    report = ingest_dir(data_dir, graph, register_default_ontology())
    ctx.save(graph)
    _emit({"nodes_created": report.nodes_created,
           "nodes_updated": report.nodes_updated,
           "edges_created": report.edges_created,
           "rejects": [f"{s}:{line}: {why}" for s, line, why in report.rejects]})


@main.command()
@click.argument("text", required=False)
@click.option("--file", "query_file", type=click.Path(exists=True, path_type=Path),
              help="Read the query from a file instead of the argument.")
@click.option("--format", "fmt", type=click.Choice(["table", "ndjson"]),
              default="table", show_default=True)
@pass_context
@_engine_errors
def query(ctx, text, query_file, fmt):
    """Evaluate a pattern query and print the result rows."""
    if query_file is not None:
        text = Path(query_file).read_text()
    if not text:
        raise click.UsageError("provide a query or --file")
    if ctx.server:
        body = ctx.post("/query", {"text": text})
        columns, rows = body["columns"], body["rows"]
    else:
        graph = ctx.load()
        parsed = parse(text)
        columns = [item.to_text() for item in parsed.return_items]
        rows = [[render_value(v, graph) for v in row]
                for row in evaluate(parsed, graph)]
    if fmt == "ndjson":
        for row in rows:
            click.echo(json.dumps(dict(zip(columns, row)), sort_keys=True))
    else:
        click.echo("\t".join(columns))
        for row in rows:
            click.echo("\t".join(json.dumps(v, sort_keys=True) for v in row))


@main.command()
@pass_context
@_engine_errors
def reason(ctx):
    """Materialize rule-derived edges to a fixpoint."""
    if ctx.server:
        _emit(ctx.post("/reason", {}))
        return
    graph = ctx.load()
    report = materialize_all(graph)
    ctx.save(graph)
    _emit({"rounds": report.rounds, "edges_created": report.edges_created})


@main.command()
@click.option("--trials", default=2000, show_default=True)
@click.option("--seed", default=7, show_default=True)
@pass_context
@_engine_errors
def simulate(ctx, trials, seed):
    """Simulate completion times for scheduled work orders."""
    if ctx.server:
        _emit(ctx.post("/simulate", {"n_trials": trials, "rng_seed": seed}))
        return
    graph = ctx.load()
    forecasts = simulate_work_orders(graph, SimulationConfig(trials, seed))
    _emit([{
        "work_order_uuid": fc.work_order_uuid,
        "low_confidence": fc.low_confidence,
        "quantiles": {f"p{int(round(p * 100))}": ts_to_text(v)
                      for p, v in fc.completion_quantiles.items()},
    } for fc in forecasts])


@main.command()
@click.option("--data-dir", type=click.Path(path_type=Path), default=None,
              help="CSV directory to ingest as the first step.")
@click.option("--now", default=None, help="Pin the pipeline clock (ISO 8601).")
@click.option("--trials", default=2000, show_default=True)
@click.option("--seed", default=7, show_default=True)
@pass_context
@_engine_errors
def pipeline(ctx, data_dir, now, trials, seed):
    """Run ingest, reasoning, models, and insight detection end to end."""
    if ctx.server:
        _emit(ctx.post("/pipeline", {
            "data_dir": str(data_dir) if data_dir else None,
            "now": now, "n_trials": trials, "rng_seed": seed}))
        return
    parsed_now = None
    if now:
        parsed_now = datetime.fromisoformat(now)
        if parsed_now.tzinfo is None:
            parsed_now = parsed_now.replace(tzinfo=timezone.utc)
    graph = ctx.load()
    run = run_pipeline(graph, PipelineConfig(
        data_dir=data_dir, now=parsed_now, n_trials=trials, rng_seed=seed))
    ctx.save(graph)
    _emit({"ok": run.ok, "failed_step": run.failed_step, "error": run.error,
           "steps": [{"name": s.name, "seconds": round(s.seconds, 3),
                      "counts": s.counts} for s in run.steps]})
    if not run.ok:
        sys.exit(1)


@main.command()
@click.option("--since", default=None, help="Only insights on/after this date.")
@pass_context
@_engine_errors
def insights(ctx, since):
    """List detected insights, most severe first."""
    if ctx.server:
        _emit(ctx.get("/insights", {"since": since} if since else None))
        return
    graph = ctx.load()
    cutoff = None
    if since:
        cutoff = datetime.fromisoformat(since)
        if cutoff.tzinfo is None:
            cutoff = cutoff.replace(tzinfo=timezone.utc)
    rows = []
    for node in graph.nodes_by_label("Insight"):
        if cutoff is not None and node.properties["date"] < cutoff:
            continue
        rows.append({
            "uuid": node.properties["uuid"],
            "kind": node.properties.get("kind", ""),
            "date": ts_to_text(node.properties["date"]),
            "severity": node.properties["severity"],
            "description": node.properties.get("description", ""),
        })
    rows.sort(key=lambda r: (-r["severity"], r["date"], r["uuid"]))
    _emit(rows)


@main.command()
@click.argument("insight_uuid")
@pass_context
@_engine_errors
def options(ctx, insight_uuid):
    """List ranked decision-making options for an insight."""
    if ctx.server:
        _emit(ctx.get(f"/insights/{insight_uuid}/options"))
        return
    _emit(rank_options(ctx.load(), insight_uuid))


@main.command()
@click.argument("insight_uuid")
@click.argument("verdict", type=click.Choice(["accepted", "rejected", "alternative"]))
@click.option("--option", "option_uuid", default=None)
@click.option("--user", required=True)
@click.option("--text", "alternative_text", default=None,
              help="Description of the alternative action.")
@pass_context
@_engine_errors
def feedback(ctx, insight_uuid, verdict, option_uuid, user, alternative_text):
    """Record feedback on a suggested option."""
    if ctx.server:
        _emit(ctx.post("/feedback", {
            "insight_uuid": insight_uuid, "verdict": verdict, "user": user,
            "option_uuid": option_uuid, "alternative_text": alternative_text}))
        return
    graph = ctx.load()
    result = record_feedback(graph, insight_uuid, verdict, user,
                             option_uuid=option_uuid,
                             alternative_text=alternative_text)
    ctx.save(graph)
    _emit(result)


@main.command()
@click.option("--sample-fraction", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--csv", "as_csv", is_flag=True, help="Emit the radar CSV.")
@pass_context
@_engine_errors
def metrics(ctx, sample_fraction, seed, as_csv):
    """Path-length metrics per use-case scope."""
    if ctx.server:
        body = ctx.get("/metrics", {"sample_fraction": sample_fraction,
                                    "seed": seed})
        click.echo(body["csv"] if as_csv else json.dumps(body["scopes"], indent=2))
        return
    graph = ctx.load()
    results = [compute_metrics(graph, scope, sample_fraction, seed)
               for scope in DEFAULT_SCOPES]
    if as_csv:
        click.echo(emit_radar_csv(results), nl=False)
    else:
        _emit([vars(m) for m in results])


@main.command()
@click.argument("insight_uuid")
@click.argument("option_uuid")
@click.argument("webhook_url")
@pass_context
@_engine_errors
def actuate(ctx, insight_uuid, option_uuid, webhook_url):
    """Deliver an accepted option to an external webhook (server mode only)."""
    if not ctx.server:
        raise click.UsageError("actuate requires --server")
    _emit(ctx.post("/actuate", {"insight_uuid": insight_uuid,
                                "option_uuid": option_uuid,
                                "webhook_url": webhook_url}))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", envvar="ACT_PORT", default=8000, show_default=True)
@pass_context
def serve(ctx, host, port):
    """Run the HTTP service (loads ACT_SNAPSHOT if set)."""
    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
