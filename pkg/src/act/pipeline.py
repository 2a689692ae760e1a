"""End-to-end pipeline: ingest, reason, run models, detect insights.

Each step records its duration and counts.  A failure stops the run but
keeps everything persisted so far, naming the failed step.  Re-running the
pipeline on the same data is idempotent: forecasts are keyed by uuid and
insights by (kind, refs, day).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional

from .decisions import detect_insights, match_options
from .graph import GraphStore
from .ingest import ingest_dir, load_forecasts
from .models.demand import run_demand_forecasting
from .models.simulation import (
    SimulationConfig,
    ensure_simulation_model,
    forecast_records,
    simulate_work_orders,
)
from .ontology import OntologyRegistry, register_default_ontology
from .reasoner import materialize_all


@dataclass
class PipelineConfig:
    data_dir: Optional[Path] = None
    now: Optional[datetime] = None
    n_trials: int = 2000
    rng_seed: int = 7
    horizons: int = 7
    lag_count: int = 7
    l2: float = 0.5
    stale_after_days: int = 90


@dataclass
class StepResult:
    name: str
    seconds: float
    counts: dict = field(default_factory=dict)


@dataclass
class PipelineRun:
    steps: list = field(default_factory=list)
    failed_step: Optional[str] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failed_step is None


def run_pipeline(graph: GraphStore, config: PipelineConfig,
                 registry: Optional[OntologyRegistry] = None) -> PipelineRun:
    if registry is None:
        registry = register_default_ontology()
    now = config.now if config.now is not None else datetime.now(timezone.utc)
    if now.tzinfo is None:
        now = now.replace(tzinfo=timezone.utc)
    run = PipelineRun()

    def step(name, fn):
        start = time.perf_counter()
        try:
            counts = fn()
        except Exception as exc:  # persist partial progress, name the step
            run.failed_step = name
            run.error = f"{type(exc).__name__}: {exc}"
            run.steps.append(StepResult(name, time.perf_counter() - start))
            return False
        run.steps.append(StepResult(name, time.perf_counter() - start,
                                    counts or {}))
        return True

    def do_ingest():
        if config.data_dir is None:
            return {"skipped": 1}
        report = ingest_dir(config.data_dir, graph, registry, when=now)
        return {"nodes_created": report.nodes_created,
                "nodes_updated": report.nodes_updated,
                "edges_created": report.edges_created,
                "rejects": len(report.rejects)}

    def do_reason():
        report = materialize_all(graph, when=now)
        return {"rounds": report.rounds, "edges_created": report.total_edges}

    def do_models():
        ensure_simulation_model(graph, when=now)
        sim = simulate_work_orders(
            graph, SimulationConfig(config.n_trials, config.rng_seed))
        records = forecast_records(sim)
        records += run_demand_forecasting(
            graph, config.lag_count, config.horizons, config.l2, when=now)
        report = load_forecasts(records, graph, when=now)
        return {"simulated_orders": len(sim),
                "forecasts": len(records),
                "nodes_created": report.nodes_created,
                "rejects": len(report.rejects)}

    def do_insights():
        # forecasts created in the models step need their use-case links
        materialize_all(graph, when=now)
        report = detect_insights(
            graph, now, timedelta(days=config.stale_after_days), when=now)
        suggested = match_options(graph, when=now)
        return {"insights_created": len(report.created),
                "insights_existing": len(report.existing),
                "suggestions": suggested}

    for name, fn in (("ingest", do_ingest), ("reason", do_reason),
                     ("models", do_models), ("insights", do_insights)):
        if not step(name, fn):
            break
    return run
