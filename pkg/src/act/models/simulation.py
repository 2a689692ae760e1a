"""Monte Carlo completion-time simulation for scheduled work orders.

Step durations are resampled from the empirical pool of historical batch
durations for the step's (line, process kind); orders sharing a line
queue FIFO by due date. Per-trial RNG streams are derived from
(seed, trial index), so trials are independent and a parallel run would
reproduce the serial result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from math import ceil
from typing import Optional

import numpy as np

from ..errors import SimulationDataError
from ..graph import GraphStore, Provenance
from ..ingest import ForecastRecord

SIM_MODEL_UUID = "sim-model-1"
PP_USE_CASE_UUID = "uc-pp"


@dataclass(frozen=True)
class SimulationConfig:
    n_trials: int = 10_000
    rng_seed: int = 7
    quantiles: tuple = (0.1, 0.5, 0.9)

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if not all(0 < q < 1 for q in self.quantiles) or list(self.quantiles) != sorted(
            set(self.quantiles)
        ):
            raise ValueError("quantiles must be strictly increasing within (0,1)")


@dataclass
class SimulationForecast:
    work_order_uuid: str
    completion_quantiles: dict  # probability -> datetime, non-decreasing
    trial_count: int
    model_uuid: str
    low_confidence: bool = False


def _hours(dt: datetime) -> float:
    return dt.timestamp() / 3600.0


def _from_hours(hours: float) -> datetime:
    return datetime.fromtimestamp(hours * 3600.0, tz=timezone.utc)


def nearest_rank(sorted_values, p: float):
    """Nearest-rank quantile on an ascending sequence."""
    idx = max(ceil(p * len(sorted_values)), 1) - 1
    return sorted_values[idx]


def duration_pools(graph: GraphStore) -> dict:
    """(line uuid, process kind) -> list of historical step durations (h)."""
    pools: dict = {}
    for batch in graph.nodes_by_label("ManufacturedBatch"):
        props = batch.properties
        if "duration_hours" not in props:
            continue
        key = (props.get("line_uuid"), props.get("process_kind"))
        pools.setdefault(key, []).append(float(props["duration_hours"]))
    return pools


@dataclass
class _Job:
    work_order_uuid: str
    start_hours: float
    due_hours: float
    step_pools: list  # np arrays of candidate durations
    low_confidence: bool


def _scheduled_jobs(graph: GraphStore) -> dict:
    """line uuid -> jobs in FIFO order (due date, then uuid)."""
    pools = duration_pools(graph)
    plant_pool = [d for durations in pools.values() for d in durations]
    if not plant_pool:
        raise SimulationDataError("no historical batch durations anywhere in the graph")
    plant_pool = np.asarray(sorted(plant_pool))

    by_line: dict = {}
    for order in graph.nodes_by_label("WorkOrder"):
        if order.properties.get("status") != "scheduled":
            continue
        line_uuid = order.properties.get("line_uuid")
        start = order.properties.get("due_ts")
        for edge, shift in graph.neighbors(order.id, "out", "DURING_SHIFT"):
            start = shift.properties.get("start_ts", start)
        steps = sorted(
            graph.neighbors(order.id, "out", "EXECUTES"),
            key=lambda pair: pair[0].properties.get("step_index", 0),
        )
        step_pools = []
        low_confidence = False
        for _, proc in steps:
            pool = pools.get((line_uuid, proc.properties.get("process_kind")))
            if not pool:
                pool = plant_pool
                low_confidence = True
            step_pools.append(np.asarray(sorted(pool)))
        if not step_pools:
            continue
        job = _Job(order.properties["uuid"], _hours(start),
                   _hours(order.properties["due_ts"]), step_pools, low_confidence)
        by_line.setdefault(line_uuid, []).append(job)
    for jobs in by_line.values():
        jobs.sort(key=lambda j: (j.due_hours, j.work_order_uuid))
    return by_line


def simulate_work_orders(
    graph: GraphStore, config: SimulationConfig
) -> list[SimulationForecast]:
    by_line = _scheduled_jobs(graph)
    all_jobs = [job for jobs in by_line.values() for job in jobs]
    if not all_jobs:
        return []
    completions = {job.work_order_uuid: np.empty(config.n_trials) for job in all_jobs}
    children = np.random.SeedSequence(config.rng_seed).spawn(config.n_trials)
    for trial in range(config.n_trials):
        rng = np.random.Generator(np.random.PCG64(children[trial]))
        for jobs in by_line.values():
            cursor = -np.inf
            for job in jobs:
                cursor = max(cursor, job.start_hours)
                for pool in job.step_pools:
                    cursor += pool[rng.integers(len(pool))]
                completions[job.work_order_uuid][trial] = cursor
    out = []
    for job in sorted(all_jobs, key=lambda j: j.work_order_uuid):
        values = np.sort(completions[job.work_order_uuid])
        quantile_map = {
            p: _from_hours(float(nearest_rank(values, p))) for p in config.quantiles
        }
        out.append(SimulationForecast(job.work_order_uuid, quantile_map,
                                      config.n_trials, SIM_MODEL_UUID,
                                      job.low_confidence))
    return out


def forecast_records(forecasts: list[SimulationForecast]) -> list[ForecastRecord]:
    records = []
    for fc in forecasts:
        props = {
            "kind": "completion",
            "work_order_uuid": fc.work_order_uuid,
            "trials": fc.trial_count,
            "low_confidence": fc.low_confidence,
        }
        for p, ts in fc.completion_quantiles.items():
            props[f"p{int(round(p * 100))}"] = ts
        records.append(ForecastRecord(
            uuid=f"fc-sim-{fc.work_order_uuid}",
            model_uuid=fc.model_uuid,
            props=props,
            links=(("FORECAST_OF", "WorkOrder", fc.work_order_uuid),),
        ))
    return records


def ensure_simulation_model(graph: GraphStore, when: Optional[datetime] = None) -> int:
    """Upsert the Production Planning use case and its simulation model."""
    prov = Provenance.at("definitional", "model-registry", when)
    uc = graph.node_by_key("UseCase", "uuid", PP_USE_CASE_UUID)
    uc_id = uc.id if uc else graph.add_node(
        "UseCase", {"uuid": PP_USE_CASE_UUID, "description": "Production Planning"}, prov)
    model = graph.node_by_key("SimulationModel", "uuid", SIM_MODEL_UUID)
    if model is None:
        model_id = graph.add_node(
            "SimulationModel",
            {"uuid": SIM_MODEL_UUID, "name": "work-order completion simulator",
             "trained_at": when if when else datetime.now(timezone.utc)},
            prov)
    else:
        model_id = model.id
    if not graph.has_edge("CORRESPONDS_TO", model_id, uc_id):
        graph.add_edge("CORRESPONDS_TO", model_id, uc_id, {}, prov)
    return model_id
