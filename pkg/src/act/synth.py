"""Deterministic synthetic plant-data generator.

Stands in for the ERP/MES feeds: emits one CSV per source record kind into
an output directory. Same spec -> byte-identical files.

Two situations are scripted so the decision heuristics have something to
find: the staffed shift on the second production line is missing one
assigned person while its order book overruns the shift (organizational
downtime), and the first client's demand for the first material triples
over the final week of history (demand spike, exactly 3x the flat base so
the detector's severity is reproducible).

Well-known identifiers (a production line ``0a1e``, a second line and its
shift with fixed long uuids) are embedded so the canonical query fixtures
resolve against any generated scenario.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

LINE_1_UUID = "0a1e"
LINE_2_UUID = "93216b15b0b74712bcb62c0397da394e"
SHIFT_1_UUID = "dab85031f7414e15b6917b7d83d884e5"

HISTORY_END = datetime(2019, 6, 30, tzinfo=timezone.utc)  # last demand day
PRODUCTION_DAY = datetime(2019, 10, 1, tzinfo=timezone.utc)  # scheduled orders
BASE_DEMAND = 4
SPIKE_FACTOR = 3
SPIKE_DAYS = 7
PROCESS_KINDS = ("mold", "assemble", "pack")

OPTION_CATALOG = (
    ("opt-1", "update the production schedule", "organizational_downtime",
     "Production Planning"),
    ("opt-2", "add an additional shift", "organizational_downtime",
     "Production Planning"),
    ("opt-3", "raise stock order", "stockout_risk", "Demand Forecasting"),
    ("opt-4", "add work order", "stockout_risk", "Demand Forecasting"),
    ("opt-5", "notify logistics planner of demand spike", "demand_spike",
     "Demand Forecasting"),
    ("opt-6", "schedule additional production capacity", "demand_spike",
     "Demand Forecasting"),
    ("opt-7", "retrain forecasting model", "stale_model", "*"),
)


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 42
    n_lines: int = 2
    n_persons: int = 4
    n_materials: int = 2
    n_clients: int = 2
    horizon_days: int = 28  # demand history span in days
    daily_order_rate: int = 2

    def __post_init__(self):
        for name in ("n_lines", "n_persons", "n_materials", "n_clients",
                     "horizon_days", "daily_order_rate"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def _ts(dt: datetime) -> str:
    return dt.strftime("%Y-%m-%dT%H:%M:%S")


def _date(dt: datetime) -> str:
    return dt.strftime("%Y-%m-%d")


def _poisson(rng: random.Random, lam: float) -> int:
    if lam <= 0:
        return 0
    # Knuth's method; lam stays tiny here
    limit = 2.718281828459045 ** (-lam)
    k, product = 0, 1.0
    while True:
        product *= rng.random()
        if product <= limit:
            return k
        k += 1


def generate_scenario(spec: ScenarioSpec, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(spec.seed)
    files = []

    def emit(name: str, header: list[str], rows: list[list]):
        path = out_dir / f"{name}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        files.append(path)

    emit("organization", ["uuid", "name"], [["org-1", "Plant Operator"]])
    emit("plant", ["uuid", "name", "organization_uuid"],
         [["plant-1", "Plant 1", "org-1"]])
    emit("shop_floor", ["uuid", "name", "plant_uuid"],
         [["floor-1", "Floor A", "plant-1"]])

    line_uuids = []
    for i in range(spec.n_lines):
        if i == 0:
            line_uuids.append(LINE_1_UUID)
        elif i == 1:
            line_uuids.append(LINE_2_UUID)
        else:
            line_uuids.append(f"line-{i + 1}")
    emit("production_line", ["uuid", "name", "shop_floor_uuid", "plant_uuid"],
         [[u, f"Line {i + 1}", "floor-1", "plant-1"] for i, u in enumerate(line_uuids)])

    # the scripted downtime happens on the second line when there is one
    downtime_line = 1 if spec.n_lines >= 2 else 0

    person_line: dict[str, int] = {}
    person_rows = []
    for i in range(spec.n_persons):
        uuid = f"person-{i + 1}"
        line_idx = i % spec.n_lines
        person_line[uuid] = line_idx
        person_rows.append([uuid, f"Worker {i + 1}", "plant-1", line_uuids[line_idx]])
    if downtime_line not in person_line.values():
        person_line["person-1"] = downtime_line
        person_rows[0][3] = line_uuids[downtime_line]
    emit("person", ["uuid", "name", "plant_uuid", "line_uuid"], person_rows)

    shift_rows = []
    shift_uuid_by_line = {}
    for i, line_uuid in enumerate(line_uuids):
        uuid = SHIFT_1_UUID if i == downtime_line else f"shift-{i + 1}"
        crew = sorted(p for p, li in person_line.items() if li == i)
        absent = crew[0] if i == downtime_line and crew else ""
        shift_uuid_by_line[i] = uuid
        shift_rows.append([
            uuid, line_uuid,
            _ts(PRODUCTION_DAY.replace(hour=8)), _ts(PRODUCTION_DAY.replace(hour=16)),
            ";".join(crew), absent,
        ])
    emit("shift", ["uuid", "line_uuid", "start_ts", "end_ts",
                   "person_uuids", "absent_person_uuids"], shift_rows)

    emit("stock_location", ["uuid", "name"], [["loc-1", "Warehouse 1"]])
    emit("material", ["uuid", "name", "stock_qty", "stock_location_uuid"],
         [[f"m-{i + 1}", f"Material {i + 1}", 40 if i == 0 else 200, "loc-1"]
          for i in range(spec.n_materials)])
    emit("client", ["uuid", "name"],
         [[f"c-{i + 1}", f"Client {i + 1}"] for i in range(spec.n_clients)])

    # -- work orders: completed history feeds the simulator's duration pool,
    #    scheduled orders on the production day overrun the downtime shift.
    wo_rows = []
    counter = 0
    for i, line_uuid in enumerate(line_uuids):
        for j in range(8):
            counter += 1
            day = HISTORY_END - timedelta(days=3 * j + 2)
            n_steps = rng.randint(1, 3)
            steps = list(PROCESS_KINDS[:n_steps])
            if i == downtime_line:
                durations = [2.0] * n_steps
            else:
                durations = [round(rng.uniform(1.5, 2.5), 2) for _ in steps]
            wo_rows.append([
                f"wo-hist-{counter}", f"m-{(j % spec.n_materials) + 1}", line_uuid,
                "", 5 + rng.randint(0, 10), _ts(day.replace(hour=16)),
                "completed", ";".join(steps),
                ";".join(str(d) for d in durations),
            ])
    for i, line_uuid in enumerate(line_uuids):
        n_orders = 5 if i == downtime_line else 3
        for j in range(n_orders):
            counter += 1
            if i == downtime_line:
                material, steps = "m-1", ["mold", "assemble"]
            else:
                material = f"m-{rng.randint(1, spec.n_materials)}"
                steps = list(PROCESS_KINDS[: rng.randint(1, 2)])
            wo_rows.append([
                f"wo-sched-{counter}", material, line_uuid,
                shift_uuid_by_line[i], 10, _ts(PRODUCTION_DAY.replace(hour=16)),
                "scheduled", ";".join(steps), "",
            ])
    emit("work_order",
         ["uuid", "material_uuid", "line_uuid", "shift_uuid", "qty",
          "due_ts", "status", "steps", "step_durations_h"], wo_rows)

    emit("stock_order", ["uuid", "material_uuid", "qty", "order_ts"],
         [[f"so-{i + 1}", f"m-{i + 1}", 100,
           _ts((HISTORY_END - timedelta(days=20)).replace(hour=9))]
          for i in range(spec.n_materials)])

    # -- shipping orders: scripted flat series for (m-1, c-1) with the spike,
    #    plus background orders at the requested daily rate.
    ship_rows = []
    history_start = HISTORY_END - timedelta(days=spec.horizon_days - 1)
    spike_days = SPIKE_DAYS if spec.horizon_days >= 2 * SPIKE_DAYS else 1
    spike_start = HISTORY_END - timedelta(days=spike_days - 1)
    other_pairs = [
        (f"m-{m + 1}", f"c-{c + 1}")
        for m in range(spec.n_materials)
        for c in range(spec.n_clients)
        if not (m == 0 and c == 0)
    ]
    counter = 0
    for offset in range(spec.horizon_days):
        day = history_start + timedelta(days=offset)
        counter += 1
        qty = BASE_DEMAND * (SPIKE_FACTOR if day >= spike_start else 1)
        ship_rows.append([f"ship-{counter}", "m-1", "c-1", qty, _date(day)])
        extra = _poisson(rng, spec.daily_order_rate - 1)
        for _ in range(extra):
            counter += 1
            material, client = (
                other_pairs[rng.randrange(len(other_pairs))]
                if other_pairs else ("m-1", "c-1")
            )
            ship_rows.append([f"ship-{counter}", material, client,
                              rng.randint(1, 8), _date(day)])
    emit("shipping_order",
         ["uuid", "material_uuid", "client_uuid", "qty", "ship_date"], ship_rows)

    ts_rows = []
    for i, line_uuid in enumerate(line_uuids):
        for week in range(max(1, spec.horizon_days // 7)):
            day = history_start + timedelta(days=7 * week)
            ts_rows.append([f"ts-throughput-{line_uuid}", "erp-1", "throughput",
                            _ts(day.replace(hour=23)), round(rng.uniform(80, 120), 1)])
    emit("timeseries_point",
         ["uuid", "datasource_uuid", "metric", "ts", "value"], ts_rows)

    emit("decision_option_catalog",
         ["uuid", "description", "applicable_kinds", "use_case"],
         [list(row) for row in OPTION_CATALOG])
    return files
