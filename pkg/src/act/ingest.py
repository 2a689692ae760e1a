"""Virtual mapping procedures: CSV source files -> graph instances.

Each source kind has a mapping spec (column schema, node label, property
types, foreign-key edges) in ``KIND_SPECS``; a few kinds add extra emit
logic for multi-entity rows (work orders emit process steps and produced
batches, shifts emit person assignments). Ingestion upserts by the
``uuid`` natural key, so re-running the same file is a no-op. Bad rows are
rejected with their line number and never abort the file.

All ingested entities carry definitional provenance (source = file path);
``load_forecasts`` is the one inductive entry point (source = model uuid).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from .graph import GraphStore, Node, Provenance
from .ontology import OntologyRegistry, validate_node


@dataclass
class IngestReport:
    nodes_created: int = 0
    nodes_updated: int = 0
    edges_created: int = 0
    rejects: list = field(default_factory=list)  # (line number, reason)

    def merge(self, other: "IngestReport"):
        self.nodes_created += other.nodes_created
        self.nodes_updated += other.nodes_updated
        self.edges_created += other.edges_created
        self.rejects.extend(other.rejects)
        return self


def parse_ts(text: str) -> datetime:
    """Accept ``YYYY-MM-DD`` or ``YYYY-MM-DDTHH:MM:SS`` (UTC)."""
    for fmt in ("%Y-%m-%dT%H:%M:%S", "%Y-%m-%d"):
        try:
            return datetime.strptime(text, fmt).replace(tzinfo=timezone.utc)
        except ValueError:
            continue
    raise ValueError(f"malformed timestamp {text!r}")


_CASTS: dict[str, Callable] = {
    "text": str,
    "int": int,
    "float": float,
    "timestamp": parse_ts,
}


@dataclass(frozen=True)
class FkEdge:
    relation: str
    column: str
    target_label: str
    optional: bool = False


@dataclass(frozen=True)
class MappingSpec:
    label: str
    columns: tuple  # (name, cast kind) in header order
    edges: tuple = ()  # FkEdge
    skip_props: tuple = ()  # columns kept out of the node property map
    extra: Optional[str] = None  # name of a registered extra-emit hook


KIND_SPECS: dict[str, MappingSpec] = {
    "organization": MappingSpec("Organization", (("uuid", "text"), ("name", "text"))),
    "plant": MappingSpec(
        "ProductionPlant",
        (("uuid", "text"), ("name", "text"), ("organization_uuid", "text")),
        (FkEdge("PART_OF", "organization_uuid", "Organization"),),
        skip_props=("organization_uuid",),
    ),
    "shop_floor": MappingSpec(
        "ShopFloor",
        (("uuid", "text"), ("name", "text"), ("plant_uuid", "text")),
        (FkEdge("PART_OF", "plant_uuid", "ProductionPlant"),),
        skip_props=("plant_uuid",),
    ),
    "production_line": MappingSpec(
        "ProductionLine",
        (("uuid", "text"), ("name", "text"), ("shop_floor_uuid", "text"),
         ("plant_uuid", "text")),
        (FkEdge("BELONGS_TO", "plant_uuid", "ProductionPlant"),),
        skip_props=("shop_floor_uuid", "plant_uuid"),
    ),
    "person": MappingSpec(
        "Person",
        (("uuid", "text"), ("name", "text"), ("plant_uuid", "text"),
         ("line_uuid", "text")),
        (FkEdge("ASSIGNED_TO", "line_uuid", "ProductionLine"),),
        skip_props=("plant_uuid", "line_uuid"),
    ),
    "shift": MappingSpec(
        "Shift",
        (("uuid", "text"), ("line_uuid", "text"), ("start_ts", "timestamp"),
         ("end_ts", "timestamp"), ("person_uuids", "text"),
         ("absent_person_uuids", "text")),
        (FkEdge("EXECUTED_ON", "line_uuid", "ProductionLine"),),
        skip_props=("line_uuid", "person_uuids"),
        extra="shift_assignments",
    ),
    "stock_location": MappingSpec(
        "StockLocation", (("uuid", "text"), ("name", "text"))),
    "material": MappingSpec(
        "Material",
        (("uuid", "text"), ("name", "text"), ("stock_qty", "int"),
         ("stock_location_uuid", "text")),
        (FkEdge("STORED_AT", "stock_location_uuid", "StockLocation"),),
        skip_props=("stock_location_uuid",),
    ),
    "client": MappingSpec("Client", (("uuid", "text"), ("name", "text"))),
    "work_order": MappingSpec(
        "WorkOrder",
        (("uuid", "text"), ("material_uuid", "text"), ("line_uuid", "text"),
         ("shift_uuid", "text"), ("qty", "int"), ("due_ts", "timestamp"),
         ("status", "text"), ("steps", "text"), ("step_durations_h", "text")),
        (FkEdge("OF_MATERIAL", "material_uuid", "Material"),
         FkEdge("SCHEDULED_ON", "line_uuid", "ProductionLine"),
         FkEdge("DURING_SHIFT", "shift_uuid", "Shift", optional=True)),
        skip_props=("material_uuid", "shift_uuid"),
        extra="work_order_steps",
    ),
    "stock_order": MappingSpec(
        "StockOrder",
        (("uuid", "text"), ("material_uuid", "text"), ("qty", "int"),
         ("order_ts", "timestamp")),
        (FkEdge("OF_MATERIAL", "material_uuid", "Material"),),
        skip_props=("material_uuid",),
    ),
    "shipping_order": MappingSpec(
        "ShippingOrder",
        (("uuid", "text"), ("material_uuid", "text"), ("client_uuid", "text"),
         ("qty", "int"), ("ship_date", "timestamp")),
        (FkEdge("OF_MATERIAL", "material_uuid", "Material"),
         FkEdge("SHIPS_TO", "client_uuid", "Client")),
        skip_props=("material_uuid", "client_uuid"),
    ),
    "timeseries_point": MappingSpec(
        "TimeSeries",
        (("uuid", "text"), ("datasource_uuid", "text"), ("metric", "text"),
         ("ts", "timestamp"), ("value", "float")),
        skip_props=("datasource_uuid", "ts", "value"),
        extra="timeseries_point",
    ),
    "decision_option_catalog": MappingSpec(
        "DecisionMakingOption",
        (("uuid", "text"), ("description", "text"), ("applicable_kinds", "text"),
         ("use_case", "text"))),
}

SOURCE_RECORD_KINDS = tuple(KIND_SPECS)


class _Loader:
    def __init__(self, graph: GraphStore, registry: OntologyRegistry,
                 provenance: Provenance, report: IngestReport):
        self.graph = graph
        self.registry = registry
        self.prov = provenance
        self.report = report

    def upsert_node(self, label: str, props: dict) -> int:
        existing = self.graph.node_by_key(label, "uuid", props["uuid"])
        if existing is None:
            probe = Node(-1, label, dict(props), self.prov)
            violations = validate_node(probe, self.registry)
            if violations:
                raise ValueError("; ".join(str(v) for v in violations))
            node_id = self.graph.add_node(label, props, self.prov)
            self.report.nodes_created += 1
            return node_id
        changed = {k: v for k, v in props.items() if existing.properties.get(k) != v}
        if changed:
            self.graph.set_node_properties(existing.id, changed)
            self.report.nodes_updated += 1
        return existing.id

    def upsert_edge(self, relation: str, src: int, dst: int, props: dict | None = None):
        if not self.graph.has_edge(relation, src, dst):
            self.graph.add_edge(relation, src, dst, props or {}, self.prov)
            self.report.edges_created += 1

    def resolve(self, label: str, uuid: str) -> int:
        node = self.graph.node_by_key(label, "uuid", uuid)
        if node is None:
            raise ValueError(f"unknown {label} uuid {uuid!r}")
        return node.id


def _emit_shift_assignments(loader: _Loader, row: dict, node_id: int):
    for person_uuid in _split(row["person_uuids"]):
        loader.upsert_edge("ASSIGNED_TO", loader.resolve("Person", person_uuid), node_id)


def _emit_work_order_steps(loader: _Loader, row: dict, node_id: int):
    steps = _split(row["steps"])
    durations = _split(row["step_durations_h"])
    if row["status"] == "completed" and len(durations) != len(steps):
        raise ValueError("completed work order must carry one duration per step")
    for idx, step in enumerate(steps):
        proc_uuid = f"proc-{row['line_uuid']}-{step}"
        proc_id = loader.upsert_node("ManufacturingProcess",
                                     {"uuid": proc_uuid, "process_kind": step})
        loader.upsert_edge("EXECUTES", node_id, proc_id, {"step_index": idx})
        if row["status"] == "completed":
            batch_uuid = f"batch-{row['uuid']}-{idx}"
            batch_id = loader.upsert_node("ManufacturedBatch", {
                "uuid": batch_uuid,
                "process_kind": step,
                "line_uuid": row["line_uuid"],
                "duration_hours": float(durations[idx]),
            })
            loader.upsert_edge("PRODUCES", node_id, batch_id)
            loader.upsert_edge("OF_MATERIAL", batch_id,
                               loader.resolve("Material", row["material_uuid"]))


def _emit_timeseries_point(loader: _Loader, row: dict, node_id: int):
    ds_id = loader.upsert_node("DataSource", {"uuid": row["datasource_uuid"]})
    loader.upsert_edge("OBSERVED_AT", node_id, ds_id)
    series = loader.graph.node(node_id)
    ts = parse_ts(row["ts"])
    n_points = int(series.properties.get("n_points", 0)) + 1
    updates = {"n_points": n_points, "last_ts": ts, "last_value": float(row["value"])}
    if "first_ts" not in series.properties:
        updates["first_ts"] = ts
    loader.graph.set_node_properties(node_id, updates)


_EXTRA_EMITTERS = {
    "shift_assignments": _emit_shift_assignments,
    "work_order_steps": _emit_work_order_steps,
    "timeseries_point": _emit_timeseries_point,
}


def _split(cell: str) -> list[str]:
    return [part for part in cell.split(";") if part]


def ingest_file(
    path,
    kind: str,
    graph: GraphStore,
    registry: OntologyRegistry,
    when: Optional[datetime] = None,
) -> IngestReport:
    """Load one CSV source file; returns per-file counts and rejects."""
    spec = KIND_SPECS.get(kind)
    if spec is None:
        raise ValueError(f"unknown source record kind {kind!r}")
    report = IngestReport()
    prov = Provenance.at("definitional", str(path), when)
    loader = _Loader(graph, registry, prov, report)
    expected = [name for name, _ in spec.columns]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            report.rejects.append((1, "empty file"))
            return report
        if header != expected:
            report.rejects.append((1, f"bad header: expected {expected}, got {header}"))
            return report
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            try:
                _load_row(loader, spec, expected, cells)
            except (ValueError, KeyError) as exc:
                report.rejects.append((lineno, str(exc)))
    return report


def _load_row(loader: _Loader, spec: MappingSpec, expected: list[str], cells: list[str]):
    if len(cells) != len(expected):
        raise ValueError(f"expected {len(expected)} columns, got {len(cells)}")
    row = dict(zip(expected, cells))
    props = {}
    for name, kind in spec.columns:
        if name in spec.skip_props:
            continue
        props[name] = _CASTS[kind](row[name])
    # resolve all foreign keys before creating anything: rejects stay atomic
    edge_targets = []
    for fk in spec.edges:
        value = row[fk.column]
        if not value:
            if fk.optional:
                continue
            raise ValueError(f"missing foreign key {fk.column}")
        edge_targets.append((fk.relation, loader.resolve(fk.target_label, value)))
    node_id = loader.upsert_node(spec.label, props)
    for relation, target in edge_targets:
        loader.upsert_edge(relation, node_id, target)
    if spec.extra:
        _EXTRA_EMITTERS[spec.extra](loader, row, node_id)


def ingest_dir(
    data_dir,
    graph: GraphStore,
    registry: OntologyRegistry,
    when: Optional[datetime] = None,
) -> IngestReport:
    """Ingest every ``<kind>.csv`` present in a directory, in mapping order
    (reference data before the files that point at it)."""
    data_dir = Path(data_dir)
    report = IngestReport()
    for kind in SOURCE_RECORD_KINDS:
        path = data_dir / f"{kind}.csv"
        if path.exists():
            part = ingest_file(path, kind, graph, registry, when=when)
            rejects = part.rejects
            part.rejects = []
            report.merge(part)
            report.rejects.extend(
                (f"{kind}.csv", lineno, reason) for lineno, reason in rejects)
    return report


# -- inductive loading -----------------------------------------------------


@dataclass
class ForecastRecord:
    """A model output ready to persist: one Forecast node plus its links."""

    uuid: str
    model_uuid: str
    props: dict
    links: tuple = ()  # (relation, target label, target uuid)
    feature_vector: Optional[tuple] = None  # (uuid, props)


def load_forecasts(
    forecasts: list[ForecastRecord],
    graph: GraphStore,
    when: Optional[datetime] = None,
) -> IngestReport:
    """Persist model outputs as Forecast nodes with inductive provenance."""
    report = IngestReport()
    for idx, record in enumerate(forecasts):
        model = None
        for label in ("SimulationModel", "RegressionModel", "Model"):
            model = graph.node_by_key(label, "uuid", record.model_uuid)
            if model is not None:
                break
        if model is None:
            report.rejects.append((idx, f"unknown model uuid {record.model_uuid!r}"))
            continue
        prov = Provenance.at("inductive", record.model_uuid, when)
        loader = _Loader(graph, None, prov, report)
        props = dict(record.props)
        props["uuid"] = record.uuid
        existing = graph.node_by_key("Forecast", "uuid", record.uuid)
        if existing is None:
            node_id = graph.add_node("Forecast", props, prov)
            report.nodes_created += 1
        else:
            node_id = existing.id
            changed = {k: v for k, v in props.items()
                       if existing.properties.get(k) != v}
            if changed:
                graph.set_node_properties(node_id, changed)
                report.nodes_updated += 1
        loader.upsert_edge("FORECASTED_FROM", node_id, model.id)
        try:
            for relation, label, uuid in record.links:
                loader.upsert_edge(relation, node_id, loader.resolve(label, uuid))
        except ValueError as exc:
            report.rejects.append((idx, str(exc)))
            continue
        if record.feature_vector is not None:
            fv_uuid, fv_props = record.feature_vector
            fv = graph.node_by_key("FeatureVector", "uuid", fv_uuid)
            if fv is None:
                fv_id = graph.add_node("FeatureVector",
                                       {"uuid": fv_uuid, **fv_props}, prov)
                report.nodes_created += 1
            else:
                fv_id = fv.id
            loader.upsert_edge("INPUT_OF", fv_id, node_id)
    return report
