"""Demand-forecasting run: per-horizon models over every traded pair.

Creates the model registry entries (regression models per horizon with
their algorithm / dataset / specification / provenance chain and the
Demand Forecasting use case), fits one ridge model per horizon on each
(material, client) series with enough history, and returns the forecasts
as records ready for inductive loading.
"""

from __future__ import annotations

from datetime import date, datetime, time, timedelta, timezone
from typing import Optional

from ..errors import DatasetTooSmall, FeatureUnavailable
from ..graph import GraphStore, Provenance
from ..ingest import ForecastRecord
from .regression import (
    DatasetSpecRecord,
    DemandForecast,
    build_dataset,
    daily_series,
    fit_regression,
    forecast_demand,
)

DF_USE_CASE_UUID = "uc-df"


def _day_ts(day: date) -> datetime:
    return datetime.combine(day, time(0, 0), tzinfo=timezone.utc)


def ensure_regression_models(
    graph: GraphStore, as_of: date, horizons: int, when: Optional[datetime] = None
) -> None:
    """Upsert the Demand Forecasting use case and one model node per horizon
    with its algorithm / dataset / specification / provenance chain."""
    prov = Provenance.at("definitional", "model-registry", when)

    def upsert(label, uuid, props):
        node = graph.node_by_key(label, "uuid", uuid)
        if node is not None:
            changed = {k: v for k, v in props.items() if node.properties.get(k) != v}
            if changed:
                graph.set_node_properties(node.id, changed)
            return node.id
        return graph.add_node(label, {"uuid": uuid, **props}, prov)

    def link(relation, src, dst):
        if not graph.has_edge(relation, src, dst):
            graph.add_edge(relation, src, dst, {}, prov)

    uc = upsert("UseCase", DF_USE_CASE_UUID, {"description": "Demand Forecasting"})
    algo = upsert("RegressionAlgorithm", "algo-ridge",
                  {"name": "ridge regression with lag features"})
    info = upsert("InformationProvenance", "prov-shipping",
                  {"description": "shipping orders from the ERP export"})
    ds_spec = upsert("DatasetSpecification", "dsspec-demand",
                     {"description": "daily demand aggregated per material and client"})
    dataset = upsert("Dataset", "ds-demand", {"name": "daily demand history"})
    link("SOURCED_FROM", ds_spec, info)
    link("SPECIFIED_BY", dataset, ds_spec)
    trained = when if when is not None else datetime.now(timezone.utc)
    for h in range(1, horizons + 1):
        model = upsert("RegressionModel", f"reg-model-h{h}", {
            "horizon_days": h,
            "target_date": _day_ts(as_of + timedelta(days=h - 1)),
            "trained_at": trained,
        })
        link("CORRESPONDS_TO", model, uc)
        link("TRAINED_ON", model, dataset)
        link("USES_ALGORITHM", model, algo)


def traded_pairs(graph: GraphStore) -> list[tuple[str, str]]:
    pairs = set()
    for order in graph.nodes_by_label("ShippingOrder"):
        material = client = None
        for edge, node in graph.neighbors(order.id, "out"):
            if edge.relation == "OF_MATERIAL":
                material = node.properties.get("uuid")
            elif edge.relation == "SHIPS_TO":
                client = node.properties.get("uuid")
        if material and client:
            pairs.add((material, client))
    return sorted(pairs)


def demand_as_of(graph: GraphStore) -> Optional[date]:
    """The first unobserved day: day after the latest shipping order."""
    last = None
    for order in graph.nodes_by_label("ShippingOrder"):
        day = order.properties["ship_date"].date()
        last = day if last is None or day > last else last
    return last + timedelta(days=1) if last is not None else None


def run_demand_forecasting(
    graph: GraphStore,
    lag_count: int = 7,
    horizons: int = 7,
    l2: float = 0.5,
    when: Optional[datetime] = None,
) -> list[ForecastRecord]:
    as_of = demand_as_of(graph)
    if as_of is None:
        return []
    ensure_regression_models(graph, as_of, horizons, when)
    records: list[ForecastRecord] = []
    for material_uuid, client_uuid in traded_pairs(graph):
        params_by_horizon = {}
        spec = None
        for h in range(1, horizons + 1):
            spec = DatasetSpecRecord(material_uuid, client_uuid, lag_count, h,
                                     provenance_uuid="prov-shipping")
            try:
                params_by_horizon[h] = fit_regression(build_dataset(graph, spec), l2)
            except DatasetTooSmall:
                break
        if not params_by_horizon:
            continue
        try:
            forecasts = forecast_demand(params_by_horizon, graph, spec, as_of)
        except FeatureUnavailable:
            continue
        records.extend(demand_forecast_records(forecasts, lag_count))
    return records


def demand_forecast_records(
    forecasts: list[DemandForecast], lag_count: int
) -> list[ForecastRecord]:
    records = []
    for fc in forecasts:
        key = f"{fc.material_uuid}-{fc.client_uuid}-{fc.target_date.isoformat()}"
        fv_props = {
            f"lag_{i}": float(fc.features[i - 1]) for i in range(1, lag_count + 1)
        }
        records.append(ForecastRecord(
            uuid=f"fc-dem-{key}",
            model_uuid=fc.model_uuid,
            props={
                "kind": "demand",
                "material_uuid": fc.material_uuid,
                "client_uuid": fc.client_uuid,
                "target_date": _day_ts(fc.target_date),
                "value": float(fc.value),
                "clamped": fc.clamped,
            },
            links=(("FORECAST_OF", "Material", fc.material_uuid),
                   ("FOR_CLIENT", "Client", fc.client_uuid)),
            feature_vector=(f"fv-{key}", fv_props),
        ))
    return records
