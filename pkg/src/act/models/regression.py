"""Lag-feature dataset construction and ridge regression for daily demand.

The daily series for a (material, client) pair is aggregated from shipping
orders with empty days zero-filled. A row for day t carries the previous
``lag_count`` demands plus a day-of-week one-hot, with the demand at
t + horizon - 1 as target. Fitting minimizes squared error plus an L2
penalty on the weights (intercept unpenalized) in closed form via the
normal equations and a Cholesky factorization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import Optional

import numpy as np

from ..errors import DatasetTooSmall, FeatureUnavailable, SingularDesign
from ..graph import GraphStore

DOW_NAMES = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")


@dataclass(frozen=True)
class DatasetSpecRecord:
    material_uuid: str
    client_uuid: str
    lag_count: int = 7
    horizon_days: int = 1
    provenance_uuid: Optional[str] = None
    calendar_features: bool = True

    def __post_init__(self):
        if self.lag_count < 1 or self.horizon_days < 1:
            raise ValueError("lag_count and horizon_days must be >= 1")


@dataclass
class DemandSeries:
    start: date
    values: np.ndarray  # one entry per day, zero-filled

    def index_of(self, day: date) -> int:
        return (day - self.start).days

    def day_at(self, index: int) -> date:
        return self.start + timedelta(days=index)


def daily_series(graph: GraphStore, material_uuid: str, client_uuid: str) -> DemandSeries:
    """Aggregate shipping-order quantities into a zero-filled daily series."""
    material = graph.node_by_key("Material", "uuid", material_uuid)
    client = graph.node_by_key("Client", "uuid", client_uuid)
    totals: dict[date, int] = {}
    if material is not None and client is not None:
        for edge, order in graph.neighbors(material.id, "in", "OF_MATERIAL"):
            if order.label != "ShippingOrder":
                continue
            if not graph.has_edge("SHIPS_TO", order.id, client.id):
                continue
            day = order.properties["ship_date"].date()
            totals[day] = totals.get(day, 0) + int(order.properties.get("qty", 0))
    if not totals:
        return DemandSeries(date(1970, 1, 1), np.zeros(0))
    start, end = min(totals), max(totals)
    values = np.zeros((end - start).days + 1)
    for day, qty in totals.items():
        values[(day - start).days] = qty
    return DemandSeries(start, values)


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    target_days: list[date]
    spec: DatasetSpecRecord
    series: DemandSeries


def feature_names(spec: DatasetSpecRecord) -> list[str]:
    names = [f"lag_{i}" for i in range(1, spec.lag_count + 1)]
    if spec.calendar_features:
        names += [f"dow_{name}" for name in DOW_NAMES]
    return names


def _row_features(series: DemandSeries, t: int, spec: DatasetSpecRecord) -> np.ndarray:
    lags = [series.values[t - i] for i in range(1, spec.lag_count + 1)]
    if spec.calendar_features:
        dow = np.zeros(7)
        dow[series.day_at(t).weekday()] = 1.0
        return np.concatenate([lags, dow])
    return np.asarray(lags, dtype=float)


def build_dataset(graph: GraphStore, spec: DatasetSpecRecord) -> Dataset:
    series = daily_series(graph, spec.material_uuid, spec.client_uuid)
    required = spec.lag_count + spec.horizon_days
    if len(series.values) < required:
        raise DatasetTooSmall(required, len(series.values))
    rows, targets, days = [], [], []
    for t in range(spec.lag_count, len(series.values) - spec.horizon_days + 1):
        rows.append(_row_features(series, t, spec))
        targets.append(series.values[t + spec.horizon_days - 1])
        days.append(series.day_at(t + spec.horizon_days - 1))
    return Dataset(np.asarray(rows), np.asarray(targets), feature_names(spec),
                   days, spec, series)


@dataclass
class RegressionParams:
    weights: np.ndarray
    intercept: float
    l2: float
    feature_names: list[str]

    def predict(self, features: np.ndarray) -> float:
        return float(features @ self.weights + self.intercept)


def fit_regression(dataset: Dataset, l2: float = 0.0) -> RegressionParams:
    """Closed-form ridge via the normal equations (intercept unpenalized)."""
    X, y = dataset.X, dataset.y
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError("dataset must have at least one row and one feature")
    n, k = X.shape
    A = np.hstack([X, np.ones((n, 1))])
    gram = A.T @ A
    penalty = np.zeros(k + 1)
    penalty[:k] = l2
    gram = gram + np.diag(penalty)
    rhs = A.T @ y
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise SingularDesign(
            "normal equations are singular; refit with l2 > 0"
        ) from None
    coeffs = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
    return RegressionParams(coeffs[:k], float(coeffs[k]), l2, list(dataset.feature_names))


@dataclass
class DemandForecast:
    material_uuid: str
    client_uuid: str
    target_date: date
    value: float  # clamped at zero
    model_uuid: str
    features: np.ndarray
    clamped: bool = False


def live_features(series: DemandSeries, as_of: date, spec: DatasetSpecRecord) -> np.ndarray:
    """Feature vector for forecasting from `as_of`; equals the dataset row
    built for the same day when that day is in the historical span."""
    t = series.index_of(as_of)
    if t < spec.lag_count or t > len(series.values):
        raise FeatureUnavailable(
            f"need {spec.lag_count} days of history before {as_of}"
        )
    lags = []
    for i in range(1, spec.lag_count + 1):
        idx = t - i
        if idx < 0 or idx >= len(series.values):
            raise FeatureUnavailable(f"no demand recorded for {series.day_at(idx)}")
        lags.append(series.values[idx])
    if spec.calendar_features:
        dow = np.zeros(7)
        dow[as_of.weekday()] = 1.0
        return np.concatenate([lags, dow])
    return np.asarray(lags, dtype=float)


def forecast_demand(
    params_by_horizon: dict[int, RegressionParams],
    graph: GraphStore,
    spec: DatasetSpecRecord,
    as_of: date,
) -> list[DemandForecast]:
    """One forecast per requested horizon day, clamped at zero."""
    series = daily_series(graph, spec.material_uuid, spec.client_uuid)
    features = live_features(series, as_of, spec)
    out = []
    for horizon in sorted(params_by_horizon):
        params = params_by_horizon[horizon]
        raw = params.predict(features)
        clamped = raw < 0
        out.append(DemandForecast(
            material_uuid=spec.material_uuid,
            client_uuid=spec.client_uuid,
            target_date=as_of + timedelta(days=horizon - 1),
            value=0.0 if clamped else raw,
            model_uuid=f"reg-model-h{horizon}",
            features=features,
            clamped=clamped,
        ))
    return out
