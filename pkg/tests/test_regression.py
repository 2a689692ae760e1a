"""Lag-feature datasets and closed-form ridge regression."""

import random
from datetime import date, datetime, timedelta, timezone

import numpy as np
import pytest

from act.errors import DatasetTooSmall, FeatureUnavailable, SingularDesign
from act.graph import GraphStore, Provenance
from act.models.regression import (
    Dataset,
    DatasetSpecRecord,
    DemandSeries,
    build_dataset,
    daily_series,
    feature_names,
    fit_regression,
    forecast_demand,
    live_features,
)

NOW = datetime(2019, 10, 1, 12, 0, tzinfo=timezone.utc)
PROV = Provenance.at("definitional", "test", NOW)


def demand_graph(quantities, start=date(2019, 6, 1)):
    """Shipping orders for (m-1, c-1), one per day with the given qty;
    None leaves the day without an order (zero-filled by aggregation)."""
    g = GraphStore()
    material = g.add_node("Material", {"uuid": "m-1"}, PROV)
    client = g.add_node("Client", {"uuid": "c-1"}, PROV)
    for offset, qty in enumerate(quantities):
        if qty is None:
            continue
        day = start + timedelta(days=offset)
        order = g.add_node("ShippingOrder", {
            "uuid": f"so-{offset}", "qty": int(qty),
            "ship_date": datetime(day.year, day.month, day.day,
                                  tzinfo=timezone.utc),
        }, PROV)
        g.add_edge("OF_MATERIAL", order, material, {}, PROV)
        g.add_edge("SHIPS_TO", order, client, {}, PROV)
    return g


def toy_dataset(X, y, names=None):
    X = np.asarray(X, dtype=float)
    spec = DatasetSpecRecord("m-1", "c-1", lag_count=X.shape[1],
                             calendar_features=False)
    return Dataset(X, np.asarray(y, dtype=float),
                   names or [f"f{i}" for i in range(X.shape[1])],
                   [date(2019, 6, 1)] * len(y), spec,
                   DemandSeries(date(2019, 6, 1), np.zeros(0)))


# -- series and dataset construction ----------------------------------------


def test_daily_series_zero_fills_gaps_and_sums_same_day():
    g = demand_graph([3, None, 5])
    # second order on the first day
    material = g.node_by_key("Material", "uuid", "m-1")
    client = g.node_by_key("Client", "uuid", "c-1")
    extra = g.add_node("ShippingOrder", {
        "uuid": "so-extra", "qty": 2,
        "ship_date": datetime(2019, 6, 1, tzinfo=timezone.utc)}, PROV)
    g.add_edge("OF_MATERIAL", extra, material.id, {}, PROV)
    g.add_edge("SHIPS_TO", extra, client.id, {}, PROV)
    series = daily_series(g, "m-1", "c-1")
    assert series.start == date(2019, 6, 1)
    assert series.values.tolist() == [5.0, 0.0, 5.0]


def test_daily_series_empty_for_unknown_pair():
    g = demand_graph([3])
    assert len(daily_series(g, "m-1", "c-ghost").values) == 0


def test_build_dataset_rows_and_targets():
    g = demand_graph([1, 2, 3, 4, 5])
    spec = DatasetSpecRecord("m-1", "c-1", lag_count=2, horizon_days=2,
                             calendar_features=False)
    ds = build_dataset(g, spec)
    # rows start once two lags exist; target is demand two days out
    assert ds.X.tolist() == [[2.0, 1.0], [3.0, 2.0]]
    assert ds.y.tolist() == [4.0, 5.0]
    assert ds.target_days == [date(2019, 6, 4), date(2019, 6, 5)]
    assert ds.feature_names == ["lag_1", "lag_2"]


def test_calendar_features_one_hot():
    g = demand_graph([1, 2, 3])
    spec = DatasetSpecRecord("m-1", "c-1", lag_count=2, horizon_days=1)
    ds = build_dataset(g, spec)
    assert ds.feature_names == feature_names(spec)
    row = ds.X[0]
    assert row[:2].tolist() == [2.0, 1.0]
    dow = row[2:]
    assert dow.sum() == 1.0
    assert dow[date(2019, 6, 3).weekday()] == 1.0


def test_dataset_too_small():
    g = demand_graph([1, 2, 3])
    with pytest.raises(DatasetTooSmall):
        build_dataset(g, DatasetSpecRecord("m-1", "c-1", lag_count=7))


def test_spec_validation():
    with pytest.raises(ValueError):
        DatasetSpecRecord("m", "c", lag_count=0)
    with pytest.raises(ValueError):
        DatasetSpecRecord("m", "c", horizon_days=0)


# -- fitting -----------------------------------------------------------------


def test_exact_line_recovered_without_penalty():
    # y = 2 x1 - 3 x2 + 5, noiseless: OLS must recover it to 1e-9
    rng = random.Random(1)
    X = [[rng.uniform(0, 10), rng.uniform(0, 10)] for _ in range(20)]
    y = [2 * a - 3 * b + 5 for a, b in X]
    params = fit_regression(toy_dataset(X, y), l2=0.0)
    assert abs(params.weights[0] - 2) < 1e-9
    assert abs(params.weights[1] + 3) < 1e-9
    assert abs(params.intercept - 5) < 1e-9
    assert params.predict(np.array([1.0, 1.0])) == pytest.approx(4.0, abs=1e-9)


def ridge_oracle(X, y, l2):
    """Independent normal-equation solve via lstsq on the augmented system."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    # append sqrt(l2) * I rows for the penalized features (intercept free)
    A = np.hstack([X, np.ones((n, 1))])
    tail = np.hstack([np.sqrt(l2) * np.eye(k), np.zeros((k, 1))])
    coeffs, *_ = np.linalg.lstsq(np.vstack([A, tail]),
                                 np.concatenate([y, np.zeros(k)]), rcond=None)
    return coeffs[:k], coeffs[k]


def test_ridge_matches_independent_oracle():
    rng = random.Random(2)
    for trial in range(10):
        n, k = rng.randrange(8, 25), rng.randrange(1, 5)
        X = [[rng.uniform(-5, 5) for _ in range(k)] for _ in range(n)]
        y = [rng.uniform(-10, 10) for _ in range(n)]
        l2 = rng.choice([0.1, 0.5, 2.0, 10.0])
        params = fit_regression(toy_dataset(X, y), l2=l2)
        weights, intercept = ridge_oracle(X, y, l2)
        scale = max(1.0, float(np.abs(weights).max()))
        assert np.abs(params.weights - weights).max() / scale < 1e-8
        assert abs(params.intercept - intercept) / max(1.0, abs(intercept)) < 1e-8


def test_weight_norm_shrinks_monotonically_in_l2():
    rng = random.Random(3)
    for trial in range(10):
        n, k = rng.randrange(10, 30), rng.randrange(2, 6)
        X = [[rng.uniform(-5, 5) for _ in range(k)] for _ in range(n)]
        y = [rng.uniform(-10, 10) for _ in range(n)]
        ds = toy_dataset(X, y)
        norms = [float(np.linalg.norm(fit_regression(ds, l2=l2).weights))
                 for l2 in (0.01, 0.1, 1.0, 10.0, 100.0)]
        assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))


def test_singular_design_without_penalty():
    # duplicated column: the gram matrix is singular at l2 = 0
    X = [[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]
    y = [1.0, 2.0, 3.0]
    with pytest.raises(SingularDesign):
        fit_regression(toy_dataset(X, y), l2=0.0)
    params = fit_regression(toy_dataset(X, y), l2=0.5)  # regularized is fine
    assert np.isfinite(params.weights).all()


# -- forecasting --------------------------------------------------------------


def test_live_features_match_dataset_row():
    g = demand_graph([1, 2, 3, 4, 5, 6])
    spec = DatasetSpecRecord("m-1", "c-1", lag_count=3, horizon_days=1)
    ds = build_dataset(g, spec)
    series = daily_series(g, "m-1", "c-1")
    # the dataset row targeting 2019-06-04 was built from the same day index
    got = live_features(series, date(2019, 6, 4), spec)
    assert got.tolist() == ds.X[0].tolist()


def test_live_features_need_enough_history():
    g = demand_graph([1, 2])
    series = daily_series(g, "m-1", "c-1")
    spec = DatasetSpecRecord("m-1", "c-1", lag_count=3)
    with pytest.raises(FeatureUnavailable):
        live_features(series, date(2019, 6, 3), spec)


def test_forecast_demand_clamps_at_zero():
    g = demand_graph([5, 5, 5, 5, 5, 5])
    spec = DatasetSpecRecord("m-1", "c-1", lag_count=2,
                             calendar_features=False)
    negative = toy_dataset([[1.0, 1.0]], [0.0])
    params = fit_regression(negative, l2=1.0)
    params.weights = np.array([-10.0, -10.0])
    params.intercept = 0.0
    out = forecast_demand({1: params, 3: params}, g, spec, date(2019, 6, 7))
    assert [fc.target_date for fc in out] == [date(2019, 6, 7),
                                              date(2019, 6, 9)]
    for fc in out:
        assert fc.value == 0.0
        assert fc.clamped is True
    assert out[0].model_uuid == "reg-model-h1"
    assert out[1].model_uuid == "reg-model-h3"


def test_flat_history_forecasts_the_flat_level():
    g = demand_graph([4] * 20)
    spec = DatasetSpecRecord("m-1", "c-1", lag_count=7,
                             calendar_features=False)
    params = fit_regression(build_dataset(g, spec), l2=0.5)
    (fc,) = forecast_demand({1: params}, g, spec, date(2019, 6, 21))
    assert fc.value == pytest.approx(4.0, abs=0.05)
    assert fc.clamped is False
