"""Inductive models: Monte Carlo completion simulation and demand regression."""

from .demand import (
    DF_USE_CASE_UUID,
    demand_as_of,
    ensure_regression_models,
    run_demand_forecasting,
    traded_pairs,
)
from .regression import (
    DatasetSpecRecord,
    DemandForecast,
    DemandSeries,
    RegressionParams,
    build_dataset,
    daily_series,
    feature_names,
    fit_regression,
    forecast_demand,
    live_features,
)
from .simulation import (
    PP_USE_CASE_UUID,
    SIM_MODEL_UUID,
    SimulationConfig,
    SimulationForecast,
    duration_pools,
    ensure_simulation_model,
    forecast_records,
    nearest_rank,
    simulate_work_orders,
)

__all__ = [
    "DF_USE_CASE_UUID",
    "DatasetSpecRecord",
    "DemandForecast",
    "DemandSeries",
    "PP_USE_CASE_UUID",
    "RegressionParams",
    "SIM_MODEL_UUID",
    "SimulationConfig",
    "SimulationForecast",
    "build_dataset",
    "daily_series",
    "demand_as_of",
    "duration_pools",
    "ensure_regression_models",
    "ensure_simulation_model",
    "feature_names",
    "fit_regression",
    "forecast_demand",
    "forecast_records",
    "live_features",
    "nearest_rank",
    "run_demand_forecasting",
    "simulate_work_orders",
    "traded_pairs",
]
