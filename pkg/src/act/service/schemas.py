"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    nodes: int
    edges: int
    version: str


class ErrorBody(BaseModel):
    code: str
    message: str


class IngestRequest(BaseModel):
    data_dir: str


class IngestResponse(BaseModel):
    nodes_created: int
    nodes_updated: int
    edges_created: int
    rejects: list[str]


class ReasonResponse(BaseModel):
    rounds: int
    edges_created: dict[str, int]


class QueryRequest(BaseModel):
    text: str


class QueryResponse(BaseModel):
    columns: list[str]
    rows: list[list[Any]]


class SimulateRequest(BaseModel):
    n_trials: int = 2000
    rng_seed: int = 7


class SimulateResponse(BaseModel):
    forecasts: list[dict[str, Any]]


class ForecastRequest(BaseModel):
    material_uuid: str
    client_uuid: str
    horizons: int = Field(default=7, ge=1)
    lag_count: int = Field(default=7, ge=1)
    l2: float = 0.5


class ForecastOut(BaseModel):
    uuid: str
    model_uuid: str
    kind: str
    properties: dict[str, Any]


class PipelineRequest(BaseModel):
    data_dir: Optional[str] = None
    now: Optional[str] = None
    n_trials: int = 2000
    rng_seed: int = 7


class PipelineStepOut(BaseModel):
    name: str
    seconds: float
    counts: dict[str, int]


class PipelineResponse(BaseModel):
    ok: bool
    steps: list[PipelineStepOut]
    failed_step: Optional[str] = None
    error: Optional[str] = None


class UseCaseOut(BaseModel):
    uuid: str
    description: str


class InsightOut(BaseModel):
    uuid: str
    kind: str
    date: str
    severity: float
    description: str
    refers_to: list[str]


class OptionOut(BaseModel):
    option_uuid: str
    description: str
    accepted: int
    rejected: int
    score: float
    creative: bool


class FeedbackRequest(BaseModel):
    insight_uuid: str
    verdict: str
    user: str
    option_uuid: Optional[str] = None
    alternative_text: Optional[str] = None


class FeedbackResponse(BaseModel):
    feedback_uuid: str
    option_uuid: str
    verdict: str


class MetricsOut(BaseModel):
    scope: str
    n_nodes: int
    n_relationships: int
    mpl: int
    tpl: int
    apl: float
    sample_fraction: float
    seed: int


class MetricsResponse(BaseModel):
    scopes: list[MetricsOut]
    csv: str


class ActuateRequest(BaseModel):
    insight_uuid: str
    option_uuid: str
    webhook_url: str


class ActuateResponse(BaseModel):
    delivered: bool
    attempts: int


class SnapshotRequest(BaseModel):
    path: str


class SnapshotResponse(BaseModel):
    path: str
    nodes: int
    edges: int
