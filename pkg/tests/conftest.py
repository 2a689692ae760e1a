from datetime import datetime, timezone
from pathlib import Path

import pytest

from act.graph import GraphStore
from act.ontology import register_default_ontology
from act.pipeline import PipelineConfig, run_pipeline
from act.synth import ScenarioSpec, generate_scenario

PIPELINE_NOW = datetime(2019, 10, 1, 12, 0, tzinfo=timezone.utc)


@pytest.fixture(scope="session")
def registry():
    return register_default_ontology()


@pytest.fixture(scope="session")
def scenario_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("scenario")
    generate_scenario(ScenarioSpec(), out)
    return out


@pytest.fixture(scope="session")
def seeded_graph(scenario_dir, registry) -> GraphStore:
    """The seed scenario run through the full pipeline (shared, read-only)."""
    graph = GraphStore()
    run = run_pipeline(
        graph,
        PipelineConfig(data_dir=scenario_dir, now=PIPELINE_NOW, n_trials=1000),
        registry,
    )
    assert run.ok, run.error
    return graph


@pytest.fixture
def fresh_graph(scenario_dir, registry) -> GraphStore:
    """A private pipeline-populated graph for tests that mutate it."""
    graph = GraphStore()
    run = run_pipeline(
        graph,
        PipelineConfig(data_dir=scenario_dir, now=PIPELINE_NOW, n_trials=200),
        registry,
    )
    assert run.ok, run.error
    return graph
