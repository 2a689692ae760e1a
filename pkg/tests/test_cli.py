"""CLI in local-snapshot mode: the full workflow against a snapshot file."""

import json

import pytest
from click.testing import CliRunner

from act.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A directory with a generated scenario and a pipelined snapshot."""
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    snapshot = root / "twin.snapshot"

    result = runner.invoke(main, ["synth", str(root / "data"), "--seed", "42"])
    assert result.exit_code == 0, result.output
    assert "wrote 14 files" in result.output

    result = runner.invoke(main, [
        "--snapshot", str(snapshot), "pipeline",
        "--data-dir", str(root / "data"), "--now", "2019-10-01T12:00:00",
        "--trials", "300"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["ok"] is True
    return root, snapshot


def invoke(snapshot, *args):
    runner = CliRunner()
    return runner.invoke(main, ["--snapshot", str(snapshot), *args])


def test_pipeline_wrote_a_loadable_snapshot(workspace):
    _, snapshot = workspace
    assert snapshot.exists()
    result = invoke(snapshot, "reason")
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["rounds"] == 1  # already at the fixpoint
    assert body["edges_created"] == {}


def test_ingest_is_idempotent_via_cli(workspace):
    root, snapshot = workspace
    result = invoke(snapshot, "ingest", str(root / "data"))
    assert result.exit_code == 0, result.output
    body = json.loads(result.output)
    assert body["nodes_created"] == 0
    assert body["edges_created"] == 0
    assert body["rejects"] == []


def test_query_table_and_ndjson_formats(workspace):
    _, snapshot = workspace
    text = "MATCH (uc:UseCase) RETURN uc;"
    table = invoke(snapshot, "query", text)
    assert table.exit_code == 0, table.output
    lines = table.output.strip().splitlines()
    assert lines[0] == "uc"
    assert len(lines) == 3  # header + two use cases

    ndjson = invoke(snapshot, "query", text, "--format", "ndjson")
    rows = [json.loads(line) for line in ndjson.output.strip().splitlines()]
    descriptions = {row["uc"]["props"]["description"] for row in rows}
    assert descriptions == {"Production Planning", "Demand Forecasting"}


def test_query_from_file(workspace, tmp_path):
    _, snapshot = workspace
    query_file = tmp_path / "q.cql"
    query_file.write_text("MATCH (m:Material) RETURN m;\n")
    result = invoke(snapshot, "query", "--file", str(query_file))
    assert result.exit_code == 0
    assert len(result.output.strip().splitlines()) >= 2


def test_query_syntax_error_is_a_clean_failure(workspace):
    _, snapshot = workspace
    result = invoke(snapshot, "query", "MATCH (x RETURN x")
    assert result.exit_code != 0
    assert "[pql.syntax]" in result.output


def test_simulate_outputs_quantiles(workspace):
    _, snapshot = workspace
    result = invoke(snapshot, "simulate", "--trials", "50")
    assert result.exit_code == 0, result.output
    forecasts = json.loads(result.output)
    assert forecasts
    for fc in forecasts:
        assert set(fc["quantiles"]) == {"p10", "p50", "p90"}
        assert fc["quantiles"]["p10"] <= fc["quantiles"]["p90"]


def test_insights_and_options_and_feedback_flow(workspace):
    _, snapshot = workspace
    result = invoke(snapshot, "insights")
    insights = json.loads(result.output)
    kinds = {i["kind"] for i in insights}
    assert {"organizational_downtime", "demand_spike"} <= kinds
    severities = [i["severity"] for i in insights]
    assert severities == sorted(severities, reverse=True)

    downtime = next(i for i in insights
                    if i["kind"] == "organizational_downtime")
    result = invoke(snapshot, "options", downtime["uuid"])
    options = json.loads(result.output)
    descriptions = {o["description"] for o in options}
    assert "update the production schedule" in descriptions

    target = options[0]["option_uuid"]
    result = invoke(snapshot, "feedback", downtime["uuid"], "accepted",
                    "--option", target, "--user", "ada")
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["verdict"] == "accepted"

    # the feedback persisted into the snapshot
    result = invoke(snapshot, "options", downtime["uuid"])
    updated = {o["option_uuid"]: o for o in json.loads(result.output)}
    assert updated[target]["accepted"] == 1
    assert updated[target]["score"] > 0.5


def test_alternative_feedback_via_cli(workspace):
    _, snapshot = workspace
    insights = json.loads(invoke(snapshot, "insights").output)
    downtime = next(i for i in insights
                    if i["kind"] == "organizational_downtime")
    result = invoke(snapshot, "feedback", downtime["uuid"], "alternative",
                    "--user", "ada", "--text", "swap in the night crew")
    assert result.exit_code == 0, result.output
    minted = json.loads(result.output)["option_uuid"]
    options = {o["option_uuid"]: o
               for o in json.loads(invoke(snapshot, "options",
                                          downtime["uuid"]).output)}
    assert options[minted]["creative"] is True


def test_feedback_errors_are_clean_failures(workspace):
    _, snapshot = workspace
    result = invoke(snapshot, "options", "ins-ghost")
    assert result.exit_code != 0
    assert "[graph.not_found]" in result.output


def test_metrics_json_and_csv(workspace):
    _, snapshot = workspace
    result = invoke(snapshot, "metrics")
    scopes = json.loads(result.output)
    assert [m["scope"] for m in scopes] == [
        "full", "production_planning", "demand_forecasting"]
    result = invoke(snapshot, "metrics", "--csv", "--sample-fraction", "0.5")
    lines = result.output.strip().splitlines()
    assert lines[0].startswith("scope,n_nodes,")
    assert len(lines) == 4


def test_pipeline_failure_exits_nonzero(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, [
        "--snapshot", str(tmp_path / "empty.snapshot"), "pipeline"])
    assert result.exit_code == 1
    body = json.loads(result.output)
    assert body["ok"] is False
    assert body["failed_step"] == "models"


def test_actuate_requires_server(workspace):
    _, snapshot = workspace
    result = invoke(snapshot, "actuate", "i", "o", "http://hooks.local/x")
    assert result.exit_code != 0
    assert "requires --server" in result.output
