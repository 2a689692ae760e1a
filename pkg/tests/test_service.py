"""HTTP API surface: routing, serialization, error mapping, actuation."""

import pytest
from fastapi.testclient import TestClient

import act.service.app as service_app
from act.graph import GraphStore
from act.service import AppState, create_app


@pytest.fixture(scope="module")
def state(seeded_graph, tmp_path_factory):
    # copy the seeded graph through a snapshot so mutations stay local
    path = tmp_path_factory.mktemp("svc") / "seed.snapshot"
    seeded_graph.snapshot_save(path)
    return AppState(GraphStore.snapshot_load(path))


@pytest.fixture(scope="module")
def client(state):
    return TestClient(create_app(state))


def test_health(client):
    body = client.get("/api/v1/health").json()
    assert body["status"] == "ok"
    assert body["nodes"] > 0
    assert body["edges"] > 0


def test_query_returns_columns_and_rendered_rows(client):
    response = client.post("/api/v1/query", json={
        "text": "MATCH (uc:UseCase) RETURN uc;"})
    assert response.status_code == 200
    body = response.json()
    assert body["columns"] == ["uc"]
    descriptions = {row[0]["props"]["description"] for row in body["rows"]}
    assert {"Production Planning", "Demand Forecasting"} <= descriptions


def test_query_syntax_error_maps_to_400_with_code(client):
    response = client.post("/api/v1/query", json={"text": "MATCH (x RETURN x"})
    assert response.status_code == 400
    body = response.json()
    assert body["code"] == "pql.syntax"
    assert "at byte" in body["message"]


def test_unbound_variable_maps_to_400(client):
    response = client.post("/api/v1/query",
                           json={"text": "MATCH (x:UseCase) RETURN y;"})
    assert response.status_code == 400
    assert response.json()["code"] == "pql.unbound_variable"


def test_usecases_endpoint(client):
    body = client.get("/api/v1/usecases").json()
    by_uuid = {u["uuid"]: u["description"] for u in body}
    assert by_uuid["uc-pp"] == "Production Planning"
    assert by_uuid["uc-df"] == "Demand Forecasting"


def test_forecasts_filter_by_use_case(client):
    demand = client.get("/api/v1/forecasts", params={"use_case": "uc-df"}).json()
    assert demand
    assert all(fc["kind"] == "demand" for fc in demand)
    completion = client.get("/api/v1/forecasts",
                            params={"use_case": "uc-pp"}).json()
    assert completion
    assert all(fc["kind"] == "completion" for fc in completion)
    assert all("p90" in fc["properties"] for fc in completion)


def test_insights_sorted_by_severity_then_date(client):
    insights = client.get("/api/v1/insights").json()
    kinds = {i["kind"] for i in insights}
    assert {"organizational_downtime", "demand_spike"} <= kinds
    ranks = [(-i["severity"], i["date"], i["uuid"]) for i in insights]
    assert ranks == sorted(ranks)
    for insight in insights:
        assert 0 < insight["severity"] <= 1
        assert insight["refers_to"]


def test_insights_since_filter(client):
    everything = client.get("/api/v1/insights").json()
    recent = client.get("/api/v1/insights",
                        params={"since": "2019-09-01"}).json()
    assert len(recent) < len(everything)
    assert all(i["date"] >= "2019-09-01" for i in recent)


def downtime_insight(client):
    insights = client.get("/api/v1/insights").json()
    return next(i for i in insights if i["kind"] == "organizational_downtime")


def test_options_ranked_for_insight(client):
    insight = downtime_insight(client)
    options = client.get(f"/api/v1/insights/{insight['uuid']}/options").json()
    descriptions = {o["description"] for o in options}
    assert "update the production schedule" in descriptions
    assert "add an additional shift" in descriptions
    scores = [o["score"] for o in options]
    assert scores == sorted(scores, reverse=True)


def test_options_for_unknown_insight_404(client):
    response = client.get("/api/v1/insights/ins-ghost/options")
    assert response.status_code == 404
    assert response.json()["code"] == "graph.not_found"


def test_feedback_updates_scores(client):
    insight = downtime_insight(client)
    options = client.get(f"/api/v1/insights/{insight['uuid']}/options").json()
    target = options[-1]["option_uuid"]
    response = client.post("/api/v1/feedback", json={
        "insight_uuid": insight["uuid"], "verdict": "accepted",
        "user": "ada", "option_uuid": target})
    assert response.status_code == 200
    assert response.json()["verdict"] == "accepted"
    updated = {o["option_uuid"]: o for o in client.get(
        f"/api/v1/insights/{insight['uuid']}/options").json()}
    assert updated[target]["accepted"] >= 1
    assert updated[target]["score"] > 0.5


def test_alternative_feedback_surfaces_creative_option(client):
    insight = downtime_insight(client)
    response = client.post("/api/v1/feedback", json={
        "insight_uuid": insight["uuid"], "verdict": "alternative",
        "user": "ada", "alternative_text": "borrow staff from line 2"})
    assert response.status_code == 200
    minted = response.json()["option_uuid"]
    options = {o["option_uuid"]: o for o in client.get(
        f"/api/v1/insights/{insight['uuid']}/options").json()}
    assert options[minted]["creative"] is True
    assert options[minted]["description"] == "borrow staff from line 2"


def test_bad_verdict_maps_to_400(client):
    insight = downtime_insight(client)
    response = client.post("/api/v1/feedback", json={
        "insight_uuid": insight["uuid"], "verdict": "maybe", "user": "ada"})
    assert response.status_code == 400
    assert response.json()["code"] == "service.precondition"


def test_metrics_endpoint(client):
    body = client.get("/api/v1/metrics").json()
    names = [scope["scope"] for scope in body["scopes"]]
    assert names == ["full", "production_planning", "demand_forecasting"]
    assert body["csv"].startswith("scope,n_nodes,n_relationships,")
    with_params = client.get("/api/v1/metrics",
                             params={"sample_fraction": 0.5, "seed": 3}).json()
    assert all(s["sample_fraction"] == 0.5 for s in with_params["scopes"])
    bad = client.get("/api/v1/metrics", params={"sample_fraction": 0})
    assert bad.status_code == 400


def test_reason_endpoint_idempotent_on_seeded_graph(client):
    body = client.post("/api/v1/reason").json()
    assert body["rounds"] == 1
    assert body["edges_created"] == {}


def test_snapshot_endpoint(client, tmp_path):
    path = tmp_path / "api.snapshot"
    body = client.post("/api/v1/snapshot", json={"path": str(path)}).json()
    assert body["nodes"] > 0
    assert path.exists()
    loaded = GraphStore.snapshot_load(path)
    assert sum(1 for _ in loaded.nodes()) == body["nodes"]


def test_pipeline_endpoint_runs_end_to_end(scenario_dir):
    app_client = TestClient(create_app(AppState()))
    response = app_client.post("/api/v1/pipeline", json={
        "data_dir": str(scenario_dir), "now": "2019-10-01T12:00:00",
        "n_trials": 200})
    body = response.json()
    assert body["ok"] is True, body
    assert [step["name"] for step in body["steps"]] == [
        "ingest", "reason", "models", "insights"]
    assert body["failed_step"] is None
    insights = app_client.get("/api/v1/insights").json()
    assert insights


def test_pipeline_endpoint_reports_failures(tmp_path):
    app_client = TestClient(create_app(AppState()))
    response = app_client.post("/api/v1/pipeline",
                               json={"data_dir": str(tmp_path)})
    body = response.json()
    assert body["ok"] is False
    assert body["failed_step"] == "models"  # empty graph: nothing to simulate


# -- actuation ----------------------------------------------------------------


class StubResponse:
    def __init__(self, status_code):
        self.status_code = status_code


def accepted_pair(client):
    """(insight_uuid, option_uuid) with accepted feedback recorded."""
    insight = downtime_insight(client)
    options = client.get(f"/api/v1/insights/{insight['uuid']}/options").json()
    option = options[0]["option_uuid"]
    client.post("/api/v1/feedback", json={
        "insight_uuid": insight["uuid"], "verdict": "accepted",
        "user": "ada", "option_uuid": option})
    return insight["uuid"], option


def test_actuate_requires_accepted_feedback(client, state):
    insight = downtime_insight(client)
    options = client.get(f"/api/v1/insights/{insight['uuid']}/options").json()
    unaccepted = [o for o in options if o["accepted"] == 0][0]["option_uuid"]
    response = client.post("/api/v1/actuate", json={
        "insight_uuid": insight["uuid"], "option_uuid": unaccepted,
        "webhook_url": "http://example.invalid/hook"})
    assert response.status_code == 400
    assert response.json()["code"] == "service.precondition"


def test_actuate_posts_payload_to_webhook(client, state, monkeypatch):
    calls = []

    def fake_post(url, json=None, timeout=None):
        calls.append((url, json))
        return StubResponse(200)

    monkeypatch.setattr(service_app.httpx, "post", fake_post)
    insight_uuid, option_uuid = accepted_pair(client)
    response = client.post("/api/v1/actuate", json={
        "insight_uuid": insight_uuid, "option_uuid": option_uuid,
        "webhook_url": "http://hooks.local/act"})
    assert response.status_code == 200
    assert response.json() == {"delivered": True, "attempts": 1}
    (url, payload), = calls
    assert url == "http://hooks.local/act"
    assert payload["insight_uuid"] == insight_uuid
    assert payload["option_uuid"] == option_uuid
    assert payload["description"]


def test_actuate_retries_then_502(client, state, monkeypatch):
    monkeypatch.setattr(state, "retry_delays", (0.0, 0.0))
    attempts = []

    def failing_post(url, json=None, timeout=None):
        attempts.append(url)
        raise service_app.httpx.ConnectError("down")

    monkeypatch.setattr(service_app.httpx, "post", failing_post)
    insight_uuid, option_uuid = accepted_pair(client)
    response = client.post("/api/v1/actuate", json={
        "insight_uuid": insight_uuid, "option_uuid": option_uuid,
        "webhook_url": "http://hooks.local/act"})
    assert response.status_code == 502
    assert response.json()["code"] == "service.delivery_failed"
    assert len(attempts) == 3  # one try per delay plus the final attempt


def test_actuate_unknown_ids_404(client):
    response = client.post("/api/v1/actuate", json={
        "insight_uuid": "ins-ghost", "option_uuid": "opt-1",
        "webhook_url": "http://hooks.local/act"})
    assert response.status_code == 404
