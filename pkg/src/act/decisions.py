"""The actionable loop: insight detection, option matching, ranking, feedback.

Insights are dated, severity-scored conditions derived from forecasts.
Detection is idempotent: an insight is keyed by (kind, referenced entities,
event day), so re-running detection after new data only adds genuinely new
insights.  Decision-making options are matched to insights by kind and use
case, ranked by Laplace-smoothed acceptance rate, and user feedback is
persisted so the ranking learns over time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from typing import Optional

from .errors import NotFound, Precondition
from .graph import GraphStore, Node, Provenance
from .models.regression import daily_series

INSIGHT_KINDS = ("organizational_downtime", "stockout_risk",
                 "demand_spike", "stale_model")

SPIKE_FACTOR = 2.0
TRAILING_DAYS = 28
LOOKBACK_DAYS = 7
OVERRUN_CAP_HOURS = 8.0
STALE_SEVERITY = 0.5


@dataclass
class InsightReport:
    created: list = field(default_factory=list)   # insight uuids
    existing: list = field(default_factory=list)


def insight_date(day: date) -> datetime:
    """Insights are pinned to 13:00 UTC on the event day."""
    return datetime.combine(day, time(13, 0), tzinfo=timezone.utc)


def _insight_uuid(kind: str, ref_uuids: tuple, day: date) -> str:
    return "ins-" + "-".join((kind, *sorted(ref_uuids), day.isoformat()))


def _ensure_insight(graph, report, prov, kind, day, severity, description,
                    refs, forecast_ids=()):
    """refs: [(label, node id)]; idempotent on the derived uuid."""
    uuid = _insight_uuid(kind, tuple(graph.node(nid).properties["uuid"]
                                     for _, nid in refs), day)
    existing = graph.node_by_key("Insight", "uuid", uuid)
    if existing is not None:
        report.existing.append(uuid)
        return existing.id
    node_id = graph.add_node("Insight", {
        "uuid": uuid,
        "kind": kind,
        "date": insight_date(day),
        "severity": float(severity),
        "description": description,
    }, prov)
    for _, ref_id in refs:
        graph.add_edge("REFERS_TO", node_id, ref_id, {}, prov)
    for fc_id in forecast_ids:
        graph.add_edge("DESCRIBES_EVENT_IN", node_id, fc_id, {}, prov)
    report.created.append(uuid)
    return node_id


def _out_one(graph, node_id, relation):
    for _, other in graph.neighbors(node_id, "out", relation):
        return other
    return None


def _detect_downtime(graph, report, prov):
    """A simulated p90 completion past shift end, on a shift short of people."""
    for fc in graph.nodes_by_label("Forecast"):
        if fc.properties.get("kind") != "completion":
            continue
        p90 = fc.properties.get("p90")
        wo = _out_one(graph, fc.id, "FORECAST_OF")
        if p90 is None or wo is None:
            continue
        shift = _out_one(graph, wo.id, "DURING_SHIFT")
        if shift is None or not shift.properties.get("absent_person_uuids"):
            continue
        end_ts = shift.properties["end_ts"]
        if p90 <= end_ts:
            continue
        overrun_h = (p90 - end_ts).total_seconds() / 3600.0
        refs = [("Shift", shift.id)]
        line = _out_one(graph, shift.id, "EXECUTED_ON")
        if line is not None:
            refs.append(("ProductionLine", line.id))
        _ensure_insight(
            graph, report, prov, "organizational_downtime",
            shift.properties["start_ts"].date(),
            min(1.0, overrun_h / OVERRUN_CAP_HOURS),
            "simulated completion overruns an understaffed shift by "
            f"{overrun_h:.1f}h",
            refs, forecast_ids=(fc.id,))


def _demand_forecasts(graph):
    out = []
    for fc in graph.nodes_by_label("Forecast"):
        if fc.properties.get("kind") == "demand":
            out.append(fc)
    return out


def _detect_stockout(graph, report, prov, demand_fcs):
    """Forecast demand exceeds stock plus scheduled production."""
    by_material: dict = {}
    for fc in demand_fcs:
        by_material.setdefault(fc.properties["material_uuid"], []).append(fc)
    for material_uuid in sorted(by_material):
        material = graph.node_by_key("Material", "uuid", material_uuid)
        if material is None:
            continue
        fcs = by_material[material_uuid]
        forecast_total = sum(fc.properties["value"] for fc in fcs)
        window_end = max(fc.properties["target_date"] for fc in fcs)
        # only production due inside the forecast window can cover demand
        scheduled = 0.0
        for edge, wo in graph.neighbors(material.id, "in", "OF_MATERIAL"):
            if (wo.label == "WorkOrder"
                    and wo.properties.get("status") == "scheduled"
                    and wo.properties.get("due_ts") is not None
                    and wo.properties["due_ts"] <= window_end + timedelta(days=1)):
                scheduled += float(wo.properties.get("qty", 0))
        covered = float(material.properties.get("stock_qty", 0)) + scheduled
        if forecast_total <= covered or forecast_total <= 0:
            continue
        shortfall = forecast_total - covered
        day = min(fc.properties["target_date"] for fc in fcs).date()
        _ensure_insight(
            graph, report, prov, "stockout_risk", day,
            min(1.0, shortfall / forecast_total),
            f"forecast demand {forecast_total:.1f} exceeds stock and "
            f"scheduled production {covered:.1f}",
            [("Material", material.id)],
            forecast_ids=tuple(fc.id for fc in sorted(fcs, key=lambda n: n.id)))


def _detect_spike(graph, report, prov, demand_fcs):
    """A day's demand above twice its trailing 28-day mean.

    The series combines observed shipments with forecast values, and the
    window scanned is the last week of history plus the forecast horizon;
    only the first qualifying day per (material, client) raises an insight.
    """
    by_pair: dict = {}
    for fc in demand_fcs:
        key = (fc.properties["material_uuid"], fc.properties["client_uuid"])
        by_pair.setdefault(key, []).append(fc)
    for material_uuid, client_uuid in sorted(by_pair):
        fcs = sorted(by_pair[(material_uuid, client_uuid)],
                     key=lambda n: n.properties["target_date"])
        series = daily_series(graph, material_uuid, client_uuid)
        if series is None:
            continue
        values = list(series.values)
        as_of = series.start + timedelta(days=len(values))
        day_of = {series.start + timedelta(days=i): i for i in range(len(values))}
        for fc in fcs:
            day = fc.properties["target_date"].date()
            day_of[day] = len(values)
            values.append(float(fc.properties["value"]))
        start = as_of - timedelta(days=LOOKBACK_DAYS)
        horizon_end = max(day_of)
        day = start
        while day <= horizon_end:
            idx = day_of.get(day)
            day += timedelta(days=1)
            if idx is None:
                continue
            window = values[max(0, idx - TRAILING_DAYS):idx]
            mean = sum(window) / len(window) if window else 0.0
            if mean <= 0 or values[idx] <= SPIKE_FACTOR * mean:
                continue
            ratio = values[idx] / mean
            material = graph.node_by_key("Material", "uuid", material_uuid)
            client = graph.node_by_key("Client", "uuid", client_uuid)
            spike_day = day - timedelta(days=1)
            # evidence: the pair's forecasts (the spike day itself may lie in
            # observed history, in which case all horizons are the evidence)
            fc_ids = tuple(fc.id for fc in fcs
                           if fc.properties["target_date"].date() == spike_day)
            if not fc_ids:
                fc_ids = tuple(fc.id for fc in fcs)
            _ensure_insight(
                graph, report, prov, "demand_spike", spike_day,
                min(1.0, (ratio - SPIKE_FACTOR) / SPIKE_FACTOR),
                f"demand {values[idx]:.1f} is {ratio:.1f}x the trailing mean "
                f"{mean:.1f}",
                [("Material", material.id), ("Client", client.id)],
                forecast_ids=fc_ids)
            break


def _detect_stale(graph, report, prov, now, max_age):
    from .reasoner import stale_models

    stale, _warnings = stale_models(graph, now, max_age)
    for model in stale:
        _ensure_insight(
            graph, report, prov, "stale_model", now.date(), STALE_SEVERITY,
            f"model {model.properties.get('name', model.properties['uuid'])!r} "
            "has not been retrained recently",
            [(model.label, model.id)])


def detect_insights(graph: GraphStore, now: datetime,
                    stale_after: timedelta = timedelta(days=90),
                    when: Optional[datetime] = None) -> InsightReport:
    if now.tzinfo is None:
        now = now.replace(tzinfo=timezone.utc)
    prov = Provenance.at("definitional", "insight-detector", when)
    report = InsightReport()
    demand_fcs = _demand_forecasts(graph)
    _detect_downtime(graph, report, prov)
    _detect_stockout(graph, report, prov, demand_fcs)
    _detect_spike(graph, report, prov, demand_fcs)
    _detect_stale(graph, report, prov, now, stale_after)
    return report


def _insight_use_cases(graph, insight_id) -> set:
    """Descriptions of use cases reachable insight -> forecast -> use case."""
    out = set()
    for _, fc in graph.neighbors(insight_id, "out", "DESCRIBES_EVENT_IN"):
        for _, uc in graph.neighbors(fc.id, "out", "RELATES_TO"):
            out.add(uc.properties.get("description"))
    return out


def match_options(graph: GraphStore, when: Optional[datetime] = None) -> int:
    """Attach applicable catalog options to insights; returns edges created."""
    prov = Provenance.at("definitional", "option-matcher", when)
    options = graph.nodes_by_label("DecisionMakingOption")
    created = 0
    for insight in graph.nodes_by_label("Insight"):
        kind = insight.properties.get("kind")
        use_cases = _insight_use_cases(graph, insight.id)
        for option in options:
            kinds = option.properties.get("applicable_kinds", "")
            if kinds != "*" and kind not in kinds.split(";"):
                continue
            wanted = option.properties.get("use_case", "*")
            if wanted != "*" and wanted not in use_cases:
                continue
            if not graph.has_edge("SUGGESTS_ACTION_FOR", option.id, insight.id):
                graph.add_edge("SUGGESTS_ACTION_FOR", option.id, insight.id,
                               {}, prov)
                created += 1
    return created


def feedback_counts(graph: GraphStore, option_id: int) -> tuple[int, int]:
    accepted = rejected = 0
    for _, fb in graph.neighbors(option_id, "in", "FEEDBACK_ON"):
        verdict = fb.properties.get("verdict")
        if verdict == "accepted":
            accepted += 1
        elif verdict == "rejected":
            rejected += 1
    return accepted, rejected


def rank_options(graph: GraphStore, insight_uuid: str) -> list[dict]:
    """Options suggested for an insight, best first.

    Scores use Laplace smoothing, (accepted + 1) / (accepted + rejected + 2),
    over all recorded feedback for the option; ties break on option uuid.
    """
    insight = graph.node_by_key("Insight", "uuid", insight_uuid)
    if insight is None:
        raise NotFound(f"no insight with uuid {insight_uuid!r}")
    rows = []
    for _, option in graph.neighbors(insight.id, "in", "SUGGESTS_ACTION_FOR"):
        accepted, rejected = feedback_counts(graph, option.id)
        rows.append({
            "option_uuid": option.properties["uuid"],
            "description": option.properties.get("description", ""),
            "accepted": accepted,
            "rejected": rejected,
            "score": (accepted + 1) / (accepted + rejected + 2),
            "creative": option.provenance.kind == "creative",
        })
    rows.sort(key=lambda r: (-r["score"], r["option_uuid"]))
    return rows


def record_feedback(graph: GraphStore, insight_uuid: str, verdict: str,
                    user: str, option_uuid: Optional[str] = None,
                    alternative_text: Optional[str] = None,
                    when: Optional[datetime] = None) -> dict:
    """Persist a verdict; for 'alternative', mint a new creative option."""
    if verdict not in ("accepted", "rejected", "alternative"):
        raise Precondition(f"unknown verdict {verdict!r}")
    insight = graph.node_by_key("Insight", "uuid", insight_uuid)
    if insight is None:
        raise NotFound(f"no insight with uuid {insight_uuid!r}")
    recorded_at = when if when is not None else datetime.now(timezone.utc)
    if verdict == "alternative":
        if not (alternative_text or "").strip():
            raise Precondition("alternative feedback requires a description")
        prov = Provenance.at("creative", f"user:{user}", when)
        option_uuid = f"opt-alt-{len(graph.nodes_by_label('Feedback')) + 1}"
        option_id = graph.add_node("DecisionMakingOption", {
            "uuid": option_uuid,
            "description": alternative_text.strip(),
            "applicable_kinds": insight.properties.get("kind", ""),
            "use_case": "*",
        }, prov)
        graph.add_edge("SUGGESTS_ACTION_FOR", option_id, insight.id, {}, prov)
    else:
        option = (graph.node_by_key("DecisionMakingOption", "uuid", option_uuid)
                  if option_uuid else None)
        if option is None:
            raise NotFound(f"no decision-making option with uuid {option_uuid!r}")
        option_id = option.id
    # the verdict record itself is an asserted fact; only the minted
    # alternative option carries creative provenance
    prov = Provenance.at("definitional", f"user:{user}", when)
    fb_uuid = f"fb-{len(graph.nodes_by_label('Feedback')) + 1}"
    fb_id = graph.add_node("Feedback", {
        "uuid": fb_uuid,
        "verdict": verdict,
        "user": user,
        "recorded_at": recorded_at,
    }, prov)
    graph.add_edge("FEEDBACK_ON", fb_id, option_id, {}, prov)
    graph.add_edge("FEEDBACK_FOR", fb_id, insight.id, {}, prov)
    return {"feedback_uuid": fb_uuid, "option_uuid": option_uuid,
            "verdict": verdict}
