import math
from datetime import datetime, timezone

import pytest

from act.errors import (
    DanglingEdge,
    NotFound,
    SnapshotFormatError,
    UniqueKeyViolation,
)
from act.graph import GraphStore, Provenance, ts_from_text, ts_to_text

PROV = Provenance.at("definitional", "test",
                     datetime(2020, 1, 1, tzinfo=timezone.utc))


def small_graph():
    g = GraphStore()
    a = g.add_node("Person", {"uuid": "p-1", "name": "Ada"}, PROV)
    b = g.add_node("ProductionLine", {"uuid": "l-1", "name": "L1"}, PROV)
    e = g.add_edge("ASSIGNED_TO", a, b, {}, PROV)
    return g, a, b, e


def test_add_and_get_node():
    g, a, _, _ = small_graph()
    node = g.node(a)
    assert node.label == "Person"
    assert node.properties["name"] == "Ada"
    assert node.provenance.kind == "definitional"


def test_unique_key_enforced():
    g, _, _, _ = small_graph()
    with pytest.raises(UniqueKeyViolation):
        g.add_node("Person", {"uuid": "p-1", "name": "Dup"}, PROV)
    # the same uuid under a different label is a distinct natural key
    g.add_node("Client", {"uuid": "p-1", "name": "ok"}, PROV)


def test_unique_key_is_immutable():
    g, a, _, _ = small_graph()
    with pytest.raises(UniqueKeyViolation):
        g.set_node_properties(a, {"uuid": "p-2"})


def test_dangling_edge_rejected():
    g, a, _, _ = small_graph()
    with pytest.raises(DanglingEdge):
        g.add_edge("ASSIGNED_TO", a, 999, {}, PROV)


def test_missing_node_raises():
    g, _, _, _ = small_graph()
    with pytest.raises(NotFound):
        g.node(12345)


def test_property_value_kinds_enforced():
    g = GraphStore()
    with pytest.raises(ValueError):
        g.add_node("Person", {"uuid": "x", "bad": [1, 2]}, PROV)
    with pytest.raises(ValueError):
        g.add_node("Person", {"uuid": "y", "bad": math.nan}, PROV)


def test_neighbors_directions_and_ordering():
    g, a, b, e = small_graph()
    c = g.add_node("ProductionLine", {"uuid": "l-2"}, PROV)
    e2 = g.add_edge("ASSIGNED_TO", a, c, {}, PROV)
    out = g.neighbors(a, "out")
    assert [edge.id for edge, _ in out] == sorted([e, e2])
    assert [edge.id for edge, _ in g.neighbors(b, "in")] == [e]
    assert {n.id for _, n in g.neighbors(a, "both")} == {b, c}
    assert g.neighbors(a, "out", "NOPE") == []


def test_has_edge_and_node_by_key():
    g, a, b, _ = small_graph()
    assert g.has_edge("ASSIGNED_TO", a, b)
    assert not g.has_edge("ASSIGNED_TO", b, a)
    assert g.node_by_key("Person", "uuid", "p-1").id == a
    assert g.node_by_key("Person", "uuid", "nope") is None


def test_timestamp_text_round_trip():
    ts = datetime(2019, 10, 1, 13, 0, 0, 123000, tzinfo=timezone.utc)
    assert ts_from_text(ts_to_text(ts)) == ts
    assert ts_to_text(ts).endswith("Z")


def test_snapshot_round_trip_is_byte_exact(tmp_path):
    g, a, _, _ = small_graph()
    g.set_node_properties(a, {"hired": datetime(2018, 3, 2, tzinfo=timezone.utc)})
    path = tmp_path / "g.snapshot"
    g.snapshot_save(path)
    first = path.read_bytes()
    g2 = GraphStore.snapshot_load(path)
    path2 = tmp_path / "g2.snapshot"
    g2.snapshot_save(path2)
    assert path2.read_bytes() == first


def test_snapshot_preserves_ids_and_props(tmp_path):
    g, a, b, e = small_graph()
    path = tmp_path / "g.snapshot"
    g.snapshot_save(path)
    g2 = GraphStore.snapshot_load(path)
    assert g2.node(a).properties == g.node(a).properties
    assert g2.edge(e).src == a and g2.edge(e).dst == b
    assert g2.node(a).provenance == PROV


def test_snapshot_bad_line_reports_lineno(tmp_path):
    path = tmp_path / "bad.snapshot"
    path.write_text('{"kind": "node"}\nnot-json\n')
    with pytest.raises(SnapshotFormatError) as err:
        GraphStore.snapshot_load(path)
    assert "1" in str(err.value) or "2" in str(err.value)


def test_check_integrity_on_seed(seeded_graph):
    seeded_graph.check_integrity()


def test_seed_snapshot_fixed_point(tmp_path, seeded_graph):
    first = tmp_path / "a.snapshot"
    second = tmp_path / "b.snapshot"
    seeded_graph.snapshot_save(first)
    GraphStore.snapshot_load(first).snapshot_save(second)
    assert second.read_bytes() == first.read_bytes()
