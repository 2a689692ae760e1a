"""In-memory labeled property graph with secondary indexes and snapshots.

Nodes and edges carry engine-assigned integer ids; natural keys (the
``uuid`` property by default) are kept in a separate unique index per
label. Every entity carries a provenance tag naming one of the four
knowledge kinds (definitional, deductive, inductive, creative).

The snapshot format is line-delimited JSON: one object per node, then one
per edge, sorted by id. Datetime property values are encoded as
``{"$ts": "<iso-utc-ms>"}``; all other values use native JSON types. The
serialization is canonical (sorted keys, no whitespace) so two equal
stores produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Iterator, Optional

from .errors import DanglingEdge, NotFound, SnapshotFormatError, UniqueKeyViolation

KNOWLEDGE_KINDS = ("definitional", "deductive", "inductive", "creative")


def utc_ms(dt: datetime) -> datetime:
    """Normalize a datetime to UTC with millisecond precision."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    dt = dt.astimezone(timezone.utc)
    return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


def ts_to_text(dt: datetime) -> str:
    dt = utc_ms(dt)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def ts_from_text(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%S.%fZ").replace(
        tzinfo=timezone.utc
    )


def check_property_value(name: str, value):
    """Validate and normalize a single property value."""
    if isinstance(value, bool) or isinstance(value, int) or isinstance(value, str):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"property {name!r}: non-finite float {value!r}")
        return value
    if isinstance(value, datetime):
        return utc_ms(value)
    raise ValueError(f"property {name!r}: unsupported value type {type(value).__name__}")


def check_properties(props: dict) -> dict:
    return {name: check_property_value(name, value) for name, value in props.items()}


@dataclass(frozen=True)
class Provenance:
    kind: str
    source: str
    recorded_at: datetime

    def __post_init__(self):
        if self.kind not in KNOWLEDGE_KINDS:
            raise ValueError(f"unknown knowledge kind {self.kind!r}")
        if not self.source:
            raise ValueError("provenance source must be non-empty")
        object.__setattr__(self, "recorded_at", utc_ms(self.recorded_at))

    @classmethod
    def at(cls, kind: str, source: str, when: Optional[datetime] = None) -> "Provenance":
        return cls(kind, source, when if when is not None else datetime.now(timezone.utc))


@dataclass
class Node:
    id: int
    label: str
    properties: dict
    provenance: Provenance


@dataclass
class Edge:
    id: int
    relation: str
    src: int
    dst: int
    properties: dict
    provenance: Provenance


class GraphStore:
    """Single-writer / multi-reader property graph.

    ``unique_keys`` names properties that must be unique per label (the
    natural-key index); by default only ``uuid``.
    """

    def __init__(self, unique_keys: Iterable[str] = ("uuid",)):
        self.unique_keys = tuple(unique_keys)
        self._nodes: dict[int, Node] = {}
        self._edges: dict[int, Edge] = {}
        self._next_id = 1
        self._label_index: dict[str, set[int]] = {}
        # (label, prop, value) -> node id, for declared unique keys
        self._key_index: dict[tuple, int] = {}
        self._out: dict[int, list[int]] = {}
        self._in: dict[int, list[int]] = {}

    # -- basic accessors -------------------------------------------------

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def n_nodes(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def node(self, node_id: int) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise NotFound(f"no node {node_id}") from None

    def edge(self, edge_id: int) -> Edge:
        try:
            return self._edges[edge_id]
        except KeyError:
            raise NotFound(f"no edge {edge_id}") from None

    def has_node(self, node_id: int) -> bool:
        return node_id in self._nodes

    def nodes(self) -> Iterator[Node]:
        for node_id in sorted(self._nodes):
            yield self._nodes[node_id]

    def edges(self) -> Iterator[Edge]:
        for edge_id in sorted(self._edges):
            yield self._edges[edge_id]

    def nodes_by_label(self, label: str) -> list[Node]:
        return [self._nodes[i] for i in sorted(self._label_index.get(label, ()))]

    def node_by_key(self, label: str, prop: str, value) -> Optional[Node]:
        node_id = self._key_index.get((label, prop, value))
        return self._nodes[node_id] if node_id is not None else None

    # -- mutation --------------------------------------------------------

    def add_node(self, label: str, properties: dict, provenance: Provenance) -> int:
        if not label:
            raise ValueError("node label must be non-empty")
        props = check_properties(properties)
        for key in self.unique_keys:
            if key in props and (label, key, props[key]) in self._key_index:
                raise UniqueKeyViolation(
                    f"{label} with {key}={props[key]!r} already exists"
                )
        node_id = self._next_id
        self._next_id += 1
        self._install_node(Node(node_id, label, props, provenance))
        return node_id

    def _install_node(self, node: Node):
        self._nodes[node.id] = node
        self._label_index.setdefault(node.label, set()).add(node.id)
        for key in self.unique_keys:
            if key in node.properties:
                self._key_index[(node.label, key, node.properties[key])] = node.id
        self._out.setdefault(node.id, [])
        self._in.setdefault(node.id, [])

    def add_edge(
        self,
        relation: str,
        src: int,
        dst: int,
        properties: dict,
        provenance: Provenance,
    ) -> int:
        if not relation:
            raise ValueError("edge relation must be non-empty")
        if src not in self._nodes or dst not in self._nodes:
            missing = src if src not in self._nodes else dst
            raise DanglingEdge(f"edge endpoint {missing} does not exist")
        edge_id = self._next_id
        self._next_id += 1
        self._install_edge(Edge(edge_id, relation, src, dst, check_properties(properties), provenance))
        return edge_id

    def _install_edge(self, edge: Edge):
        self._edges[edge.id] = edge
        self._out[edge.src].append(edge.id)
        self._in[edge.dst].append(edge.id)

    def set_node_properties(self, node_id: int, properties: dict):
        """Merge properties into a node. Unique-key values must not change."""
        node = self.node(node_id)
        props = check_properties(properties)
        for key in self.unique_keys:
            if key in props and key in node.properties and props[key] != node.properties[key]:
                raise UniqueKeyViolation(f"cannot rewrite unique key {key!r}")
        node.properties.update(props)
        for key in self.unique_keys:
            if key in props:
                self._key_index[(node.label, key, props[key])] = node_id

    # -- traversal -------------------------------------------------------

    def neighbors(
        self, node_id: int, direction: str = "both", relation: Optional[str] = None
    ) -> list[tuple[Edge, Node]]:
        """Adjacent (edge, node) pairs, stable order by edge id."""
        if node_id not in self._nodes:
            raise NotFound(f"no node {node_id}")
        edge_ids: list[int] = []
        if direction in ("out", "both"):
            edge_ids.extend(self._out[node_id])
        if direction in ("in", "both"):
            edge_ids.extend(self._in[node_id])
        out = []
        for edge_id in sorted(set(edge_ids)):
            edge = self._edges[edge_id]
            if relation is not None and edge.relation != relation:
                continue
            other = edge.dst if edge.src == node_id else edge.src
            # self-loops traverse to the node itself
            if direction == "in" and edge.dst == node_id:
                other = edge.src
            out.append((edge, self._nodes[other]))
        return out

    def has_edge(self, relation: str, src: int, dst: int) -> bool:
        return any(
            e.relation == relation and e.dst == dst
            for e in (self._edges[i] for i in self._out.get(src, []))
        )

    def edges_between(self, src: int, dst: int) -> list[Edge]:
        return [
            self._edges[i]
            for i in sorted(self._out.get(src, []))
            if self._edges[i].dst == dst
        ]

    # -- snapshots -------------------------------------------------------

    def canonical_lines(self) -> list[str]:
        lines = []
        for node in self.nodes():
            lines.append(_dumps({
                "kind": "node",
                "id": node.id,
                "label": node.label,
                "props": _encode_props(node.properties),
                "provenance": _encode_prov(node.provenance),
            }))
        for edge in self.edges():
            lines.append(_dumps({
                "kind": "edge",
                "id": edge.id,
                "relation": edge.relation,
                "src": edge.src,
                "dst": edge.dst,
                "props": _encode_props(edge.properties),
                "provenance": _encode_prov(edge.provenance),
            }))
        return lines

    def snapshot_save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.canonical_lines():
                fh.write(line + "\n")

    @classmethod
    def snapshot_load(cls, path, unique_keys: Iterable[str] = ("uuid",)) -> "GraphStore":
        store = cls(unique_keys=unique_keys)
        max_id = 0
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    rec = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise SnapshotFormatError(f"invalid JSON: {exc.msg}", lineno) from None
                try:
                    kind = rec["kind"]
                    props = _decode_props(rec["props"])
                    prov = _decode_prov(rec["provenance"])
                    if kind == "node":
                        node = Node(int(rec["id"]), rec["label"], props, prov)
                        if node.id in store._nodes:
                            raise ValueError(f"duplicate node id {node.id}")
                        store._install_node(node)
                    elif kind == "edge":
                        edge = Edge(int(rec["id"]), rec["relation"], int(rec["src"]),
                                    int(rec["dst"]), props, prov)
                        if edge.src not in store._nodes or edge.dst not in store._nodes:
                            raise ValueError("edge references unknown node")
                        if edge.id in store._edges:
                            raise ValueError(f"duplicate edge id {edge.id}")
                        store._install_edge(edge)
                    else:
                        raise ValueError(f"unknown record kind {kind!r}")
                except (KeyError, TypeError, ValueError) as exc:
                    raise SnapshotFormatError(str(exc), lineno) from None
                max_id = max(max_id, int(rec["id"]))
        store._next_id = max_id + 1
        return store

    # -- integrity -------------------------------------------------------

    def check_integrity(self) -> list[str]:
        """Full-scan consistency check; returns a list of problems."""
        problems = []
        for edge in self._edges.values():
            if edge.src not in self._nodes or edge.dst not in self._nodes:
                problems.append(f"edge {edge.id} has a missing endpoint")
        for (label, key, value), node_id in self._key_index.items():
            node = self._nodes.get(node_id)
            if node is None or node.label != label or node.properties.get(key) != value:
                problems.append(f"stale key index entry {(label, key, value)}")
        adjacency_total = sum(len(v) for v in self._out.values())
        if adjacency_total != len(self._edges):
            problems.append("adjacency count disagrees with edge set")
        return problems


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _encode_props(props: dict) -> dict:
    return {
        k: ({"$ts": ts_to_text(v)} if isinstance(v, datetime) else v)
        for k, v in props.items()
    }


def _decode_props(props: dict) -> dict:
    out = {}
    for k, v in props.items():
        if isinstance(v, dict):
            if set(v) != {"$ts"}:
                raise ValueError(f"property {k!r}: bad typed value")
            out[k] = ts_from_text(v["$ts"])
        else:
            out[k] = v
    return check_properties(out)


def _encode_prov(prov: Provenance) -> dict:
    return {
        "kind": prov.kind,
        "source": prov.source,
        "recorded_at": ts_to_text(prov.recorded_at),
    }


def _decode_prov(rec: dict) -> Provenance:
    return Provenance(rec["kind"], rec["source"], ts_from_text(rec["recorded_at"]))
