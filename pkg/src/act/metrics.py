"""Graph shape metrics per use-case scope.

A scope is an induced subgraph over a whitelist of node classes.  Path
lengths are measured with undirected BFS from a sampled set of source
nodes; TPL is the total length over ordered (source, reachable target)
pairs, MPL the maximum, and APL the average.
"""

from __future__ import annotations

import io
import random
from collections import deque
from dataclasses import dataclass
from math import ceil
from typing import Optional

from .errors import EmptyGraph
from .graph import GraphStore

PP_CLASSES = frozenset({
    "Organization", "ProductionPlant", "ShopFloor", "ProductionLine", "Person",
    "Shift", "WorkOrder", "ManufacturingProcess", "ManufacturedBatch",
    "Material", "Forecast", "SimulationModel", "Model", "UseCase", "Insight",
    "DecisionMakingOption",
})

DF_CLASSES = frozenset({
    "Material", "Client", "ShippingOrder", "StockOrder", "StockLocation",
    "Forecast", "FeatureVector", "RegressionModel", "RegressionAlgorithm",
    "Model", "Algorithm", "Dataset", "DatasetSpecification",
    "InformationProvenance", "UseCase", "Insight", "DecisionMakingOption",
})


@dataclass(frozen=True)
class ScopeDef:
    name: str
    labels: Optional[frozenset] = None  # None means the whole graph


DEFAULT_SCOPES = (
    ScopeDef("full"),
    ScopeDef("production_planning", PP_CLASSES),
    ScopeDef("demand_forecasting", DF_CLASSES),
)


@dataclass(frozen=True)
class ScopeMetrics:
    scope: str
    n_nodes: int
    n_relationships: int
    mpl: int
    tpl: int
    apl: float
    sample_fraction: float
    seed: int


def scope_subgraph(graph: GraphStore, labels: Optional[frozenset]):
    """(node ids, undirected adjacency, edge count) for the induced subgraph."""
    if labels is None:
        node_ids = [n.id for n in graph.nodes()]
    else:
        node_ids = sorted(n.id for n in graph.nodes() if n.label in labels)
    keep = set(node_ids)
    adjacency = {nid: [] for nid in node_ids}
    n_edges = 0
    for edge in graph.edges():
        if edge.src in keep and edge.dst in keep:
            adjacency[edge.src].append(edge.dst)
            adjacency[edge.dst].append(edge.src)
            n_edges += 1
    return node_ids, adjacency, n_edges


def _bfs_lengths(adjacency: dict, source: int) -> dict:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        current = queue.popleft()
        for neighbor in adjacency[current]:
            if neighbor not in dist:
                dist[neighbor] = dist[current] + 1
                queue.append(neighbor)
    return dist


def compute_metrics(graph: GraphStore, scope: ScopeDef,
                    sample_fraction: float = 1.0, seed: int = 0) -> ScopeMetrics:
    if not 0.0 < sample_fraction <= 1.0:
        raise ValueError("sample_fraction must be in (0, 1]")
    node_ids, adjacency, n_edges = scope_subgraph(graph, scope.labels)
    if not node_ids:
        raise EmptyGraph(f"scope {scope.name!r} selects no nodes")
    n_sources = min(len(node_ids), max(2, ceil(sample_fraction * len(node_ids))))
    sources = sorted(random.Random(seed).sample(node_ids, n_sources))
    tpl = mpl = pairs = 0
    for source in sources:
        for target, length in _bfs_lengths(adjacency, source).items():
            if target == source:
                continue
            tpl += length
            mpl = max(mpl, length)
            pairs += 1
    return ScopeMetrics(
        scope=scope.name,
        n_nodes=len(node_ids),
        n_relationships=n_edges,
        mpl=mpl,
        tpl=tpl,
        apl=tpl / pairs if pairs else 0.0,
        sample_fraction=sample_fraction,
        seed=seed,
    )


def emit_radar_csv(metrics: list[ScopeMetrics]) -> str:
    out = io.StringIO()
    out.write("scope,n_nodes,n_relationships,mpl,tpl,apl,sample_fraction,seed\n")
    for m in metrics:
        out.write(f"{m.scope},{m.n_nodes},{m.n_relationships},{m.mpl},"
                  f"{m.tpl},{m.apl:.2f},{m.sample_fraction},{m.seed}\n")
    return out.getvalue()
