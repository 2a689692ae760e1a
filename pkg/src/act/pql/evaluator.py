"""Pattern-query evaluation over a graph store.

Matching is backtracking search seeded from label/key indexes where
possible. Variable-length relationships expand trails (edges may not
repeat within one path pattern; nodes may). Expansion is pruned with a
breadth-first distance map toward the nodes admissible for the segment's
far endpoint, which never removes valid matches because trail constraints
can only lengthen paths.

Binding values are tagged tuples so rows sort deterministically:
``("n", id)`` for nodes, ``("e", id)`` for edges, ``("p", (n0, e1, n1,
...))`` for paths, ``("l", value)`` for literals.
"""

from __future__ import annotations

from collections import deque
from datetime import datetime
from typing import Optional

from ..errors import VariableLengthBlowup
from ..graph import GraphStore, Node
from ..ontology import SUBCLASS_OF, class_and_ancestors
from . import ast

DEFAULT_EXPANSION_CAP = 10**6


def _concrete_labels(label: str) -> tuple:
    """The label itself plus every label that subclasses it."""
    return (label, *sorted(sub for sub, sup in SUBCLASS_OF.items()
                           if label in class_and_ancestors(sub) and sub != label))


def node_value(node_id: int):
    return ("n", node_id)


def path_value(seq: tuple):
    return ("p", seq)


class _Evaluation:
    def __init__(self, graph: GraphStore, cap: int,
                 alias: Optional[dict] = None,
                 trail_vars: frozenset = frozenset()):
        self.graph = graph
        self.cap = cap
        self.expansions = 0
        self.alias = alias or {}
        # path variables whose edge sequence is actually projected; other
        # variable-length segments only need reachability, not trails
        self.trail_vars = trail_vars
        self._distance_cache: dict = {}
        self._forward_cache: dict = {}

    def canon(self, name: str) -> str:
        return self.alias.get(name, name)

    def tick(self):
        self.expansions += 1
        if self.expansions > self.cap:
            raise VariableLengthBlowup(
                f"expansion exceeded {self.cap} partial paths; tighten length bounds"
            )

    # -- candidate enumeration -------------------------------------------

    def node_matches(self, node: Node, pattern: ast.NodePattern) -> bool:
        # a label pattern also matches subclasses (e.g. :Model matches
        # SimulationModel and RegressionModel nodes)
        if pattern.label is not None and pattern.label not in class_and_ancestors(node.label):
            return False
        for name, literal in pattern.props:
            if not _prop_equal(node.properties.get(name), literal):
                return False
        return True

    def candidates(self, pattern: ast.NodePattern, binding: dict) -> list[int]:
        if pattern.variable is not None and self.canon(pattern.variable) in binding:
            tag, value = binding[self.canon(pattern.variable)]
            if tag != "n":
                return []
            return [value] if self.node_matches(self.graph.node(value), pattern) else []
        # seed from the unique key index when the pattern pins one
        for name, literal in pattern.props:
            if pattern.label and name in self.graph.unique_keys:
                found = []
                for label in _concrete_labels(pattern.label):
                    node = self.graph.node_by_key(label, name, literal)
                    if node is not None and self.node_matches(node, pattern):
                        found.append(node.id)
                return found
        if pattern.label is not None:
            pool = [n for label in _concrete_labels(pattern.label)
                    for n in self.graph.nodes_by_label(label)]
        else:
            pool = list(self.graph.nodes())
        return sorted(n.id for n in pool if self.node_matches(n, pattern))

    def step_neighbors(self, node_id: int, rel: ast.RelPattern):
        direction = {"right": "out", "left": "in", "undirected": "both"}[rel.direction]
        return self.graph.neighbors(node_id, direction, rel.relation)

    # -- distance pruning for variable-length segments --------------------

    def distances_to(self, targets: tuple, rel: ast.RelPattern) -> dict[int, int]:
        """BFS distance from every node to the nearest target, walking the
        relation backwards (admissible lower bound for trail search)."""
        key = (targets, rel.relation, rel.direction)
        cached = self._distance_cache.get(key)
        if cached is not None:
            return cached
        reverse = {"right": "in", "left": "out", "undirected": "both"}[rel.direction]
        dist = {t: 0 for t in targets}
        queue = deque(targets)
        while queue:
            current = queue.popleft()
            for edge, other in self.graph.neighbors(current, reverse, rel.relation):
                if other.id not in dist:
                    dist[other.id] = dist[current] + 1
                    queue.append(other.id)
        self._distance_cache[key] = dist
        return dist

    def distances_from(self, start: int, rel: ast.RelPattern,
                       used: frozenset = frozenset()) -> dict[int, int]:
        """BFS distance from a start node, walking the relation forwards,
        bounded by the segment's maximum length.  Edges in `used` are
        unavailable (they were consumed earlier in the same path)."""
        key = (start, rel.relation, rel.direction, rel.max_len, used)
        cached = self._forward_cache.get(key)
        if cached is not None:
            return cached
        dist = {start: 0}
        queue = deque([start])
        while queue:
            current = queue.popleft()
            if dist[current] == rel.max_len:
                continue
            for edge, other in self.step_neighbors(current, rel):
                if edge.id not in used and other.id not in dist:
                    self.tick()
                    dist[other.id] = dist[current] + 1
                    queue.append(other.id)
        self._forward_cache[key] = dist
        return dist

    def _exists_trail(self, start: int, target: int, rel: ast.RelPattern,
                      used: frozenset) -> bool:
        """True when some trail from `start` to `target` has a length within
        the segment bounds.  Used when the shortest path is below the minimum
        length, so BFS distance alone cannot answer the question."""
        def walk(current: int, depth: int, taken: frozenset) -> bool:
            if current == target and rel.min_len <= depth:
                return True
            if depth == rel.max_len:
                return False
            for edge, other in self.step_neighbors(current, rel):
                if edge.id in taken or edge.id in used:
                    continue
                self.tick()
                if walk(other.id, depth + 1, taken | {edge.id}):
                    return True
            return False

        return walk(start, 0, frozenset())

    # -- path pattern matching --------------------------------------------

    def match_path(self, pattern: ast.PathPattern, binding: dict):
        """Yield bindings extending `binding` for one path pattern."""
        first = pattern.nodes[0]
        for start in self.candidates(first, binding):
            self.tick()
            local = dict(binding)
            if first.variable:
                local[self.canon(first.variable)] = node_value(start)
            yield from self._extend(pattern, 0, start, local, (start,), frozenset())

    def _extend(self, pattern: ast.PathPattern, seg: int, current: int,
                binding: dict, trail: tuple, used: frozenset):
        if seg == len(pattern.rels):
            final = dict(binding)
            # an unprojected path variable is invisible to RETURN/WHERE, so it
            # is left out of the binding (alternate trails between the same
            # endpoints then collapse under set semantics)
            if pattern.path_var in self.trail_vars:
                final[pattern.path_var] = path_value(trail)
            yield final
            return
        rel = pattern.rels[seg]
        nxt = pattern.nodes[seg + 1]
        if not rel.is_variable_length:
            for edge, other in self.step_neighbors(current, rel):
                if edge.id in used:
                    continue
                self.tick()
                if rel.variable is not None:
                    bound = binding.get(self.canon(rel.variable))
                    if bound is not None and bound != ("e", edge.id):
                        continue
                if not self._accepts(nxt, other, binding):
                    continue
                local = dict(binding)
                if rel.variable:
                    local[self.canon(rel.variable)] = ("e", edge.id)
                if nxt.variable:
                    local[self.canon(nxt.variable)] = node_value(other.id)
                yield from self._extend(pattern, seg + 1, other.id, local,
                                        trail + (edge.id, other.id), used | {edge.id})
            return
        targets = tuple(self.candidates(nxt, binding))
        if not targets:
            return
        if (pattern.path_var not in self.trail_vars
                and seg == len(pattern.rels) - 1):
            # the path is never projected and nothing follows this segment,
            # so a reachability check is enough: bind every endpoint with an
            # admissible trail (later segments would need the consumed edges
            # threaded through, hence the last-segment restriction)
            fwd = self.distances_from(current, rel, used)
            for target in targets:
                depth = fwd.get(target)
                if depth is None:
                    continue  # no walk within max_len, hence no trail
                if depth < rel.min_len:
                    # shortest path is too short; a longer trail may still fit
                    if not self._exists_trail(current, target, rel, used):
                        continue
                elif depth > rel.max_len:
                    continue
                local = dict(binding)
                if nxt.variable:
                    local[self.canon(nxt.variable)] = node_value(target)
                yield from self._extend(pattern, seg + 1, target, local,
                                        trail, used)
            return
        # depth-first trail enumeration with distance pruning
        dist = self.distances_to(targets, rel)
        target_set = set(targets)

        def walk(node_id: int, depth: int, trail_acc: tuple, used_acc: frozenset):
            if depth >= rel.min_len and node_id in target_set:
                local = dict(binding)
                if nxt.variable:
                    local[self.canon(nxt.variable)] = node_value(node_id)
                yield from self._extend(pattern, seg + 1, node_id, local,
                                        trail_acc, used_acc)
            if depth == rel.max_len:
                return
            remaining = rel.max_len - depth
            for edge, other in self.step_neighbors(node_id, rel):
                if edge.id in used_acc:
                    continue
                if dist.get(other.id, remaining + 1) > remaining - 1:
                    continue
                self.tick()
                yield from walk(other.id, depth + 1,
                                trail_acc + (edge.id, other.id), used_acc | {edge.id})

        yield from walk(current, 0, trail, used)

    def _accepts(self, pattern: ast.NodePattern, node: Node, binding: dict) -> bool:
        # label/property predicates always apply; a bound variable must also
        # re-match the same node
        if pattern.variable is not None and self.canon(pattern.variable) in binding:
            if binding[self.canon(pattern.variable)] != node_value(node.id):
                return False
        return self.node_matches(node, pattern)


def _prop_equal(stored, literal) -> bool:
    if stored is None:
        return False
    if isinstance(stored, bool) != isinstance(literal, bool):
        return False
    if isinstance(stored, datetime) != isinstance(literal, datetime):
        return False
    return stored == literal


def _operand_value(operand, binding, graph: GraphStore, canon):
    if isinstance(operand, ast.Var):
        return binding[canon(operand.name)]
    if isinstance(operand, ast.Literal):
        return ("l", operand.value)
    tag, value = binding[canon(operand.var)]
    entity = graph.node(value) if tag == "n" else graph.edge(value)
    prop = entity.properties.get(operand.name)
    return ("l", prop) if prop is not None else None


def _where_holds(where, binding, graph, canon) -> bool:
    for comparison in where:
        left = _operand_value(comparison.left, binding, graph, canon)
        right = _operand_value(comparison.right, binding, graph, canon)
        if left is None or right is None:
            return False  # missing property: comparison cannot hold
        equal = left == right
        if comparison.op == "=" and not equal:
            return False
        if comparison.op == "<>" and equal:
            return False
    return True


def _sort_key(value):
    tag, payload = value
    if tag == "p":
        return (tag, tuple(payload), "")
    if tag == "l":
        return (tag, (), _literal_key(payload))
    return (tag, (payload,), "")


def _literal_key(value) -> str:
    if isinstance(value, datetime):
        return "t" + value.isoformat()
    return f"{type(value).__name__}:{value!r}"


def _equality_aliases(query: ast.Query) -> dict:
    """Map variables equated by WHERE (``f1 = f2``) onto one canonical name,
    so the equality joins during matching instead of filtering afterwards."""
    parent: dict = {}

    def find(name):
        parent.setdefault(name, name)
        while parent[name] != name:
            parent[name] = parent[parent[name]]
            name = parent[name]
        return name

    for comparison in query.where:
        if (comparison.op == "=" and isinstance(comparison.left, ast.Var)
                and isinstance(comparison.right, ast.Var)):
            a, b = find(comparison.left.name), find(comparison.right.name)
            if a != b:
                parent[max(a, b)] = min(a, b)
    return {name: find(name) for name in parent if find(name) != name}


def _projected_path_vars(query: ast.Query) -> frozenset:
    """Path variables whose edge sequence must be materialized."""
    out = {item.variable for item in query.return_items}
    for comparison in query.where:
        for operand in (comparison.left, comparison.right):
            if isinstance(operand, ast.Var):
                out.add(operand.name)
            elif isinstance(operand, ast.Prop):
                out.add(operand.var)
    return frozenset(out)


def evaluate(
    query: ast.Query,
    graph: GraphStore,
    cap: int = DEFAULT_EXPANSION_CAP,
) -> list[tuple]:
    """Evaluate a parsed query; returns projected rows in deterministic order.

    Each row is a tuple aligned with ``query.return_items`` holding tagged
    values (see module docstring); ``relationships(p)`` projects the tuple
    of edge ids of the bound path.
    """
    evaln = _Evaluation(graph, cap, alias=_equality_aliases(query),
                        trail_vars=_projected_path_vars(query))
    bindings = [dict()]
    for pattern in query.matches:
        # set semantics: identical bindings (same variables, same values)
        # collapse to one, so anonymous parallel edges and unprojected
        # alternate trails never multiply rows
        extended, seen = [], set()
        for binding in bindings:
            for candidate in evaln.match_path(pattern, binding):
                key = frozenset(candidate.items())
                if key not in seen:
                    seen.add(key)
                    extended.append(candidate)
        bindings = extended
        if not bindings:
            break
    rows = []
    for binding in bindings:
        if not _where_holds(query.where, binding, graph, evaln.canon):
            continue
        row = []
        for item in query.return_items:
            value = binding[evaln.canon(item.variable)]
            if item.function == "relationships":
                tag, payload = value
                if tag != "p":
                    raise ValueError("relationships() expects a path variable")
                row.append(("l", tuple(payload[1::2])))
            else:
                row.append(value)
        rows.append(tuple(row))
    rows.sort(key=lambda row: tuple(_sort_key(v) for v in row))
    if query.distinct:
        deduped = []
        previous = object()
        for row in rows:
            if row != previous:
                deduped.append(row)
            previous = row
        rows = deduped
    return rows


def render_value(value, graph: GraphStore):
    """JSON-friendly rendering of a tagged row value."""
    from ..graph import ts_to_text

    def props_out(props):
        return {k: (ts_to_text(v) if isinstance(v, datetime) else v) for k, v in props.items()}

    tag, payload = value
    if tag == "n":
        node = graph.node(payload)
        return {"type": "node", "id": node.id, "label": node.label,
                "props": props_out(node.properties)}
    if tag == "e":
        edge = graph.edge(payload)
        return {"type": "edge", "id": edge.id, "relation": edge.relation,
                "src": edge.src, "dst": edge.dst, "props": props_out(edge.properties)}
    if tag == "p":
        return {"type": "path", "sequence": list(payload)}
    if isinstance(payload, tuple):
        return {"type": "edges", "ids": list(payload)}
    if isinstance(payload, datetime):
        return ts_to_text(payload)
    return payload
