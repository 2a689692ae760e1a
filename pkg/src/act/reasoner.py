"""Forward-chaining rule reasoner.

Rules pair a pattern query (the antecedent) with an edge template (the
consequent).  Applying a rule evaluates the antecedent against the graph
and materializes one edge per result row, skipping edges that already
exist.  ``materialize_all`` runs the rule set to a fixpoint, so rules may
feed each other; derived edges carry deductive provenance naming the rule.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Optional

from .errors import NonTermination, RuleSchemaError
from .graph import GraphStore, Provenance
from .pql import evaluate, parse

MAX_ROUNDS = 32

_CONSEQUENT_RE = re.compile(
    r"^\(\s*(?P<src>[A-Za-z_][A-Za-z0-9_]*)\s*\)\s*"
    r"-\s*\[\s*:\s*(?P<rel>[A-Z][A-Z0-9_]*)\s*\]\s*->\s*"
    r"\(\s*(?P<dst>[A-Za-z_][A-Za-z0-9_]*)\s*\)$"
)


@dataclass(frozen=True)
class Rule:
    name: str
    antecedent: str  # pattern query returning the two endpoint variables
    relation: str
    src_var: str
    dst_var: str

    def __post_init__(self) -> None:
        query = parse(self.antecedent)
        returned = {item.variable for item in query.return_items}
        for var in (self.src_var, self.dst_var):
            if var not in returned:
                raise RuleSchemaError(
                    f"rule {self.name!r}: consequent variable {var!r} "
                    "is not returned by the antecedent"
                )


@dataclass
class RuleReport:
    rounds: int = 0
    edges_created: dict = None

    def __post_init__(self) -> None:
        if self.edges_created is None:
            self.edges_created = {}

    @property
    def total_edges(self) -> int:
        return sum(self.edges_created.values())


def parse_rule(text: str) -> Rule:
    """Parse ``RULE <name>: <query> => (src)-[:REL]->(dst)``."""
    head, sep, consequent = text.partition("=>")
    if not sep:
        raise RuleSchemaError("rule is missing the '=>' consequent separator")
    match = re.match(r"\s*RULE\s+([A-Za-z_][A-Za-z0-9_\-]*)\s*:\s*", head,
                     re.IGNORECASE)
    if not match:
        raise RuleSchemaError("rule must start with 'RULE <name>:'")
    template = _CONSEQUENT_RE.match(consequent.strip())
    if not template:
        raise RuleSchemaError(
            "rule consequent must look like (src)-[:RELATION]->(dst)"
        )
    return Rule(
        name=match.group(1),
        antecedent=head[match.end():].strip(),
        relation=template.group("rel"),
        src_var=template.group("src"),
        dst_var=template.group("dst"),
    )


def parse_rule_file(text: str) -> list[Rule]:
    rules = []
    for block in text.split("\n\n"):
        lines = [ln for ln in block.splitlines()
                 if ln.strip() and not ln.strip().startswith("#")]
        if lines:
            rules.append(parse_rule(" ".join(lines)))
    return rules


def default_rules() -> list[Rule]:
    return [
        Rule(
            name="works-in-plant",
            antecedent=(
                "MATCH (p:Person)-[:ASSIGNED_TO]->(l:ProductionLine)"
                "-[:BELONGS_TO]->(pp:ProductionPlant) RETURN p, pp"
            ),
            relation="WORKS_IN",
            src_var="p",
            dst_var="pp",
        ),
        Rule(
            name="forecast-relates-to-use-case",
            antecedent=(
                "MATCH (f:Forecast)-[:FORECASTED_FROM]->(m:Model)"
                "-[:CORRESPONDS_TO]->(uc:UseCase) RETURN f, uc"
            ),
            relation="RELATES_TO",
            src_var="f",
            dst_var="uc",
        ),
    ]


def apply_rule(rule: Rule, graph: GraphStore,
               when: Optional[datetime] = None) -> int:
    query = parse(rule.antecedent)
    index = {item.variable: i for i, item in enumerate(query.return_items)}
    prov = Provenance.at("deductive", rule.name, when)
    created = 0
    for row in evaluate(query, graph):
        src = row[index[rule.src_var]]
        dst = row[index[rule.dst_var]]
        if src[0] != "n" or dst[0] != "n":
            raise RuleSchemaError(
                f"rule {rule.name!r}: consequent endpoints must be nodes"
            )
        if not graph.has_edge(rule.relation, src[1], dst[1]):
            graph.add_edge(rule.relation, src[1], dst[1], {}, prov)
            created += 1
    return created


def materialize_all(graph: GraphStore, rules: Optional[list[Rule]] = None,
                    when: Optional[datetime] = None) -> RuleReport:
    """Run the rules to a fixpoint; a round with no new edges terminates."""
    if rules is None:
        rules = default_rules()
    report = RuleReport()
    for _ in range(MAX_ROUNDS):
        report.rounds += 1
        round_created = 0
        for rule in rules:
            created = apply_rule(rule, graph, when)
            if created:
                report.edges_created[rule.name] = (
                    report.edges_created.get(rule.name, 0) + created
                )
                round_created += created
        if round_created == 0:
            return report
    raise NonTermination(
        f"rule materialization did not reach a fixpoint in {MAX_ROUNDS} rounds"
    )


def stale_models(graph: GraphStore, now: datetime,
                 max_age: timedelta) -> tuple[list, list[str]]:
    """Models whose trained_at is strictly older than max_age, oldest first.

    Returns (stale nodes, warnings for models missing a trained_at).
    """
    if now.tzinfo is None:
        now = now.replace(tzinfo=timezone.utc)
    stale, warnings = [], []
    for label in ("SimulationModel", "RegressionModel", "Model"):
        for node in graph.nodes_by_label(label):
            trained = node.properties.get("trained_at")
            if trained is None:
                warnings.append(
                    f"{label} {node.properties.get('uuid')!r} has no trained_at"
                )
            elif now - trained > max_age:
                stale.append(node)
    stale.sort(key=lambda n: (n.properties["trained_at"], n.id))
    return stale, warnings
