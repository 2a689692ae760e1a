"""Domain class and relation registry with conformance validation.

The default registry covers the manufacturing-plant concepts used by the
production-planning and demand-forecasting use cases, each with a short
definition and a continuant/occurrent lineage tag. Relations constrain
(domain label, range label) pairs; a small subclass map lets the model
specializations (SimulationModel, RegressionModel, RegressionAlgorithm)
validate wherever their parent class is accepted.

Violations are data, not exceptions: validators return lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional

from .graph import Edge, GraphStore, Node

CONTINUANT = "continuant"
OCCURRENT = "occurrent"

# specialization -> parent; closed under one level
SUBCLASS_OF = {
    "SimulationModel": "Model",
    "RegressionModel": "Model",
    "RegressionAlgorithm": "Algorithm",
}


def class_and_ancestors(label: str) -> set[str]:
    out = {label}
    while label in SUBCLASS_OF:
        label = SUBCLASS_OF[label]
        out.add(label)
    return out


@dataclass(frozen=True)
class PropertySpec:
    name: str
    value_kind: str  # text | int | float | bool | timestamp
    required: bool = False
    unique: bool = False


@dataclass(frozen=True)
class ClassDef:
    name: str
    lineage: str
    definition: str
    property_specs: tuple[PropertySpec, ...] = ()
    invented: bool = False  # plumbing class, not part of the published concept table


@dataclass(frozen=True)
class RelationDef:
    name: str
    domain: frozenset
    range: frozenset
    cardinality: str = "many-to-many"
    invented: bool = False


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    entity_kind: str  # node | edge
    entity_id: Optional[int] = None
    label: str = ""

    def __str__(self):
        return f"{self.code}: {self.message}"


class OntologyRegistry:
    def __init__(self, classes: list[ClassDef], relations: list[RelationDef]):
        self.classes = {c.name: c for c in classes}
        self.relations = {r.name: r for r in relations}
        for rel in relations:
            for name in rel.domain | rel.range:
                if name not in self.classes:
                    raise ValueError(f"relation {rel.name} names unregistered class {name}")

    def describe(self) -> str:
        """Human-readable schema document, one class/relation per line."""
        lines = []
        for c in sorted(self.classes.values(), key=lambda c: c.name):
            tag = " [plumbing]" if c.invented else ""
            lines.append(f"class {c.name} ({c.lineage}){tag}: {c.definition}")
        for r in sorted(self.relations.values(), key=lambda r: r.name):
            tag = " [plumbing]" if r.invented else ""
            dom = "|".join(sorted(r.domain))
            rng = "|".join(sorted(r.range))
            lines.append(f"relation {r.name} ({dom}) -> ({rng}) [{r.cardinality}]{tag}")
        return "\n".join(lines)


_VALUE_KIND_CHECKS = {
    "text": lambda v: isinstance(v, str),
    "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "bool": lambda v: isinstance(v, bool),
    "timestamp": lambda v: isinstance(v, datetime),
}


def validate_node(node: Node, registry: OntologyRegistry) -> list[Violation]:
    cdef = registry.classes.get(node.label)
    if cdef is None:
        return [Violation("UnknownClass", f"label {node.label!r} is not registered",
                          "node", node.id, node.label)]
    out = []
    for spec in cdef.property_specs:
        if spec.name not in node.properties:
            if spec.required:
                out.append(Violation(
                    "MissingRequiredProperty",
                    f"{node.label} node {node.id} lacks {spec.name!r}",
                    "node", node.id, node.label))
            continue
        if not _VALUE_KIND_CHECKS[spec.value_kind](node.properties[spec.name]):
            out.append(Violation(
                "WrongPropertyKind",
                f"{node.label}.{spec.name} must be {spec.value_kind}",
                "node", node.id, node.label))
    return out


def validate_edge(
    edge: Edge, src: Node, dst: Node, registry: OntologyRegistry
) -> list[Violation]:
    rdef = registry.relations.get(edge.relation)
    if rdef is None:
        return [Violation("UnknownRelation", f"relation {edge.relation!r} is not registered",
                          "edge", edge.id, edge.relation)]
    if not (class_and_ancestors(src.label) & rdef.domain):
        return [Violation("DomainViolation",
                          f"{edge.relation} does not accept source label {src.label}",
                          "edge", edge.id, edge.relation)]
    if not (class_and_ancestors(dst.label) & rdef.range):
        return [Violation("RangeViolation",
                          f"{edge.relation} does not accept target label {dst.label}",
                          "edge", edge.id, edge.relation)]
    return []


@dataclass
class ConformanceReport:
    node_violations: dict = field(default_factory=dict)  # label -> [Violation]
    edge_violations: dict = field(default_factory=dict)  # relation -> [Violation]

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.node_violations.values()) + sum(
            len(v) for v in self.edge_violations.values()
        )

    def all_violations(self) -> list[Violation]:
        out = []
        for vs in self.node_violations.values():
            out.extend(vs)
        for vs in self.edge_violations.values():
            out.extend(vs)
        return out


def conformance_report(graph: GraphStore, registry: OntologyRegistry) -> ConformanceReport:
    report = ConformanceReport()
    for node in graph.nodes():
        vs = validate_node(node, registry)
        if vs:
            report.node_violations.setdefault(node.label, []).extend(vs)
    for edge in graph.edges():
        vs = validate_edge(edge, graph.node(edge.src), graph.node(edge.dst), registry)
        if vs:
            report.edge_violations.setdefault(edge.relation, []).extend(vs)
    return report


def _uuid_spec():
    return PropertySpec("uuid", "text", required=True, unique=True)


def register_default_ontology() -> OntologyRegistry:
    """Build the standard plant registry: 31 concept classes plus the
    Feedback plumbing class, and the relation topology between them."""
    u = _uuid_spec
    classes = [
        ClassDef("Shift", CONTINUANT, "The time period during which a person is at work.",
                 (u(), PropertySpec("start_ts", "timestamp", required=True),
                  PropertySpec("end_ts", "timestamp", required=True))),
        ClassDef("ManufacturingProcess", OCCURRENT,
                 "Process in which materials are changed, converted, or transformed "
                 "into a different state or form from which they previously existed.",
                 (u(),)),
        ClassDef("DataSource", CONTINUANT,
                 "A data source is anything that produces digital information, from the "
                 "perspective of systems which consume this information.", (u(),)),
        ClassDef("FeatureVector", CONTINUANT,
                 "Individual measurable property or characteristic of a phenomenon being observed.",
                 (u(),)),
        ClassDef("DecisionMakingOption", CONTINUANT,
                 "Different alternatives or solutions under consideration when making a decision.",
                 (u(), PropertySpec("description", "text", required=True))),
        ClassDef("UseCase", CONTINUANT,
                 "A list of actions or event steps typically defining the interactions "
                 "between a role and a system to achieve a goal.",
                 (u(), PropertySpec("description", "text", required=True))),
        ClassDef("Forecast", CONTINUANT, "Prediction of a future value.", (u(),)),
        ClassDef("Model", CONTINUANT,
                 "A simplified representation of a system at some particular point in time "
                 "or space intended to promote understanding of the real system.", (u(),)),
        ClassDef("SimulationModel", CONTINUANT,
                 "A model that behaves or operates like a given system when provided a set "
                 "of controlled inputs.", (u(),)),
        ClassDef("RegressionModel", CONTINUANT,
                 "A model that summarises relationships between an array of continuous input "
                 "variables, and a continuous output variable.", (u(),)),
        ClassDef("DatasetSpecification", CONTINUANT,
                 "Is a data item specification about a dataset defined with a data type "
                 "specification of the data examples aggregated in the dataset.", (u(),)),
        ClassDef("Dataset", CONTINUANT, "A collection of data.", (u(),)),
        ClassDef("Algorithm", CONTINUANT,
                 "A finite sequence of well-defined, computer-implementable instructions, to "
                 "solve a class of problems or to perform a computation.", (u(),)),
        ClassDef("RegressionAlgorithm", CONTINUANT,
                 "Regression algorithms predict the output values based on input features "
                 "from the data fed in the system.", (u(),)),
        ClassDef("InformationProvenance", CONTINUANT,
                 "The place of origin or earliest known history of certain data.", (u(),)),
        ClassDef("TimeSeries", CONTINUANT,
                 "A series of data points indexed (or listed or graphed) in time order.", (u(),)),
        ClassDef("WorkOrder", OCCURRENT,
                 "A task or a job for a customer, that can be scheduled or assigned to someone.",
                 (u(),)),
        ClassDef("StockOrder", OCCURRENT,
                 "The ordering of new stock to refill the inventory, replenish shelves, or "
                 "when a large order has been made.", (u(),)),
        ClassDef("ShippingOrder", OCCURRENT,
                 "A copy of the bill of lading containing the shipper's instructions to the "
                 "carrier for transmission of goods.", (u(),)),
        ClassDef("StockLocation", CONTINUANT,
                 "The area in the warehouse where the stock item is stored.", (u(),)),
        ClassDef("Artifact", CONTINUANT,
                 "A general term for an item made or given shape by humans, such as a tool or "
                 "a work of art.", (u(),)),
        ClassDef("ManufacturedBatch", CONTINUANT,
                 "A group of identical or similar items that are produced together, and which "
                 "go through a stage of the production process before moving onto the next one.",
                 (u(),)),
        ClassDef("Material", CONTINUANT,
                 "An independent continuant that at all times at which it exists has some "
                 "portion of matter as continuant part.", (u(),)),
        ClassDef("Person", CONTINUANT, "Is a member of the species Homo sapiens.", (u(),)),
        ClassDef("Client", CONTINUANT,
                 "A company that receives a service from them in return for payment.", (u(),)),
        ClassDef("ShopFloor", CONTINUANT,
                 "The part of a workshop or factory where production as distinct from "
                 "administrative work is carried out.", (u(),)),
        ClassDef("ProductionLine", CONTINUANT,
                 "Is an artifact aggregate enabling a set of sequential operations established "
                 "in a plant site where components are assembled to make a finished article.",
                 (u(),)),
        ClassDef("ProductionPlant", CONTINUANT,
                 "An Artifact that is consisting of buildings and machinery, or more commonly "
                 "a complex having several buildings, where workers manufacture goods.", (u(),)),
        ClassDef("Organization", CONTINUANT,
                 "An object aggregate that corresponds to social institutions such as "
                 "companies, or societies, that does something.", (u(),)),
        ClassDef("Insight", OCCURRENT,
                 "A detected, dated, severity-scored condition derived from forecasts that "
                 "triggers decision-making options.",
                 (u(), PropertySpec("date", "timestamp", required=True),
                  PropertySpec("severity", "float", required=True))),
        ClassDef("Analysis", OCCURRENT,
                 "The outcome of heuristics informing whether production goals are met.", (u(),)),
        # Plumbing: persisted user feedback records.
        ClassDef("Feedback", OCCURRENT,
                 "A user's recorded verdict on a decision-making option for an insight.",
                 (u(), PropertySpec("verdict", "text", required=True),
                  PropertySpec("user", "text", required=True),
                  PropertySpec("recorded_at", "timestamp", required=True)),
                 invented=True),
    ]

    def rel(name, domain, range_, cardinality="many-to-many", invented=False):
        return RelationDef(name, frozenset(domain), frozenset(range_), cardinality, invented)

    relations = [
        rel("FORECASTED_FROM", {"Forecast"}, {"Model"}, "one-to-many"),
        rel("CORRESPONDS_TO", {"Model"}, {"UseCase"}, "one-to-many"),
        rel("EXECUTED_ON", {"Shift"}, {"ProductionLine"}, "one-to-many"),
        rel("SUGGESTS_ACTION_FOR", {"DecisionMakingOption"}, {"Insight"}),
        rel("DESCRIBES_EVENT_IN", {"Insight"}, {"Forecast"}, "one-to-many"),
        rel("BELONGS_TO", {"ProductionLine"}, {"ProductionPlant"}, "one-to-many", invented=True),
        rel("PART_OF", {"ProductionPlant", "ShopFloor"}, {"Organization", "ProductionPlant"},
            "one-to-many", invented=True),
        rel("ASSIGNED_TO", {"Person"}, {"Shift", "ProductionLine"}, invented=True),
        rel("EXECUTES", {"WorkOrder"}, {"ManufacturingProcess"}),
        rel("PRODUCES", {"WorkOrder"}, {"ManufacturedBatch"}, "one-to-many", invented=True),
        rel("OF_MATERIAL", {"ManufacturedBatch", "ShippingOrder", "StockOrder", "WorkOrder"},
            {"Material"}, "one-to-many", invented=True),
        rel("STORED_AT", {"Material"}, {"StockLocation"}, invented=True),
        rel("SHIPS_TO", {"ShippingOrder"}, {"Client"}, "one-to-many", invented=True),
        rel("SPECIFIED_BY", {"Dataset"}, {"DatasetSpecification"}, "one-to-many", invented=True),
        rel("SOURCED_FROM", {"DatasetSpecification"}, {"InformationProvenance"}, invented=True),
        rel("TRAINED_ON", {"RegressionModel"}, {"Dataset"}, invented=True),
        rel("USES_ALGORITHM", {"RegressionModel"}, {"RegressionAlgorithm"}, invented=True),
        rel("INPUT_OF", {"FeatureVector"}, {"Forecast"}, "one-to-one", invented=True),
        rel("OBSERVED_AT", {"TimeSeries"}, {"DataSource"}, invented=True),
        # deductive-only: created by reasoner rules
        rel("WORKS_IN", {"Person"}, {"ProductionPlant"}),
        rel("RELATES_TO", {"Forecast"}, {"UseCase"}),
        # plumbing for the actionable loop
        rel("SCHEDULED_ON", {"WorkOrder"}, {"ProductionLine"}, "one-to-many", invented=True),
        rel("DURING_SHIFT", {"WorkOrder"}, {"Shift"}, "one-to-many", invented=True),
        rel("FORECAST_OF", {"Forecast"}, {"WorkOrder", "Material"}, "one-to-many", invented=True),
        rel("FOR_CLIENT", {"Forecast"}, {"Client"}, "one-to-many", invented=True),
        rel("REFERS_TO", {"Insight"},
            {"Shift", "ProductionLine", "Material", "Client", "WorkOrder", "Model"},
            invented=True),
        rel("FEEDBACK_ON", {"Feedback"}, {"DecisionMakingOption"}, "one-to-many", invented=True),
        rel("FEEDBACK_FOR", {"Feedback"}, {"Insight"}, "one-to-many", invented=True),
    ]
    return OntologyRegistry(classes, relations)
