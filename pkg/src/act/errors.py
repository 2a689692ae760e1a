"""Engine exception hierarchy.

Every error raised across the engine derives from EngineError so the
service layer can map them to HTTP responses with a stable machine code.
"""


class EngineError(Exception):
    """Base class; `code` is the machine-readable identifier."""

    code = "engine.error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class UniqueKeyViolation(EngineError):
    code = "graph.unique_key"


class DanglingEdge(EngineError):
    code = "graph.dangling_edge"


class NotFound(EngineError):
    code = "graph.not_found"


class SnapshotFormatError(EngineError):
    code = "graph.snapshot_format"

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class QuerySyntaxError(EngineError):
    code = "pql.syntax"

    def __init__(self, message: str, offset: int, expected=()):
        super().__init__(f"at byte {offset}: {message}")
        self.offset = offset
        self.expected = tuple(expected)


class UnboundVariable(EngineError):
    code = "pql.unbound_variable"


class VariableLengthBlowup(EngineError):
    code = "pql.blowup"


class RuleSchemaError(EngineError):
    code = "reasoner.rule_schema"


class NonTermination(EngineError):
    code = "reasoner.non_termination"


class SimulationDataError(EngineError):
    code = "models.simulation_data"


class DatasetTooSmall(EngineError):
    code = "models.dataset_too_small"

    def __init__(self, required_days: int, available_days: int):
        super().__init__(
            f"need {required_days} days of history, have {available_days}"
        )
        self.required_days = required_days
        self.available_days = available_days


class SingularDesign(EngineError):
    code = "models.singular_design"


class FeatureUnavailable(EngineError):
    code = "models.feature_unavailable"


class EmptyGraph(EngineError):
    code = "metrics.empty_graph"


class Precondition(EngineError):
    code = "service.precondition"


class DeliveryFailed(EngineError):
    code = "service.delivery_failed"

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts
