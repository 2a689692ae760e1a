"""AST for the pattern query language.

A query is one or more MATCH clauses (each optionally binding a path
variable), an optional WHERE conjunction and a RETURN clause. Literals
cover text, numbers, booleans and date/datetime values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Union

from ..graph import ts_to_text

LEFT = "left"
RIGHT = "right"
UNDIRECTED = "undirected"

DEFAULT_VAR_MIN = 1
DEFAULT_VAR_MAX = 6


@dataclass(frozen=True)
class NodePattern:
    variable: Optional[str] = None
    label: Optional[str] = None
    props: tuple = ()  # ((name, literal), ...) in source order

    def to_text(self) -> str:
        parts = self.variable or ""
        if self.label:
            parts += f":{self.label}"
        if self.props:
            inner = ", ".join(f"{k}: {literal_to_text(v)}" for k, v in self.props)
            parts += "{" + inner + "}"
        return f"({parts})"


@dataclass(frozen=True)
class RelPattern:
    variable: Optional[str] = None
    relation: Optional[str] = None
    direction: str = UNDIRECTED
    min_len: int = 1
    max_len: int = 1

    @property
    def is_variable_length(self) -> bool:
        return (self.min_len, self.max_len) != (1, 1)

    def to_text(self) -> str:
        body = self.variable or ""
        if self.relation:
            body += f":{self.relation}"
        if self.is_variable_length:
            if (self.min_len, self.max_len) == (DEFAULT_VAR_MIN, DEFAULT_VAR_MAX):
                body += "*"
            else:
                body += f"*{self.min_len}..{self.max_len}"
        core = f"[{body}]"
        left = "<-" if self.direction == LEFT else "-"
        right = "->" if self.direction == RIGHT else "-"
        return f"{left}{core}{right}"


@dataclass(frozen=True)
class PathPattern:
    path_var: Optional[str]
    nodes: tuple  # NodePattern, len k+1
    rels: tuple  # RelPattern, len k

    def to_text(self) -> str:
        out = []
        for i, np in enumerate(self.nodes):
            out.append(np.to_text())
            if i < len(self.rels):
                out.append(self.rels[i].to_text())
        text = "".join(out)
        return f"{self.path_var} = {text}" if self.path_var else text

    def variables(self) -> set[str]:
        out = set()
        if self.path_var:
            out.add(self.path_var)
        for np in self.nodes:
            if np.variable:
                out.add(np.variable)
        for rp in self.rels:
            if rp.variable:
                out.add(rp.variable)
        return out


# -- WHERE operands/comparisons -------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def to_text(self):
        return self.name


@dataclass(frozen=True)
class Prop:
    var: str
    name: str

    def to_text(self):
        return f"{self.var}.{self.name}"


@dataclass(frozen=True)
class Literal:
    value: object

    def to_text(self):
        return literal_to_text(self.value)


Operand = Union[Var, Prop, Literal]


@dataclass(frozen=True)
class Comparison:
    op: str  # "=" | "<>"
    left: Operand
    right: Operand

    def to_text(self):
        return f"{self.left.to_text()} {self.op} {self.right.to_text()}"


# -- RETURN ----------------------------------------------------------------


@dataclass(frozen=True)
class ReturnItem:
    variable: str
    function: Optional[str] = None  # only "relationships"

    def to_text(self):
        if self.function:
            return f"{self.function}({self.variable})"
        return self.variable


@dataclass(frozen=True)
class Query:
    matches: tuple  # PathPattern
    where: tuple  # Comparison, conjunction
    return_items: tuple  # ReturnItem
    distinct: bool = False

    def to_text(self) -> str:
        parts = [f"MATCH {m.to_text()}" for m in self.matches]
        if self.where:
            parts.append("WHERE " + " AND ".join(c.to_text() for c in self.where))
        ret = "RETURN "
        if self.distinct:
            ret += "distinct "
        ret += ", ".join(i.to_text() for i in self.return_items)
        parts.append(ret)
        return "\n".join(parts) + ";"

    def bound_variables(self) -> set[str]:
        out = set()
        for m in self.matches:
            out |= m.variables()
        return out


def literal_to_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    if isinstance(value, datetime):
        text = ts_to_text(value)
        if text.endswith("T00:00:00.000Z"):
            return f"date('{text[:10]}')"
        return f"datetime('{text[:19]}')"
    return repr(value)
