"""Hand-rolled tokenizer and recursive-descent parser for pattern queries.

Keywords are case-insensitive; ``//`` starts a line comment. Syntax errors
carry the byte offset and the token set the parser expected there.
"""

from __future__ import annotations

import re
from datetime import datetime, timezone
from typing import Optional

from ..errors import QuerySyntaxError, UnboundVariable
from . import ast

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<string>'(?:\\.|[^'\\])*')
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><>|<-|->|\.\.|[()\[\]{}:,;=<>\-.*])
    """,
    re.VERBOSE,
)

KEYWORDS = {"match", "where", "return", "distinct", "and"}


class _Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind, text, offset):
        self.kind = kind  # string | number | name | op | eof
        self.text = text
        self.offset = offset

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}@{self.offset})"


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        tokens.append(_Token(m.lastgroup, m.group(), m.start()))
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    # -- token helpers ---------------------------------------------------

    def peek(self, ahead=0) -> _Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at_op(self, text) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text == text

    def at_keyword(self, word) -> bool:
        tok = self.peek()
        return tok.kind == "name" and tok.text.lower() == word

    def expect_op(self, text) -> _Token:
        if not self.at_op(text):
            self.fail(f"expected {text!r}", [text])
        return self.advance()

    def expect_name(self, expected="identifier") -> _Token:
        tok = self.peek()
        if tok.kind != "name" or tok.text.lower() in KEYWORDS:
            self.fail(f"expected {expected}", [expected])
        return self.advance()

    def fail(self, message, expected=()):
        tok = self.peek()
        raise QuerySyntaxError(f"{message}, found {tok.text or 'end of input'!r}",
                               tok.offset, expected)

    # -- grammar ---------------------------------------------------------

    def parse_query(self) -> ast.Query:
        matches = []
        if not self.at_keyword("match"):
            self.fail("expected MATCH", ["MATCH"])
        while self.at_keyword("match"):
            self.advance()
            matches.append(self.parse_path_pattern())
        where = ()
        if self.at_keyword("where"):
            self.advance()
            where = self.parse_where()
        if not self.at_keyword("return"):
            self.fail("expected RETURN", ["RETURN"])
        self.advance()
        distinct = False
        if self.at_keyword("distinct"):
            self.advance()
            distinct = True
        items = [self.parse_return_item()]
        while self.at_op(","):
            self.advance()
            items.append(self.parse_return_item())
        if self.at_op(";"):
            self.advance()
        if self.peek().kind != "eof":
            self.fail("expected end of query", [";"])
        query = ast.Query(tuple(matches), tuple(where), tuple(items), distinct)
        _check_bound(query)
        return query

    def parse_path_pattern(self) -> ast.PathPattern:
        path_var = None
        if self.peek().kind == "name" and self.peek(1).kind == "op" and self.peek(1).text == "=":
            path_var = self.expect_name().text
            self.advance()  # '='
        wrapped = self.at_op("(") and self.peek(1).kind == "op" and self.peek(1).text == "("
        if wrapped:
            self.advance()
        nodes = [self.parse_node_pattern()]
        rels = []
        while self.at_op("-") or self.at_op("<-"):
            rels.append(self.parse_rel_pattern())
            nodes.append(self.parse_node_pattern())
        if wrapped:
            self.expect_op(")")
        return ast.PathPattern(path_var, tuple(nodes), tuple(rels))

    def parse_node_pattern(self) -> ast.NodePattern:
        self.expect_op("(")
        variable = None
        label = None
        props = ()
        if self.peek().kind == "name":
            variable = self.advance().text
        if self.at_op(":"):
            self.advance()
            label = self.expect_name("label").text
        if self.at_op("{"):
            props = self.parse_prop_map()
        if variable is None and label is None and not props:
            self.fail("empty node pattern", ["variable", "label", "{"])
        self.expect_op(")")
        return ast.NodePattern(variable, label, props)

    def parse_prop_map(self) -> tuple:
        self.expect_op("{")
        props = []
        while True:
            name = self.expect_name("property name").text
            self.expect_op(":")
            props.append((name, self.parse_literal()))
            if self.at_op(","):
                self.advance()
                continue
            break
        self.expect_op("}")
        return tuple(props)

    def parse_rel_pattern(self) -> ast.RelPattern:
        direction = ast.UNDIRECTED
        if self.at_op("<-"):
            direction = ast.LEFT
            self.advance()
        else:
            self.expect_op("-")
        variable = None
        relation = None
        min_len, max_len = 1, 1
        if self.at_op("["):
            self.advance()
            if self.peek().kind == "name":
                variable = self.advance().text
            if self.at_op(":"):
                self.advance()
                relation = self.expect_name("relation name").text
            if self.at_op("*"):
                self.advance()
                min_len, max_len = ast.DEFAULT_VAR_MIN, ast.DEFAULT_VAR_MAX
                if self.peek().kind == "number":
                    min_len = int(self.advance().text)
                    max_len = min_len
                    if self.at_op(".."):
                        self.advance()
                        max_len = int(self.advance().text)
                if variable is not None:
                    self.fail("variable bindings on variable-length relationships "
                              "are not supported", [])
                if min_len < 1 or min_len > max_len:
                    self.fail(f"bad length bounds [{min_len},{max_len}]", [])
            self.expect_op("]")
        if self.at_op("->"):
            if direction == ast.LEFT:
                self.fail("relationship cannot point both ways", ["-"])
            direction = ast.RIGHT
            self.advance()
        else:
            self.expect_op("-")
        return ast.RelPattern(variable, relation, direction, min_len, max_len)

    def parse_where(self) -> tuple:
        comparisons = list(self.parse_comparison_chain())
        while self.at_keyword("and"):
            self.advance()
            comparisons.extend(self.parse_comparison_chain())
        return tuple(comparisons)

    def parse_comparison_chain(self):
        """``a <> b <> c`` desugars to the adjacent pairs a<>b, b<>c."""
        operands = [self.parse_operand()]
        ops = []
        while self.at_op("=") or self.at_op("<>"):
            ops.append(self.advance().text)
            operands.append(self.parse_operand())
        if not ops:
            self.fail("expected comparison operator", ["=", "<>"])
        for idx, op in enumerate(ops):
            yield ast.Comparison(op, operands[idx], operands[idx + 1])

    def parse_operand(self):
        tok = self.peek()
        if tok.kind == "name" and tok.text.lower() not in ("date", "datetime", "true", "false"):
            name = self.advance().text
            if self.at_op("."):
                self.advance()
                return ast.Prop(name, self.expect_name("property name").text)
            return ast.Var(name)
        return ast.Literal(self.parse_literal())

    def parse_literal(self):
        tok = self.peek()
        if tok.kind == "string":
            self.advance()
            return _unquote(tok.text)
        if tok.kind == "number":
            self.advance()
            return float(tok.text) if "." in tok.text else int(tok.text)
        if tok.kind == "name":
            word = tok.text.lower()
            if word in ("true", "false"):
                self.advance()
                return word == "true"
            if word in ("date", "datetime"):
                self.advance()
                self.expect_op("(")
                text_tok = self.peek()
                if text_tok.kind != "string":
                    self.fail("expected quoted date text", ["string"])
                self.advance()
                value = _parse_datetime(word, _unquote(text_tok.text), text_tok.offset)
                self.expect_op(")")
                return value
        self.fail("expected literal", ["string", "number", "date(", "datetime(", "true", "false"])

    def parse_return_item(self) -> ast.ReturnItem:
        name = self.expect_name("return expression").text
        if self.at_op("("):
            if name != "relationships":
                self.fail(f"unknown function {name!r}", ["relationships"])
            self.advance()
            var = self.expect_name().text
            self.expect_op(")")
            return ast.ReturnItem(var, "relationships")
        return ast.ReturnItem(name)


def _unquote(text: str) -> str:
    return text[1:-1].replace("\\'", "'").replace("\\\\", "\\")


def _parse_datetime(kind: str, text: str, offset: int) -> datetime:
    fmt = "%Y-%m-%d" if kind == "date" else "%Y-%m-%dT%H:%M:%S"
    try:
        return datetime.strptime(text, fmt).replace(tzinfo=timezone.utc)
    except ValueError:
        raise QuerySyntaxError(f"bad {kind} literal {text!r}", offset) from None


def _check_bound(query: ast.Query):
    bound = query.bound_variables()
    for comparison in query.where:
        for operand in (comparison.left, comparison.right):
            name = getattr(operand, "var", None) or (
                operand.name if isinstance(operand, ast.Var) else None
            )
            if name is not None and name not in bound:
                raise UnboundVariable(f"variable {name!r} is not bound by any MATCH")
    for item in query.return_items:
        if item.variable not in bound:
            raise UnboundVariable(f"variable {item.variable!r} is not bound by any MATCH")


def parse(text: str) -> ast.Query:
    """Parse query text into an AST; raises QuerySyntaxError/UnboundVariable."""
    return _Parser(text).parse_query()
