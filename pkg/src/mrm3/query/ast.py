"""Syntax tree for the Cypher subset, plus a canonical printer.

``pretty_print(parse(text))`` reparses to an equal tree; boolean operators
are printed fully parenthesised so precedence never has to be reconstructed.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Union

from .lexer import KEYWORDS

# -- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: Any  # None, bool, int, float, str, or tuple of scalars


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class PropertyAccess:
    variable: str
    key: str


@dataclass(frozen=True)
class Comparison:
    op: str  # one of = <> < <= > >=
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class BoolOp:
    op: str  # AND or OR
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Not:
    operand: "Expression"


Expression = Union[Literal, Variable, PropertyAccess, Comparison, BoolOp, Not]

COMPARISON_OPS = ("=", "<>", "<", "<=", ">", ">=")

# -- patterns and clauses --------------------------------------------------


@dataclass(frozen=True)
class NodePattern:
    variable: str | None = None
    label: str | None = None
    properties: tuple[tuple[str, Literal], ...] = ()


@dataclass(frozen=True)
class RelPattern:
    variable: str | None = None
    type: str | None = None
    direction: str = "->"  # "->" left-to-right, "<-" right-to-left, "--" undirected


@dataclass(frozen=True)
class MatchClause:
    nodes: tuple[NodePattern, ...]
    rels: tuple[RelPattern, ...] = ()

    def __post_init__(self):
        if not self.nodes or len(self.rels) != len(self.nodes) - 1:
            raise ValueError("a path alternates node and relationship patterns")

    def variables(self) -> list[str]:
        """Variables in order of first appearance along the path."""
        seen: list[str] = []
        for idx, node in enumerate(self.nodes):
            if idx:
                rel = self.rels[idx - 1]
                if rel.variable and rel.variable not in seen:
                    seen.append(rel.variable)
            if node.variable and node.variable not in seen:
                seen.append(node.variable)
        return seen


@dataclass(frozen=True)
class ReturnItem:
    expression: Expression
    alias: str | None = None

    @property
    def column(self) -> str:
        return self.alias if self.alias is not None else format_expression(self.expression)


@dataclass(frozen=True)
class OrderKey:
    expression: Expression
    ascending: bool = True


@dataclass(frozen=True)
class Query:
    matches: tuple[MatchClause, ...]
    where: Expression | None
    returns: tuple[ReturnItem, ...]
    order: tuple[OrderKey, ...] = ()
    limit: int | None = None

    @property
    def columns(self) -> list[str]:
        return [item.column for item in self.returns]

    def variables(self) -> list[str]:
        seen: list[str] = []
        for clause in self.matches:
            for name in clause.variables():
                if name not in seen:
                    seen.append(name)
        return seen


# -- printing --------------------------------------------------------------

_PLAIN_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def format_name(name: str) -> str:
    if _PLAIN_IDENT.match(name) and name.upper() not in KEYWORDS:
        return name
    return "`" + name.replace("`", "``") + "`"


def format_key(name: str) -> str:
    # after '.' or ':' keywords are fine as names
    return name if _PLAIN_IDENT.match(name) else "`" + name.replace("`", "``") + "`"


def format_string(text: str) -> str:
    body = json.dumps(text, ensure_ascii=False)[1:-1]
    body = body.replace("\\\"", '"').replace("'", "\\'")
    return f"'{body}'"


def format_literal(value: Any) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return format_string(value)
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(format_literal(v) for v in value) + "]"
    raise TypeError(f"cannot format literal {value!r}")


def format_expression(expr: Expression) -> str:
    if isinstance(expr, Literal):
        return format_literal(expr.value)
    if isinstance(expr, Variable):
        return format_name(expr.name)
    if isinstance(expr, PropertyAccess):
        return f"{format_name(expr.variable)}.{format_key(expr.key)}"
    if isinstance(expr, Comparison):
        return f"{_operand(expr.left)} {expr.op} {_operand(expr.right)}"
    if isinstance(expr, BoolOp):
        return f"({format_expression(expr.left)} {expr.op} {format_expression(expr.right)})"
    if isinstance(expr, Not):
        return f"NOT {_operand(expr.operand)}"
    raise TypeError(f"unknown expression {expr!r}")


def _operand(expr: Expression) -> str:
    text = format_expression(expr)
    if isinstance(expr, (Comparison, Not)):
        return f"({text})"
    return text


def format_node(node: NodePattern) -> str:
    text = format_name(node.variable) if node.variable else ""
    if node.label:
        text += f":{format_key(node.label)}"
    if node.properties:
        props = ", ".join(f"{format_key(k)}: {format_expression(v)}" for k, v in node.properties)
        text += (" " if text else "") + "{" + props + "}"
    return f"({text})"


def format_rel(rel: RelPattern) -> str:
    inner = format_name(rel.variable) if rel.variable else ""
    if rel.type:
        inner += f":{format_key(rel.type)}"
    body = f"[{inner}]" if inner else ""
    if rel.direction == "->":
        return f"-{body}->"
    if rel.direction == "<-":
        return f"<-{body}-"
    return f"-{body}-"


def format_path(clause: MatchClause) -> str:
    parts = [format_node(clause.nodes[0])]
    for rel, node in zip(clause.rels, clause.nodes[1:]):
        parts.append(format_rel(rel))
        parts.append(format_node(node))
    return "".join(parts)


def pretty_print(query: Query) -> str:
    lines = [f"MATCH {format_path(clause)}" for clause in query.matches]
    if query.where is not None:
        lines.append(f"WHERE {format_expression(query.where)}")
    items = []
    for item in query.returns:
        text = format_expression(item.expression)
        if item.alias is not None:
            text += f" AS {format_name(item.alias)}"
        items.append(text)
    lines.append("RETURN " + ", ".join(items))
    if query.order:
        keys = ", ".join(
            f"{format_expression(k.expression)} {'ASC' if k.ascending else 'DESC'}" for k in query.order
        )
        lines.append(f"ORDER BY {keys}")
    if query.limit is not None:
        lines.append(f"LIMIT {query.limit}")
    return "\n".join(lines)
