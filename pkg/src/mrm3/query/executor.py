"""Query planning and execution over a :class:`~mrm3.store.PropertyGraph`.

Each MATCH clause is matched by anchoring on one node pattern and expanding
along the path in both directions. Clauses are evaluated in greedy
selectivity order; a clause whose variables are already bound by earlier
clauses expands from those bindings, which realises the natural join on
shared variables. Relationship uniqueness is enforced within a clause only.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any, Iterator

from ..store import Node, PropertyGraph, Relationship
from ..vocabulary import NODE_LABELS, RELATION_TYPES
from .ast import (
    BoolOp,
    Comparison,
    Expression,
    Literal,
    MatchClause,
    NodePattern,
    Not,
    PropertyAccess,
    Query,
    Variable,
    format_expression,
    format_node,
    format_rel,
)
from .parser import SemanticError, parse

__all__ = ["ResultTable", "execute", "run", "explain", "plan", "compare", "order_compare", "evaluate"]


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.rows)

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": [[to_json_value(v) for v in row] for row in self.rows]}


def to_json_value(value: Any) -> Any:
    if isinstance(value, Node):
        return {"id": value.id, "label": value.label, "properties": dict(value.properties)}
    if isinstance(value, Relationship):
        return {
            "id": value.id,
            "type": value.type,
            "source": value.source,
            "target": value.target,
            "properties": dict(value.properties),
        }
    if isinstance(value, tuple):
        return list(value)
    return value


# -- value semantics -------------------------------------------------------


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _equals(a: Any, b: Any) -> bool | None:
    if a is None or b is None:
        return None
    if _is_number(a) and _is_number(b):
        return a == b
    if isinstance(a, (Node, Relationship)) or isinstance(b, (Node, Relationship)):
        return type(a) is type(b) and a.id == b.id
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        if len(a) != len(b):
            return False
        result: bool | None = True
        for x, y in zip(a, b):
            eq = _equals(x, y)
            if eq is False:
                return False
            if eq is None:
                result = None
        return result
    if type(a) is not type(b):
        return False
    return a == b


def compare(op: str, a: Any, b: Any) -> bool | None:
    """Three-valued comparison; ``None`` stands for null (unknown)."""
    if op in ("=", "<>"):
        eq = _equals(a, b)
        if eq is None:
            return None
        return eq if op == "=" else not eq
    if a is None or b is None:
        return None
    if _is_number(a) and _is_number(b):
        pass
    elif isinstance(a, str) and isinstance(b, str):
        pass
    elif isinstance(a, bool) and isinstance(b, bool):
        pass
    else:
        return None
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def evaluate(expr: Expression, env: dict[str, Any]) -> Any:
    if isinstance(expr, Literal):
        return list(expr.value) if isinstance(expr.value, tuple) else expr.value
    if isinstance(expr, Variable):
        return env.get(expr.name)
    if isinstance(expr, PropertyAccess):
        target = env.get(expr.variable)
        if isinstance(target, (Node, Relationship)):
            return target.properties.get(expr.key)
        return None
    if isinstance(expr, Comparison):
        return compare(expr.op, evaluate(expr.left, env), evaluate(expr.right, env))
    if isinstance(expr, Not):
        value = _truth(evaluate(expr.operand, env))
        return None if value is None else not value
    if isinstance(expr, BoolOp):
        left = _truth(evaluate(expr.left, env))
        right = _truth(evaluate(expr.right, env))
        if expr.op == "AND":
            if left is False or right is False:
                return False
            return None if left is None or right is None else True
        if left is True or right is True:
            return True
        return None if left is None or right is None else False
    raise TypeError(f"unknown expression {expr!r}")


def _truth(value: Any) -> bool | None:
    if value is None or isinstance(value, bool):
        return value
    raise SemanticError(f"expected a boolean, got {value!r}")


# numeric < text < boolean < list < entity < null
def _rank(value: Any) -> int:
    if value is None:
        return 5
    if isinstance(value, bool):
        return 2
    if _is_number(value):
        return 0
    if isinstance(value, str):
        return 1
    if isinstance(value, (list, tuple)):
        return 3
    return 4


def order_compare(a: Any, b: Any) -> int:
    """Total order used by ORDER BY (ascending)."""
    ra, rb = _rank(a), _rank(b)
    if ra != rb:
        return -1 if ra < rb else 1
    if ra == 5:
        return 0
    if ra == 3:
        for x, y in zip(a, b):
            c = order_compare(x, y)
            if c:
                return c
        return (len(a) > len(b)) - (len(a) < len(b))
    if ra == 4:
        a, b = (isinstance(a, Relationship), a.id), (isinstance(b, Relationship), b.id)
    return (a > b) - (a < b)


# -- planning --------------------------------------------------------------


@dataclass(frozen=True)
class ClausePlan:
    index: int  # position of the clause in the query text
    anchor: int  # node pattern index the match starts from
    estimate: int  # estimated anchor candidates (per incoming row when bound)
    bound: tuple[str, ...]  # variables already bound when this clause runs


def _check_vocabulary(query: Query) -> None:
    for clause in query.matches:
        for node in clause.nodes:
            if node.label is not None and node.label not in NODE_LABELS:
                raise SemanticError(f"unknown label {node.label!r}")
        for rel in clause.rels:
            if rel.type is not None and rel.type not in RELATION_TYPES:
                raise SemanticError(f"unknown relationship type {rel.type!r}")


def _estimate(node: NodePattern, bound: set[str], graph: PropertyGraph | None) -> int:
    if node.variable and node.variable in bound:
        return 1
    if graph is not None:
        if node.properties:
            return len(graph.find_nodes(node.label, {k: _literal(v) for k, v in node.properties}))
        return graph.node_count(node.label)
    # without a graph: prefer property maps, then labels
    return (1 if node.properties else 10) * (1 if node.label else 100)


def plan(query: Query, graph: PropertyGraph | None = None) -> list[ClausePlan]:
    """Greedy clause order and anchor choice.

    With a graph, estimates are exact candidate counts; without one a fixed
    heuristic ranks property maps over labels over bare patterns. Ties go to
    the earlier clause and the earlier node pattern.
    """
    remaining = list(range(len(query.matches)))
    bound: set[str] = set()
    steps = []
    while remaining:
        best = None
        for idx in remaining:
            clause = query.matches[idx]
            for pos, node in enumerate(clause.nodes):
                cost = _estimate(node, bound, graph)
                key = (cost, remaining.index(idx), pos)
                if best is None or key < best[0]:
                    best = (key, idx, pos, cost)
        _, idx, pos, cost = best
        clause = query.matches[idx]
        steps.append(ClausePlan(idx, pos, cost, tuple(v for v in clause.variables() if v in bound)))
        bound.update(clause.variables())
        remaining.remove(idx)
    return steps


def explain(query: Query | str, graph: PropertyGraph | None = None) -> str:
    """Human-readable plan: one numbered step per line.

    Scan steps show their candidate estimate only when ``graph`` is given.
    """
    if isinstance(query, str):
        query = parse(query)
    _check_vocabulary(query)
    lines: list[str] = []
    for n, step in enumerate(plan(query, graph)):
        est = f" est={step.estimate}" if graph is not None else ""
        clause = query.matches[step.index]
        anchor = clause.nodes[step.anchor]
        anchor_text = format_node(anchor)
        if anchor.variable and anchor.variable in step.bound:
            lines.append(f"Argument {anchor_text}")
        elif anchor.properties and anchor.label:
            lines.append(f"NodeIndexSeek {anchor_text}{est}")
        elif anchor.label:
            lines.append(f"NodeByLabelScan {anchor_text}{est}")
        else:
            lines.append(f"AllNodesScan {anchor_text}{est}")
        for i in range(step.anchor, len(clause.rels)):
            lines.append(f"Expand {format_node(clause.nodes[i])}{format_rel(clause.rels[i])}{format_node(clause.nodes[i + 1])}")
        for i in range(step.anchor - 1, -1, -1):
            lines.append(f"Expand {format_node(clause.nodes[i + 1])}{_reverse(clause.rels[i])}{format_node(clause.nodes[i])}")
        if n:
            if step.bound:
                lines.append(f"Apply join on {', '.join(step.bound)}")
            else:
                lines.append("CartesianProduct")
    if query.where is not None:
        lines.append(f"Filter {format_expression(query.where)}")
    if query.order:
        keys = ", ".join(
            f"{format_expression(k.expression)} {'ASC' if k.ascending else 'DESC'}" for k in query.order
        )
        lines.append(f"Sort {keys}")
    if query.limit is not None:
        lines.append(f"Limit {query.limit}")
    lines.append("Project " + ", ".join(query.columns))
    return "\n".join(f"{i + 1}. {line}" for i, line in enumerate(lines))


def _reverse(rel) -> str:
    text = format_rel(rel)
    if rel.direction == "->":
        return "<" + text[:-1]
    if rel.direction == "<-":
        return text[1:] + ">"
    return text


# -- matching --------------------------------------------------------------


def _literal(expr: Literal) -> Any:
    return list(expr.value) if isinstance(expr.value, tuple) else expr.value


def _node_ok(node: Node, pattern: NodePattern, binding: dict) -> bool:
    if pattern.label is not None and node.label != pattern.label:
        return False
    for key, lit in pattern.properties:
        if compare("=", node.properties.get(key), _literal(lit)) is not True:
            return False
    if pattern.variable is not None:
        bound = binding.get(pattern.variable)
        if bound is not None and bound.id != node.id:
            return False
    return True


def _anchor_candidates(graph: PropertyGraph, pattern: NodePattern, binding: dict) -> list[Node]:
    if pattern.variable is not None and pattern.variable in binding:
        node = binding[pattern.variable]
        return [node] if _node_ok(node, pattern, binding) else []
    filters = {k: _literal(v) for k, v in pattern.properties}
    if pattern.label is not None and not any(isinstance(v, list) for v in filters.values()):
        return [n for n in graph.find_nodes(pattern.label, filters) if _node_ok(n, pattern, binding)]
    return [n for n in graph.nodes() if _node_ok(n, pattern, binding)]


def _match_clause(graph: PropertyGraph, clause: MatchClause, anchor: int, row: dict) -> Iterator[dict]:
    # (rel index, from node index, to node index, graph direction from the "from" node)
    steps = []
    for i in range(anchor, len(clause.rels)):
        d = clause.rels[i].direction
        steps.append((i, i, i + 1, {"->": "out", "<-": "in", "--": "both"}[d]))
    for i in range(anchor - 1, -1, -1):
        d = clause.rels[i].direction
        steps.append((i, i + 1, i, {"->": "in", "<-": "out", "--": "both"}[d]))

    positions: list[Node | None] = [None] * len(clause.nodes)

    def extend(k: int, binding: dict, used: frozenset) -> Iterator[dict]:
        if k == len(steps):
            yield binding
            return
        rel_idx, src, dst, direction = steps[k]
        rel_pat = clause.rels[rel_idx]
        node_pat = clause.nodes[dst]
        for rel, other in graph.neighbors(positions[src].id, direction, rel_pat.type):
            if rel.id in used:
                continue
            if rel_pat.variable is not None:
                prior = binding.get(rel_pat.variable)
                if prior is not None and prior.id != rel.id:
                    continue
            if not _node_ok(other, node_pat, binding):
                continue
            positions[dst] = other
            new = binding
            if rel_pat.variable is not None or node_pat.variable is not None:
                new = dict(binding)
                if rel_pat.variable is not None:
                    new[rel_pat.variable] = rel
                if node_pat.variable is not None:
                    new[node_pat.variable] = other
            yield from extend(k + 1, new, used | {rel.id})
            positions[dst] = None

    start_pat = clause.nodes[anchor]
    for node in _anchor_candidates(graph, start_pat, row):
        positions[anchor] = node
        binding = row
        if start_pat.variable is not None and start_pat.variable not in row:
            binding = dict(row)
            binding[start_pat.variable] = node
        yield from extend(0, binding, frozenset())
        positions[anchor] = None


def _bindings(graph: PropertyGraph, query: Query) -> list[dict]:
    rows: list[dict] = [{}]
    for step in plan(query, graph):
        clause = query.matches[step.index]
        rows = [ext for row in rows for ext in _match_clause(graph, clause, step.anchor, row)]
        if not rows:
            break
    return rows


def execute(graph: PropertyGraph, query: Query | str, row_cap: int | None = None) -> ResultTable:
    """Run a query and return its result table.

    Args:
        graph: graph to read.
        query: parsed query or query text.
        row_cap: truncate to this many rows when the query has no LIMIT;
            :attr:`ResultTable.truncated` records whether rows were dropped.

    Raises:
        SemanticError: if a pattern names a label or relationship type outside
            the graph vocabulary.
    """
    if isinstance(query, str):
        query = parse(query)
    _check_vocabulary(query)
    rows = _bindings(graph, query)
    if query.where is not None:
        rows = [b for b in rows if _truth(evaluate(query.where, b)) is True]

    projected = [(b, tuple(evaluate(item.expression, b) for item in query.returns)) for b in rows]

    if query.order:
        variables = query.variables()
        aliases = [(i, item.alias) for i, item in enumerate(query.returns) if item.alias is not None]
        decorated = []
        for binding, values in projected:
            env = dict(binding)
            env.update({alias: values[i] for i, alias in aliases})
            keys = tuple(evaluate(k.expression, env) for k in query.order)
            ids = tuple(binding[v].id if v in binding else math.inf for v in variables)
            decorated.append((keys, ids, values))
        directions = [k.ascending for k in query.order]

        def cmp(x, y) -> int:
            for asc, a, b in zip(directions, x[0], y[0]):
                if a is None or b is None:
                    # nulls sort last in either direction
                    c = (a is None) - (b is None)
                else:
                    c = order_compare(a, b)
                    if not asc:
                        c = -c
                if c:
                    return c
            return (x[1] > y[1]) - (x[1] < y[1])

        decorated.sort(key=functools.cmp_to_key(cmp))
        values_list = [d[2] for d in decorated]
    else:
        values_list = [v for _, v in projected]

    truncated = False
    if query.limit is not None:
        values_list = values_list[: query.limit]
    elif row_cap is not None and len(values_list) > row_cap:
        values_list = values_list[:row_cap]
        truncated = True
    return ResultTable(query.columns, values_list, truncated)


def run(graph: PropertyGraph, text: str, row_cap: int | None = None) -> ResultTable:
    return execute(graph, parse(text), row_cap=row_cap)
