"""Generators and brute-force oracles shared by the test modules.

The oracle here deliberately does not reuse executor code: it enumerates
every assignment of graph entities to pattern positions and keeps the ones
that satisfy the pattern, with its own value comparison and sorting.
"""

from __future__ import annotations

import itertools
import math
import random

from mrm3.query.ast import (
    BoolOp,
    Comparison,
    Literal,
    MatchClause,
    NodePattern,
    Not,
    OrderKey,
    PropertyAccess,
    Query,
    RelPattern,
    ReturnItem,
    Variable,
)
from mrm3.schema import (
    BasicMetadata,
    DatasetInfo,
    DeviceInfo,
    GeneralInfo,
    InferenceRecord,
    ModelMetadataDocument,
    SustainabilityRecord,
    TrainingRecord,
)
from mrm3.store import Node, PropertyGraph, Relationship

GOLDEN_QUERY = """MATCH (m:Model)-[:TRAINED_ON]->(d:Dataset)
MATCH (m)-[:UTILIZES]->(a:ModelArchitecture)
MATCH (i:ModelInference)-[:INFERENCE_ON]->(m)
RETURN m.name,
       a.type as architecture,
       d.name as dataset,
       i.energyConsumption,
       i.flops
ORDER BY i.energyConsumption ASC"""

GOLDEN_RESULT = [
    ("Random Forest", "UMU", 0.072, 249),
    ("Random Forest", "Lumos5G", 0.132, 263),
    ("XGBoost", "LOG-a-TEC Winter", 0.284, 140),
    ("KNeighbors", "UMU", 0.326, 134),
    ("Random Forest", "LOG-a-TEC Spring", 0.370, 246),
]

# -- graphs ----------------------------------------------------------------


def small_graph() -> PropertyGraph:
    g = PropertyGraph()
    m = g.create_node("Model", {"name": "Random Forest", "version": "1", "sizeMB": 12.5})
    d = g.create_node("Dataset", {"version": "1", "name": "UMU", "tags": ("wifi", 2, True), "note": None})
    dev = g.create_node("Device", {"cpu": "Ryzen ✓ 'q'", "gpu": "", "memoryGB": 32})
    g.create_relationship("TRAINED_ON", m, d)
    g.create_relationship("RUNS_ON", m, dev, {"weight": -0.0})
    return g



SMALL_LABELS = ("Model", "Dataset", "Device")
SMALL_TYPES = ("TRAINED_ON", "RUNS_ON", "UTILIZES")
NAMES = ("a", "b", "c")
SCORES = (1, 2, 2.0, 3.5)


def random_small_graph(rng: random.Random, max_nodes: int = 12, max_rels: int = 20) -> PropertyGraph:
    graph = PropertyGraph()
    n = rng.randint(1, max_nodes)
    for _ in range(n):
        props = {}
        if rng.random() < 0.8:
            props["name"] = rng.choice(NAMES)
        if rng.random() < 0.7:
            props["score"] = rng.choice(SCORES)
        if rng.random() < 0.3:
            props["flag"] = rng.random() < 0.5
        graph.create_node(rng.choice(SMALL_LABELS), props)
    ids = [node.id for node in graph.nodes()]
    for _ in range(rng.randint(0, max_rels)):
        triple = (rng.choice(SMALL_TYPES), rng.choice(ids), rng.choice(ids))
        if graph.find_relationship(*triple) is None:
            props = {"w": rng.choice(SCORES)} if rng.random() < 0.3 else {}
            graph.create_relationship(*triple, props)
    return graph


def random_property_value(rng: random.Random):
    kind = rng.randrange(7)
    if kind == 0:
        return rng.choice(["", "x", "héllo 'q' \"dq\"", "line\nbreak", "tab\t\\"])
    if kind == 1:
        return rng.choice([0, -7, 2**62, rng.randint(-1000, 1000)])
    if kind == 2:
        return rng.choice([0.0, -0.0, 1.5, 1e-300, 1e300, rng.uniform(-1e6, 1e6), 3.0])
    if kind == 3:
        return rng.random() < 0.5
    if kind == 4:
        return None
    if kind == 5:
        return []
    return [rng.choice([1, 2.5, "s", True, -3]) for _ in range(rng.randint(1, 4))]


def random_rich_graph(rng: random.Random, max_nodes: int = 50) -> PropertyGraph:
    """Any labels and types, every property-value variant."""
    from mrm3.vocabulary import NodeLabel, RelationType

    labels = [label.value for label in NodeLabel]
    types = [rel.value for rel in RelationType]
    graph = PropertyGraph()
    for _ in range(rng.randint(0, max_nodes)):
        props = {f"p{k}": random_property_value(rng) for k in range(rng.randint(0, 5))}
        graph.create_node(rng.choice(labels), props)
    ids = [node.id for node in graph.nodes()]
    if ids:
        for _ in range(rng.randint(0, 2 * len(ids))):
            triple = (rng.choice(types), rng.choice(ids), rng.choice(ids))
            if graph.find_relationship(*triple) is None:
                props = {f"q{k}": random_property_value(rng) for k in range(rng.randint(0, 2))}
                graph.create_relationship(*triple, props)
    return graph


# -- random single-clause queries ------------------------------------------


def _random_literal(rng: random.Random):
    return Literal(rng.choice([*NAMES, *SCORES, True, False, None, "zz"]))


def random_small_query(rng: random.Random, allow_limit: bool = True) -> Query:
    length = rng.randint(1, 3)
    var_pool = ["a", "b", "c"]
    nodes = []
    for _ in range(length):
        var = rng.choice(var_pool + [None]) if rng.random() < 0.85 else None
        label = rng.choice(SMALL_LABELS) if rng.random() < 0.5 else None
        props = ()
        if rng.random() < 0.25:
            props = (("name", Literal(rng.choice(NAMES))),)
        nodes.append(NodePattern(var, label, props))
    rels = []
    used = set()
    for _ in range(length - 1):
        var = None
        if rng.random() < 0.4:
            var = rng.choice([v for v in ("r", "s") if v not in used] or [None])
            if var:
                used.add(var)
        rel_type = rng.choice(SMALL_TYPES) if rng.random() < 0.6 else None
        rels.append(RelPattern(var, rel_type, rng.choice(["->", "<-", "--"])))
    clause = MatchClause(tuple(nodes), tuple(rels))
    variables = clause.variables()
    if not variables:
        nodes[0] = NodePattern("a", nodes[0].label, nodes[0].properties)
        clause = MatchClause(tuple(nodes), tuple(rels))
        variables = clause.variables()

    def operand():
        var = rng.choice(variables)
        return PropertyAccess(var, rng.choice(["name", "score", "flag", "w"]))

    def condition(depth=0):
        roll = rng.random()
        if depth < 2 and roll < 0.2:
            return BoolOp(rng.choice(["AND", "OR"]), condition(depth + 1), condition(depth + 1))
        if depth < 2 and roll < 0.3:
            return Not(condition(depth + 1))
        op = rng.choice(["=", "<>", "<", "<=", ">", ">="])
        right = operand() if rng.random() < 0.2 else _random_literal(rng)
        return Comparison(op, operand(), right)

    where = condition() if rng.random() < 0.5 else None
    items = []
    columns = set()
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.25:
            expr = Variable(rng.choice(variables))
        else:
            expr = operand()
        item = ReturnItem(expr, None)
        if item.column in columns:
            continue
        columns.add(item.column)
        items.append(item)
    order = ()
    limit = None
    if rng.random() < 0.5:
        order = tuple(
            OrderKey(operand() if rng.random() < 0.8 else Variable(rng.choice(variables)), rng.random() < 0.5)
            for _ in range(rng.randint(1, 2))
        )
        if allow_limit and rng.random() < 0.5:
            limit = rng.randint(1, 6)
    return Query((clause,), where, tuple(items), order, limit)


# -- exhaustive-assignment oracle ------------------------------------------


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _eq(a, b):
    if a is None or b is None:
        return None
    if isinstance(a, (Node, Relationship)) or isinstance(b, (Node, Relationship)):
        return type(a) is type(b) and a.id == b.id
    if _num(a) and _num(b):
        return float(a) == float(b)
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return False
        parts = [_eq(x, y) for x, y in zip(a, b)]
        if False in parts:
            return False
        return None if None in parts else True
    return type(a) is type(b) and a == b


def _cmp(op, a, b):
    if op == "=":
        return _eq(a, b)
    if op == "<>":
        e = _eq(a, b)
        return None if e is None else (not e)
    if a is None or b is None:
        return None
    comparable = (
        (_num(a) and _num(b))
        or (isinstance(a, str) and isinstance(b, str))
        or (isinstance(a, bool) and isinstance(b, bool))
    )
    if not comparable:
        return None
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def oracle_eval(expr, env):
    if isinstance(expr, Literal):
        return list(expr.value) if isinstance(expr.value, tuple) else expr.value
    if isinstance(expr, Variable):
        return env[expr.name]
    if isinstance(expr, PropertyAccess):
        return env[expr.variable].properties.get(expr.key)
    if isinstance(expr, Comparison):
        return _cmp(expr.op, oracle_eval(expr.left, env), oracle_eval(expr.right, env))
    if isinstance(expr, Not):
        v = oracle_eval(expr.operand, env)
        return None if v is None else (not v)
    vals = [oracle_eval(expr.left, env), oracle_eval(expr.right, env)]
    if expr.op == "AND":
        if False in vals:
            return False
        return None if None in vals else True
    if True in vals:
        return True
    return None if None in vals else False


def _pattern_ok(node, pattern: NodePattern) -> bool:
    if pattern.label is not None and node.label != pattern.label:
        return False
    return all(_eq(node.properties.get(k), lit.value) is True for k, lit in pattern.properties)


def oracle_bindings(graph: PropertyGraph, clauses) -> list[dict]:
    """Every consistent assignment of entities to all pattern positions."""
    nodes = graph.nodes()
    rels = graph.relationships()
    node_slots = []  # (clause index, position, pattern)
    rel_slots = []
    for ci, clause in enumerate(clauses):
        for pi, pat in enumerate(clause.nodes):
            node_slots.append((ci, pi, pat))
        for ri, rel in enumerate(clause.rels):
            rel_slots.append((ci, ri, rel))
    node_choices = [[n for n in nodes if _pattern_ok(n, pat)] for _, _, pat in node_slots]
    results = []
    for assignment in itertools.product(*node_choices):
        env: dict = {}
        placed = {}
        ok = True
        for (ci, pi, pat), node in zip(node_slots, assignment):
            placed[(ci, pi)] = node
            if pat.variable is not None:
                if pat.variable in env and env[pat.variable].id != node.id:
                    ok = False
                    break
                env[pat.variable] = node
        if not ok:
            continue
        rel_choices = []
        for ci, ri, pat in rel_slots:
            left, right = placed[(ci, ri)], placed[(ci, ri + 1)]
            options = []
            for r in rels:
                if pat.type is not None and r.type != pat.type:
                    continue
                forward = r.source == left.id and r.target == right.id
                backward = r.source == right.id and r.target == left.id
                if (pat.direction == "->" and forward) or (pat.direction == "<-" and backward) or (
                    pat.direction == "--" and (forward or backward)
                ):
                    options.append(r)
            rel_choices.append(options)
        for rel_assignment in itertools.product(*rel_choices):
            per_clause: dict[int, list[int]] = {}
            renv = dict(env)
            good = True
            for (ci, ri, pat), r in zip(rel_slots, rel_assignment):
                per_clause.setdefault(ci, []).append(r.id)
                if pat.variable is not None:
                    if pat.variable in renv and renv[pat.variable].id != r.id:
                        good = False
                        break
                    renv[pat.variable] = r
            if not good:
                continue
            if any(len(ids) != len(set(ids)) for ids in per_clause.values()):
                continue
            results.append(renv)
    return results


def _sort_key(value):
    if isinstance(value, bool):
        return (2, value)
    if _num(value):
        return (0, value)
    if isinstance(value, str):
        return (1, value)
    if isinstance(value, list):
        return (3, tuple(_sort_key(v) for v in value))
    return (4, (isinstance(value, Relationship), value.id))


def oracle_execute(graph: PropertyGraph, query: Query) -> list[tuple]:
    rows = oracle_bindings(graph, query.matches)
    if query.where is not None:
        rows = [env for env in rows if oracle_eval(query.where, env) is True]
    variables = query.variables()
    if query.order:
        aliases = {item.alias: item.expression for item in query.returns if item.alias}
        # stable multi-pass sort: tie-break first, then keys from last to first
        rows.sort(key=lambda env: tuple(env[v].id for v in variables))
        for key in reversed(query.order):
            def value(env, expr=key.expression):
                if isinstance(expr, Variable) and expr.name in aliases:
                    return oracle_eval(aliases[expr.name], env)
                return oracle_eval(expr, env)

            present = [env for env in rows if value(env) is not None]
            missing = [env for env in rows if value(env) is None]
            present.sort(key=lambda env: _sort_key(value(env)), reverse=not key.ascending)
            rows = present + missing
    out = [tuple(oracle_eval(item.expression, env) for item in query.returns) for env in rows]
    if query.limit is not None:
        out = out[: query.limit]
    return out


def normalize_row(row) -> tuple:
    def norm(v):
        if isinstance(v, Node):
            return ("node", v.id)
        if isinstance(v, Relationship):
            return ("rel", v.id)
        if isinstance(v, list):
            return ("list", tuple(norm(x) for x in v))
        if isinstance(v, float) and math.isnan(v):
            return ("nan",)
        return (type(v).__name__ if not _num(v) else "num", v)

    return tuple(norm(v) for v in row)


# -- random metadata documents ---------------------------------------------

_DEVICES = [("cpu-A", "none", 16.0), ("cpu-B", "gpu-X", 32.0), ("  cpu-A ", "none", 16)]


def random_document(rng: random.Random) -> ModelMetadataDocument:
    """Draws from small pools so documents share datasets, devices and so on."""
    train_dev = DeviceInfo(*rng.choice(_DEVICES))
    infer_dev = train_dev if rng.random() < 0.6 else DeviceInfo(*rng.choice(_DEVICES))
    hp = rng.choice([{"k": 1}, {"k": 2}, {"k": 1, "mode": "fast"}, {}])
    return ModelMetadataDocument(
        basic=BasicMetadata(
            name=rng.choice(["m1", "m2", "m3", "m4", "m 5", "m  5"]),
            version=rng.choice(["1", "2"]),
            date="2024-01-02",
            description="d",
            authors=("x",),
        ),
        general=GeneralInfo(
            size_mb=rng.uniform(0, 10),
            architecture=rng.choice(["RF", "KNN", "MLP"]),
            model_type="t",
            explainability="e",
            service=rng.choice(["localization", "tracking"]),
            problem_type=rng.choice(["regression", "classification"]),
        ),
        dataset=DatasetInfo(name=rng.choice(["D1", "D2", "D3"]), version=rng.choice(["1", "2"]), date="2023-01-01", size_mb=1.0),
        training=TrainingRecord(
            split_type="80/20",
            optimizer="adam",
            hyperparameters=hp,
            evaluation={"RMSE": rng.uniform(0, 5)},
            sustainability=SustainabilityRecord(rng.uniform(0, 100), rng.uniform(0, 1)),
            device=train_dev,
        ),
        inference=InferenceRecord(
            latency_ms=rng.uniform(0, 10),
            flops=rng.randint(0, 1000),
            sustainability=SustainabilityRecord(rng.uniform(0, 2), rng.uniform(0, 1)),
            device=infer_dev,
            accuracy=rng.choice([None, 0.9]),
        ),
    )


def expected_distinct_counts(docs) -> dict[str, int]:
    """Per-label node counts predicted from distinct canonical keys."""
    canon = lambda s: " ".join(s.split())
    keys = {label: set() for label in ("Model", "Dataset", "Service", "ProblemType", "ModelArchitecture", "Device", "Hyperparameters")}
    for d in docs:
        keys["Model"].add((canon(d.basic.name), canon(d.basic.version)))
        keys["Dataset"].add((canon(d.dataset.name), canon(d.dataset.version)))
        keys["Service"].add(canon(d.general.service))
        keys["ProblemType"].add(canon(d.general.problem_type))
        keys["ModelArchitecture"].add(canon(d.general.architecture))
        for dev in (d.training.device, d.inference.device):
            keys["Device"].add((canon(dev.cpu), canon(dev.gpu), float(dev.memory_gb)))
        keys["Hyperparameters"].add(tuple(sorted(d.training.hyperparameters.items())))
    counts = {label: len(v) for label, v in keys.items()}
    for satellite in ("ModelTraining", "ModelInference", "Parameters"):
        counts[satellite] = counts["Model"]
    return counts


# -- grammar-wide query generator ------------------------------------------

_ODD_NAMES = ["n", "m1", "_x", "my var", "MATCH", "where", "a`b", "é", "x-y", "Order", "null"]
_ODD_KEYS = ["name", "desc", "LIMIT", "energy consumption", "k`ey", "AND", "ünï", "x1"]
_STRINGS = ["", "plain", "it's", 'say "hi"', "back\\slash", "tab\tnew\nline", "ünïcödé ✓", "//not a comment"]


def _full_literal(rng: random.Random, allow_list: bool = True):
    roll = rng.randrange(7 if allow_list else 6)
    if roll == 0:
        return rng.choice([0, 7, -3, 2**62, -(2**63)])
    if roll == 1:
        return rng.choice([0.5, -2.25, 1e-7, 1.5e300, -0.0, 3.0, rng.uniform(-1e6, 1e6)])
    if roll == 2:
        return rng.choice(_STRINGS)
    if roll == 3:
        return rng.random() < 0.5
    if roll == 4 and allow_list:
        return None
    if roll == 6:
        return tuple(_non_null_scalar(rng) for _ in range(rng.randint(0, 3)))
    return rng.choice(_STRINGS)


def _non_null_scalar(rng):
    value = None
    while value is None or isinstance(value, tuple):
        value = _full_literal(rng, False)
    return value


def random_full_query(rng: random.Random) -> Query:
    """Any query the grammar admits, with awkward names and literals."""
    from mrm3.vocabulary import NODE_LABELS, RELATION_TYPES

    labels, types = sorted(NODE_LABELS), sorted(RELATION_TYPES)
    names = rng.sample(_ODD_NAMES, rng.randint(2, 5))
    node_vars, rel_vars = names[: max(1, len(names) - 2)], names[max(1, len(names) - 2) :]
    used_rel_vars: set = set()
    clauses = []
    for _ in range(rng.randint(1, 3)):
        length = rng.randint(1, 4)
        nodes, rels = [], []
        clause_rels: set = set()
        for k in range(length):
            props = ()
            if rng.random() < 0.3:
                keys = rng.sample(_ODD_KEYS, rng.randint(1, 2))
                props = tuple(
                    (key, Literal(tuple(_non_null_scalar(rng) for _ in range(2)) if rng.random() < 0.2 else _full_literal(rng, False)))
                    for key in keys
                )
            nodes.append(
                NodePattern(
                    rng.choice(node_vars) if rng.random() < 0.8 else None,
                    rng.choice(labels) if rng.random() < 0.5 else None,
                    props,
                )
            )
            if k:
                free = [v for v in rel_vars if v not in clause_rels]
                var = rng.choice(free) if free and rng.random() < 0.4 else None
                if var:
                    clause_rels.add(var)
                    used_rel_vars.add(var)
                rels.append(
                    RelPattern(var, rng.choice(types) if rng.random() < 0.6 else None, rng.choice(["->", "<-", "--"]))
                )
        clauses.append(MatchClause(tuple(nodes), tuple(rels)))
    bound = [v for c in clauses for v in c.variables()]
    if not bound:
        first = clauses[0]
        clauses[0] = MatchClause((NodePattern("n", None, ()),) + first.nodes[1:], first.rels)
        bound = ["n"]
    bound = list(dict.fromkeys(bound))

    def operand():
        roll = rng.random()
        if roll < 0.5:
            return PropertyAccess(rng.choice(bound), rng.choice(_ODD_KEYS))
        if roll < 0.65:
            return Variable(rng.choice(bound))
        value = _full_literal(rng)
        if isinstance(value, tuple):
            value = tuple(v for v in value if v is not None and not isinstance(v, tuple))
        return Literal(value)

    def expr(depth=0):
        roll = rng.random()
        if depth < 3 and roll < 0.3:
            return BoolOp(rng.choice(["AND", "OR"]), expr(depth + 1), expr(depth + 1))
        if depth < 3 and roll < 0.4:
            return Not(expr(depth + 1))
        if roll < 0.85:
            return Comparison(rng.choice(["=", "<>", "<", "<=", ">", ">="]), operand(), operand())
        return operand()

    where = expr() if rng.random() < 0.6 else None
    returns, columns = [], set()
    for _ in range(rng.randint(1, 4)):
        alias = rng.choice(_ODD_NAMES + ["col"]) if rng.random() < 0.4 else None
        item = ReturnItem(expr(2), alias)
        if item.column in columns:
            continue
        columns.add(item.column)
        returns.append(item)
    aliases = [r.alias for r in returns if r.alias]
    order = ()
    if rng.random() < 0.5:
        keys = []
        for _ in range(rng.randint(1, 3)):
            e = Variable(rng.choice(aliases)) if aliases and rng.random() < 0.3 else expr(2)
            keys.append(OrderKey(e, rng.random() < 0.5))
        order = tuple(keys)
    limit = rng.randint(1, 10**6) if rng.random() < 0.3 else None
    return Query(tuple(clauses), where, tuple(returns), order, limit)


def ast_signature(node):
    """Structural form of an AST that also distinguishes 1, 1.0 and True."""
    if isinstance(node, Literal):
        return ("Literal", ast_signature(node.value))
    if isinstance(node, tuple):
        return tuple(ast_signature(v) for v in node)
    if isinstance(node, float):
        return ("float", node.hex())
    if isinstance(node, (bool, int, str)) or node is None:
        return (type(node).__name__, node)
    fields = getattr(node, "__dataclass_fields__", None)
    assert fields is not None, node
    return (type(node).__name__,) + tuple((name, ast_signature(getattr(node, name))) for name in fields)
