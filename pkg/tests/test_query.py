import random
from collections import Counter

import pytest

from mrm3.query import (
    BoolOp,
    Comparison,
    LexError,
    Literal,
    MatchClause,
    NodePattern,
    ParseError,
    PropertyAccess,
    Query,
    QueryError,
    RelPattern,
    ReturnItem,
    SemanticError,
    Variable,
    execute,
    explain,
    parse,
    pretty_print,
    run,
    tokenize,
)
from mrm3.store import PropertyGraph

from .support import GOLDEN_QUERY, GOLDEN_RESULT, normalize_row, oracle_execute, random_small_graph, random_small_query


def kinds(text):
    return [(t.kind, t.value) for t in tokenize(text)][:-1]


# -- lexer -----------------------------------------------------------------


def test_tokenize_return_item():
    assert kinds("RETURN m.name") == [("KEYWORD", "RETURN"), ("IDENT", "m"), ("PUNCT", "."), ("IDENT", "name")]


def test_keywords_case_insensitive_identifiers_not():
    assert kinds("match Match MATCH") == [("KEYWORD", "MATCH")] * 3
    assert kinds("Model model") == [("IDENT", "Model"), ("IDENT", "model")]


def test_relationship_type_tokens():
    assert kinds("-[:TRAINED_ON]->") == [
        ("PUNCT", "-"),
        ("PUNCT", "["),
        ("PUNCT", ":"),
        ("IDENT", "TRAINED_ON"),
        ("PUNCT", "]"),
        ("PUNCT", "->"),
    ]


def test_literals_and_comments():
    toks = kinds("'it\\'s' \"dq\" 12 1.5e3 `odd name` // trailing\n<>")
    assert toks == [
        ("STRING", "it's"),
        ("STRING", "dq"),
        ("INT", 12),
        ("FLOAT", 1500.0),
        ("IDENT", "odd name"),
        ("PUNCT", "<>"),
    ]


def test_positions_are_one_based():
    toks = tokenize("MATCH\n  (n)")
    assert (toks[0].line, toks[0].column) == (1, 1)
    assert (toks[1].line, toks[1].column) == (2, 3)


@pytest.mark.parametrize("text, pos", [("MATCH (n) RETURN n $", (1, 20)), ("RETURN 'open", (1, 8)), ("\n  #", (2, 3))])
def test_lex_errors_carry_position(text, pos):
    with pytest.raises(LexError) as err:
        tokenize(text)
    assert (err.value.line, err.value.column) == pos


# -- parser ----------------------------------------------------------------


def test_parse_golden_query():
    q = parse(GOLDEN_QUERY)
    assert len(q.matches) == 3
    assert len(q.returns) == 5
    assert len(q.order) == 1 and q.order[0].ascending
    assert q.columns == ["m.name", "architecture", "dataset", "i.energyConsumption", "i.flops"]
    assert q.matches[0].rels[0] == RelPattern(None, "TRAINED_ON", "->")
    assert q.matches[2].rels[0].direction == "->"


def test_minimal_query():
    q = parse("MATCH (n) RETURN n")
    assert q == Query((MatchClause((NodePattern("n", None, ()),), ()),), None, (ReturnItem(Variable("n"), None),), (), None)


def test_precedence():
    q = parse("MATCH (n) WHERE NOT n.a = 1 OR n.b = 2 AND n.c = 3 RETURN n")
    assert q.where.op == "OR"
    assert isinstance(q.where.right, BoolOp) and q.where.right.op == "AND"


def test_less_than_negative():
    q = parse("MATCH (n) WHERE n.a<-1 RETURN n")
    assert q.where == Comparison("<", PropertyAccess("n", "a"), Literal(-1))


def test_keywords_allowed_as_property_keys():
    q = parse("MATCH (n:Model) RETURN n.desc, n.order AS o ORDER BY n.limit DESC")
    assert q.returns[0].expression == PropertyAccess("n", "desc")
    assert not q.order[0].ascending


@pytest.mark.parametrize(
    "text, pos, expected",
    [
        ("MATCH (m:Model RETURN m", (1, 16), {"')'", "'{'"}),
        ("MATCH (m) RETURN", (1, 17), {"identifier", "literal", "'('", "NOT"}),
        ("RETURN 1", (1, 1), {"MATCH"}),
        ("MATCH (m)\nWHERE m.a = 1\nRETURN m LIMIT 0", (3, 16), set()),
        ("MATCH (m) RETURN m ORDER m", (1, 26), {"BY"}),
        ("MATCH (m)-[:T]>(n) RETURN m", (1, 15), {"'-'", "'->'"}),
    ],
)
def test_parse_errors(text, pos, expected):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert (err.value.line, err.value.column) == pos
    assert expected <= set(err.value.expected)


@pytest.mark.parametrize(
    "text, pos, fragment",
    [
        ("MATCH (m:Model) RETURN x", (1, 24), "'x'"),
        ("MATCH (m) WHERE z.a = 1 RETURN m", (1, 17), "'z'"),
        ("MATCH (m:Person) RETURN m", (1, 10), "Person"),
        ("MATCH (m)-[:KNOWS]->(n) RETURN m", (1, 13), "KNOWS"),
        ("MATCH (m)-[m]->(n) RETURN m", (1, 10), "both"),
        ("MATCH (a) RETURN a.x AS y,\n a.z AS y", (2, 9), "duplicate alias"),
        ("MATCH (a) RETURN a.x, a.x", (1, 23), "duplicate column"),
    ],
)
def test_semantic_errors(text, pos, fragment):
    with pytest.raises(SemanticError) as err:
        parse(text)
    assert (err.value.line, err.value.column) == pos
    assert fragment in str(err.value)


def test_order_by_may_use_alias():
    q = parse("MATCH (m) RETURN m.name AS n ORDER BY n")
    assert q.order[0].expression == Variable("n")


def test_pretty_print_reparses():
    q = parse(GOLDEN_QUERY)
    assert parse(pretty_print(q)) == q


# -- execution -------------------------------------------------------------


def test_golden_query_reproduces_golden_rows(fixture_graph):
    table = run(fixture_graph, GOLDEN_QUERY)
    assert len(table) >= 5
    got = [(r[1], r[2], round(r[3], 3), r[4]) for r in table.rows[:5]]
    assert got == GOLDEN_RESULT
    energies = [r[3] for r in table.rows]
    assert energies == sorted(energies)


def test_empty_graph_keeps_columns():
    table = run(PropertyGraph(), GOLDEN_QUERY)
    assert table.rows == []
    assert table.columns == ["m.name", "architecture", "dataset", "i.energyConsumption", "i.flops"]


def test_missing_property_is_null():
    g = PropertyGraph()
    g.create_node("Model", {"name": "a"})
    assert run(g, "MATCH (m) RETURN m.version").rows == [(None,)]


def _null_graph():
    g = PropertyGraph()
    for props in ({"x": 1}, {"x": None}, {}, {"x": "s"}, {"x": 2.5}, {"x": True}):
        g.create_node("Model", props)
    return g


@pytest.mark.parametrize(
    "where, ids",
    [
        ("m.x = null", []),
        ("m.x <> null", []),
        ("NOT m.x = 1", [4, 5, 6]),
        ("m.x > 0", [1, 5]),
        ("m.x > 0 OR m.x = 's'", [1, 4, 5]),
        ("NOT (m.x > 1 AND true)", [1]),
        ("m.x > 0 AND m.x <> 's'", [1, 5]),
        ("m.x = 1.0", [1]),
        ("m.x = true", [6]),
        ("m.x < 'z'", [4]),
    ],
)
def test_three_valued_where(where, ids):
    table = run(_null_graph(), f"MATCH (m) WHERE {where} RETURN m ORDER BY m")
    assert [row[0].id for row in table.rows] == ids


def test_order_by_type_ranking_and_nulls_last():
    g = _null_graph()
    g.create_node("Model", {"x": [1, 2]})
    asc = [r[0] for r in run(g, "MATCH (m) RETURN m.x ORDER BY m.x").rows]
    assert asc == [1, 2.5, "s", True, [1, 2], None, None]
    desc = [r[0] for r in run(g, "MATCH (m) RETURN m.x ORDER BY m.x DESC").rows]
    assert desc == [[1, 2], True, "s", 2.5, 1, None, None]


def test_ties_break_by_entity_id():
    g = PropertyGraph()
    for name in ("b", "a", "b", "a"):
        g.create_node("Model", {"name": name})
    rows = run(g, "MATCH (m) RETURN m.name, m ORDER BY m.name DESC").rows
    assert [(r[0], r[1].id) for r in rows] == [("b", 1), ("b", 3), ("a", 2), ("a", 4)]


def test_limit_returns_sorted_prefix(fixture_graph):
    full = run(fixture_graph, GOLDEN_QUERY).rows
    for k in (1, 3, 5, 50):
        assert run(fixture_graph, GOLDEN_QUERY + f" LIMIT {k}").rows == full[:k]


def test_row_cap_marks_truncation(fixture_graph):
    table = run(fixture_graph, "MATCH (n) RETURN n", row_cap=10)
    assert len(table) == 10 and table.truncated
    assert not run(fixture_graph, "MATCH (n) RETURN n LIMIT 200", row_cap=10).truncated
    assert len(run(fixture_graph, "MATCH (n) RETURN n LIMIT 200", row_cap=10)) == 113


def test_relationship_uniqueness_is_per_clause():
    g = PropertyGraph()
    a, b = g.create_node("Model"), g.create_node("Dataset")
    g.create_relationship("TRAINED_ON", a, b)
    assert len(run(g, "MATCH (x)-[]-(y)-[]-(z) RETURN x, z")) == 0
    assert len(run(g, "MATCH (x)-[]-(y) MATCH (y)-[]-(z) RETURN x, z")) == 2


def test_self_loop_matched_once_undirected():
    g = PropertyGraph()
    a = g.create_node("Model")
    g.create_relationship("TRAINED_ON", a, a)
    assert len(run(g, "MATCH (x)-[r]-(y) RETURN r")) == 1
    assert len(run(g, "MATCH (x)-[r]->(x) RETURN r")) == 1


def test_join_equals_natural_join_of_clauses():
    rng = random.Random(17)
    for _ in range(150):
        g = random_small_graph(rng, max_nodes=8, max_rels=12)
        left = run(g, "MATCH (a)-[:RUNS_ON]->(b) RETURN a, b").rows
        right = run(g, "MATCH (b)-[:TRAINED_ON]-(c) RETURN b, c").rows
        expected = Counter((x.id, y.id, z.id) for x, y in left for y2, z in right if y.id == y2.id)
        both = run(g, "MATCH (a)-[:RUNS_ON]->(b) MATCH (b)-[:TRAINED_ON]-(c) RETURN a, b, c").rows
        assert Counter((x.id, y.id, z.id) for x, y, z in both) == expected


def test_cartesian_product_of_disjoint_clauses():
    g = random_small_graph(random.Random(1))
    n = g.node_count()
    assert len(run(g, "MATCH (a) MATCH (b) RETURN a, b")) == n * n


def test_executor_matches_oracle():
    rng = random.Random(20240601)
    for trial in range(300):
        g = random_small_graph(rng)
        q = random_small_query(rng)
        got = [normalize_row(r) for r in execute(g, q).rows]
        want = [normalize_row(r) for r in oracle_execute(g, q)]
        if q.order:
            assert got == want, pretty_print(q)
        else:
            assert Counter(got) == Counter(want), pretty_print(q)


# -- explain ---------------------------------------------------------------


def test_explain_golden_query_scans_most_selective_label(fixture_graph):
    text = explain(parse(GOLDEN_QUERY), fixture_graph)
    lines = text.splitlines()
    assert lines[0] == "1. NodeByLabelScan (d:Dataset) est=4"
    assert any("Sort i.energyConsumption ASC" in line for line in lines)
    assert lines[-1].split(". ", 1)[1].startswith("Project")
    assert explain(parse(GOLDEN_QUERY), fixture_graph) == text


def test_explain_all_nodes():
    lines = explain(parse("MATCH (n) RETURN n")).splitlines()
    assert lines[0] == "1. AllNodesScan (n)"
    assert lines[-1] == "2. Project n"


def test_explain_index_seek_and_filter():
    text = explain(parse("MATCH (m:Model {name: 'x'}) WHERE m.size > 1 RETURN m LIMIT 2"))
    assert "NodeIndexSeek" in text
    assert "Filter" in text and "Limit 2" in text


def test_query_error_is_value_error_family():
    with pytest.raises(QueryError):
        run(PropertyGraph(), "MATCH")


def test_grammar_round_trip():
    from .support import ast_signature, random_full_query

    rng = random.Random(77)
    for _ in range(500):
        q = random_full_query(rng)
        text = pretty_print(q)
        assert ast_signature(parse(text)) == ast_signature(q), text
        assert pretty_print(parse(text)) == text


def test_backtick_escape():
    q = parse("MATCH (`a``b`) RETURN `a``b`.`c d`")
    assert q.returns[0].expression == PropertyAccess("a`b", "c d")
    assert "`a``b`" in pretty_print(q)
