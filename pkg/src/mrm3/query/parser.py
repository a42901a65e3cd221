"""Recursive-descent parser for the Cypher subset.

Grammar (EBNF; keywords are case-insensitive)::

    query       = match { match } [ where ] return [ order ] [ limit ] [ ";" ] EOF ;
    match       = "MATCH" path ;
    path        = node { rel node } ;
    node        = "(" [ name ] [ ":" key ] [ propmap ] ")" ;
    rel         = "-" [ relbody ] "->" | "<-" [ relbody ] "-" | "-" [ relbody ] "-" ;
    relbody     = "[" [ name ] [ ":" key ] "]" ;
    propmap     = "{" [ key ":" literal { "," key ":" literal } ] "}" ;
    where       = "WHERE" expr ;
    expr        = conj { "OR" conj } ;
    conj        = neg { "AND" neg } ;
    neg         = "NOT" neg | comparison ;
    comparison  = operand [ compop operand ] ;
    compop      = "=" | "<>" | "<" | "<=" | ">" | ">=" ;
    operand     = literal | name [ "." key ] | "(" expr ")" ;
    literal     = [ "-" ] number | string | "true" | "false" | "null"
                | "[" [ literal { "," literal } ] "]" ;
    return      = "RETURN" item { "," item } ;
    item        = expr [ "AS" name ] ;
    order       = "ORDER" "BY" expr [ "ASC" | "DESC" ] { "," expr [ "ASC" | "DESC" ] } ;
    limit       = "LIMIT" integer ;

``name`` is an identifier (plain or back-quoted); ``key`` additionally admits
keywords, so ``a.desc`` and ``:Order`` parse.

A second entry point, :func:`parse_script`, reads the MERGE statements that
:mod:`mrm3.interchange` writes::

    script      = { statement } EOF ;
    statement   = ( "MERGE" node
                  | "MATCH" node "," node "MERGE" "(" name ")" rel "(" name ")" ) ";" ;
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    COMPARISON_OPS,
    BoolOp,
    Comparison,
    Expression,
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
from ..vocabulary import NODE_LABELS, RELATION_TYPES
from .lexer import QueryError, Token, tokenize


class ParseError(QueryError):
    def __init__(self, message: str, token: Token, expected=()):
        self.expected = tuple(sorted(set(expected)))
        if self.expected:
            message = f"{message}; expected one of: {', '.join(self.expected)}"
        super().__init__(message, token.line, token.column)


class SemanticError(QueryError):
    pass


def _describe(token: Token) -> str:
    if token.kind == "EOF":
        return "end of input"
    return repr(token.text or token.value)


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        # id(ast object) -> token where it starts, for semantic error positions
        self.where: dict[int, Token] = {}

    def mark(self, obj, tok: Token):
        self.where[id(obj)] = tok
        return obj

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, kind: str, value=None) -> bool:
        tok = self.tok
        return tok.kind == kind and (value is None or tok.value == value)

    def at_punct(self, *values: str) -> bool:
        return self.tok.kind == "PUNCT" and self.tok.value in values

    def at_keyword(self, *values: str) -> bool:
        return self.tok.kind == "KEYWORD" and self.tok.value in values

    def take(self) -> Token:
        tok = self.tok
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def fail(self, expected) -> ParseError:
        return ParseError(f"unexpected {_describe(self.tok)}", self.tok, expected)

    def expect_punct(self, value: str) -> Token:
        if not self.at_punct(value):
            raise self.fail([repr(value)])
        return self.take()

    def expect_keyword(self, value: str) -> Token:
        if not self.at_keyword(value):
            raise self.fail([value])
        return self.take()

    def name(self) -> str:
        if self.tok.kind != "IDENT":
            raise self.fail(["identifier"])
        return self.take().value

    def key(self) -> str:
        if self.tok.kind not in ("IDENT", "KEYWORD"):
            raise self.fail(["identifier"])
        tok = self.take()
        return tok.value if tok.kind == "IDENT" else tok.text

    # -- query -------------------------------------------------------------

    def query(self) -> Query:
        matches = []
        while self.at_keyword("MATCH"):
            self.take()
            matches.append(self.path())
        if not matches:
            raise self.fail(["MATCH"])
        where = None
        if self.at_keyword("WHERE"):
            self.take()
            where = self.expression()
        if not self.at_keyword("RETURN"):
            raise self.fail(["MATCH", "WHERE", "RETURN"] if where is None else ["RETURN"])
        self.take()
        returns = [self.return_item()]
        while self.at_punct(","):
            self.take()
            returns.append(self.return_item())
        order = []
        if self.at_keyword("ORDER"):
            self.take()
            self.expect_keyword("BY")
            order.append(self.order_key())
            while self.at_punct(","):
                self.take()
                order.append(self.order_key())
        limit = None
        if self.at_keyword("LIMIT"):
            self.take()
            tok = self.tok
            if tok.kind != "INT":
                raise self.fail(["positive integer"])
            self.take()
            if tok.value < 1:
                raise ParseError("LIMIT must be a positive integer", tok)
            limit = tok.value
        if self.at_punct(";"):
            self.take()
        if not self.at("EOF"):
            expected = ["end of input"]
            if not order and limit is None:
                expected += ["ORDER", "LIMIT", "','"]
            elif limit is None:
                expected += ["LIMIT", "','"]
            raise self.fail(expected)
        return Query(tuple(matches), where, tuple(returns), tuple(order), limit)

    def return_item(self) -> ReturnItem:
        tok = self.tok
        expr = self.expression()
        alias = None
        if self.at_keyword("AS"):
            self.take()
            tok = self.tok
            alias = self.name()
        return self.mark(ReturnItem(expr, alias), tok)

    def order_key(self) -> OrderKey:
        expr = self.expression()
        ascending = True
        if self.at_keyword("ASC", "DESC"):
            ascending = self.take().value == "ASC"
        return OrderKey(expr, ascending)

    # -- patterns ----------------------------------------------------------

    def path(self) -> MatchClause:
        nodes = [self.node()]
        rels = []
        while self.at_punct("-", "<-"):
            rels.append(self.rel())
            nodes.append(self.node())
        return MatchClause(tuple(nodes), tuple(rels))

    def node(self) -> NodePattern:
        start = self.expect_punct("(")
        variable = label = None
        label_tok = None
        props: tuple = ()
        if self.tok.kind == "IDENT":
            variable = self.name()
        if self.at_punct(":"):
            self.take()
            label_tok = self.tok
            label = self.key()
        if self.at_punct("{"):
            props = self.property_map()
        if not self.at_punct(")"):
            expected = ["')'"]
            if label is None and not props:
                expected += ["':'", "'{'"]
            elif not props:
                expected += ["'{'"]
            raise self.fail(expected)
        self.take()
        node = self.mark(NodePattern(variable, label, props), start)
        if label_tok is not None:
            self.where[id(node), "label"] = label_tok
        return node

    def property_map(self) -> tuple:
        self.expect_punct("{")
        items = []
        seen = set()
        if not self.at_punct("}"):
            while True:
                tok = self.tok
                key = self.key()
                if key in seen:
                    raise ParseError(f"duplicate property {key!r} in map", tok)
                seen.add(key)
                self.expect_punct(":")
                items.append((key, self.literal()))
                if self.at_punct(","):
                    self.take()
                    continue
                break
        self.expect_punct("}")
        return tuple(items)

    def rel(self) -> RelPattern:
        start = self.take()
        variable = rel_type = type_tok = None
        if self.at_punct("["):
            self.take()
            if self.tok.kind == "IDENT":
                variable = self.name()
            if self.at_punct(":"):
                self.take()
                type_tok = self.tok
                rel_type = self.key()
            self.expect_punct("]")
        if start.value == "<-":
            self.expect_punct("-")
            direction = "<-"
        elif self.at_punct("->"):
            self.take()
            direction = "->"
        elif self.at_punct("-"):
            self.take()
            direction = "--"
        else:
            raise self.fail(["'-'", "'->'"])
        rel = self.mark(RelPattern(variable, rel_type, direction), start)
        if type_tok is not None:
            self.where[id(rel), "type"] = type_tok
        return rel

    # -- expressions -------------------------------------------------------

    def expression(self) -> Expression:
        expr = self.conjunction()
        while self.at_keyword("OR"):
            self.take()
            expr = BoolOp("OR", expr, self.conjunction())
        return expr

    def conjunction(self) -> Expression:
        expr = self.negation()
        while self.at_keyword("AND"):
            self.take()
            expr = BoolOp("AND", expr, self.negation())
        return expr

    def negation(self) -> Expression:
        if self.at_keyword("NOT"):
            self.take()
            return Not(self.negation())
        return self.comparison()

    def comparison(self) -> Expression:
        left = self.operand()
        if self.at_punct(*COMPARISON_OPS):
            op = self.take().value
            return Comparison(op, left, self.operand())
        if self.at_punct("<-"):
            # "a<-1" lexes as "<-" "1"
            self.take()
            right = self.number(negate=True)
            return Comparison("<", left, right)
        return left

    def operand(self) -> Expression:
        tok = self.tok
        if tok.kind == "IDENT":
            name = self.name()
            if self.at_punct("."):
                self.take()
                return self.mark(PropertyAccess(name, self.key()), tok)
            return self.mark(Variable(name), tok)
        if self.at_punct("("):
            self.take()
            expr = self.expression()
            self.expect_punct(")")
            return expr
        if tok.kind in ("INT", "FLOAT", "STRING") or self.at_punct("-", "[") or self.at_keyword(
            "TRUE", "FALSE", "NULL"
        ):
            return self.literal()
        raise self.fail(["identifier", "literal", "'('", "NOT"])

    def number(self, negate: bool = False) -> Literal:
        if self.tok.kind not in ("INT", "FLOAT"):
            raise self.fail(["number"])
        value = self.take().value
        return Literal(-value if negate else value)

    def literal(self) -> Literal:
        tok = self.tok
        if self.at_punct("-"):
            self.take()
            return self.number(negate=True)
        if tok.kind in ("INT", "FLOAT", "STRING"):
            self.take()
            return Literal(tok.value)
        if self.at_keyword("TRUE", "FALSE", "NULL"):
            self.take()
            return Literal({"TRUE": True, "FALSE": False, "NULL": None}[tok.value])
        if self.at_punct("["):
            self.take()
            items = []
            if not self.at_punct("]"):
                while True:
                    item = self.literal()
                    if isinstance(item.value, tuple) or item.value is None:
                        raise ParseError("list literals may only hold non-null scalars", tok)
                    items.append(item.value)
                    if self.at_punct(","):
                        self.take()
                        continue
                    break
            self.expect_punct("]")
            return Literal(tuple(items))
        raise self.fail(["literal"])

    # -- MERGE scripts -----------------------------------------------------

    def script(self) -> list:
        statements = []
        while not self.at("EOF"):
            start = self.tok
            if self.at_keyword("MERGE"):
                self.take()
                node = self.node()
                if node.label is None:
                    raise ParseError("MERGE node needs a label", start)
                statements.append(MergeNode(node, start.line))
            elif self.at_keyword("MATCH"):
                self.take()
                first = self.node()
                self.expect_punct(",")
                second = self.node()
                self.expect_keyword("MERGE")
                self.expect_punct("(")
                src_tok = self.tok
                src = self.name()
                self.expect_punct(")")
                if not self.at_punct("-", "<-"):
                    raise self.fail(["'-'", "'<-'"])
                rel = self.rel()
                self.expect_punct("(")
                dst_tok = self.tok
                dst = self.name()
                self.expect_punct(")")
                bound = {first.variable, second.variable} - {None}
                for name, tok in ((src, src_tok), (dst, dst_tok)):
                    if name not in bound:
                        raise SemanticError(f"variable {name!r} is not defined", tok.line, tok.column)
                if rel.type is None or rel.direction == "--" or rel.variable:
                    raise ParseError("MERGE relationship needs a type and a direction", start)
                if rel.direction == "<-":
                    src, dst = dst, src
                ends = {first.variable: first, second.variable: second}
                statements.append(MergeRelationship(ends[src], rel.type, ends[dst], start.line))
            else:
                raise self.fail(["MERGE", "MATCH", "end of input"])
            self.expect_punct(";")
        return statements


@dataclass(frozen=True)
class MergeNode:
    node: NodePattern
    line: int


@dataclass(frozen=True)
class MergeRelationship:
    source: NodePattern
    type: str
    target: NodePattern
    line: int


def _check_query(query: Query, where: dict) -> None:
    def error(message: str, obj, part=None) -> SemanticError:
        tok = where.get(id(obj) if part is None else (id(obj), part))
        return SemanticError(message, tok.line if tok else None, tok.column if tok else None)

    kinds: dict[str, str] = {}
    for clause in query.matches:
        for idx, node in enumerate(clause.nodes):
            if node.label is not None and node.label not in NODE_LABELS:
                raise error(f"unknown node label {node.label!r}", node, "label")
            if node.variable:
                if kinds.setdefault(node.variable, "node") != "node":
                    raise error(f"variable {node.variable!r} is used as both node and relationship", node)
            if idx:
                rel = clause.rels[idx - 1]
                if rel.type is not None and rel.type not in RELATION_TYPES:
                    raise error(f"unknown relationship type {rel.type!r}", rel, "type")
                if rel.variable:
                    if kinds.setdefault(rel.variable, "rel") != "rel":
                        raise error(f"variable {rel.variable!r} is used as both node and relationship", rel)
        seen_rels = set()
        for rel in clause.rels:
            if rel.variable in seen_rels:
                raise error("a relationship variable may appear only once per MATCH", rel)
            if rel.variable:
                seen_rels.add(rel.variable)

    def check(expr: Expression, allowed: set[str]) -> None:
        if isinstance(expr, Variable):
            if expr.name not in allowed:
                raise error(f"variable {expr.name!r} is not defined", expr)
        elif isinstance(expr, PropertyAccess):
            if expr.variable not in allowed:
                raise error(f"variable {expr.variable!r} is not defined", expr)
        elif isinstance(expr, (Comparison, BoolOp)):
            check(expr.left, allowed)
            check(expr.right, allowed)
        elif isinstance(expr, Not):
            check(expr.operand, allowed)

    bound = set(kinds)
    if query.where is not None:
        check(query.where, bound)
    columns: set[str] = set()
    for item in query.returns:
        check(item.expression, bound)
        if item.column in columns:
            what = "alias" if item.alias is not None else "column name"
            raise error(f"duplicate {what} {item.column!r} in RETURN", item)
        columns.add(item.column)
    aliases = {item.alias for item in query.returns if item.alias is not None}
    for key in query.order:
        check(key.expression, bound | aliases)


def parse(text: str) -> Query:
    """Parse query text into a :class:`Query`.

    Raises:
        LexError, ParseError: on malformed text, with 1-based line and column.
        SemanticError: when a variable is used without being bound by a MATCH,
            bound with two kinds, when RETURN repeats a column name, or when
            a label or relationship type is outside the vocabulary. Also
            positioned.
    """
    parser = _Parser(text)
    query = parser.query()
    _check_query(query, parser.where)
    return query


def parse_script(text: str) -> list:
    """Parse a MERGE script into :class:`MergeNode` / :class:`MergeRelationship` records."""
    return _Parser(text).script()
