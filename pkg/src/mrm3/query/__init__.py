"""Cypher-compatible query subset: tokenizer, parser, planner and executor."""

from .ast import (
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
    pretty_print,
)
from .executor import ResultTable, evaluate, execute, explain, plan, run
from .lexer import LexError, QueryError, Token, tokenize
from .parser import MergeNode, MergeRelationship, ParseError, SemanticError, parse, parse_script

__all__ = [
    "BoolOp",
    "Comparison",
    "LexError",
    "Literal",
    "MatchClause",
    "MergeNode",
    "MergeRelationship",
    "NodePattern",
    "Not",
    "OrderKey",
    "ParseError",
    "PropertyAccess",
    "Query",
    "QueryError",
    "RelPattern",
    "ResultTable",
    "ReturnItem",
    "SemanticError",
    "Token",
    "Variable",
    "evaluate",
    "execute",
    "explain",
    "parse",
    "parse_script",
    "plan",
    "pretty_print",
    "run",
    "tokenize",
]
