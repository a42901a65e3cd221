"""Command-line interface.

Exit codes: 0 success, 1 validation or query failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from .. import fixtures
from ..query import QueryError, explain, parse
from ..schema import load_schema, parse_document, validate_document
from .server import http_serve, query_error_body
from .service import DB_ENV, DEFAULT_ROW_CAP, GraphService

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


def _format_cell(value, empty: str) -> str:
    if value is None:
        return empty
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (str, int)):
        return str(value)
    return json.dumps(value, ensure_ascii=False)


def render_table(columns: list[str], rows: list[list]) -> str:
    cells = [[_format_cell(v, "null") for v in row] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    line = lambda values: " | ".join(v.ljust(w) for v, w in zip(values, widths)).rstrip()
    out = [line(columns), "-+-".join("-" * w for w in widths)]
    out += [line(r) for r in cells]
    return "\n".join(out) + "\n"


def render_csv(columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(v, "") for v in row])
    return buf.getvalue()


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _require_db(args) -> Path:
    if not args.db:
        raise _Usage(f"--db is required (or set {DB_ENV})")
    return Path(args.db)


def _open_existing(args) -> GraphService:
    db = _require_db(args)
    if not db.exists():
        raise FileNotFoundError(f"database snapshot {db} does not exist")
    return GraphService(db)


class _Usage(Exception):
    pass


# -- subcommands -----------------------------------------------------------


def cmd_schema_export(args) -> int:
    _write(args.out, json.dumps(load_schema(), indent=2) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    status = EXIT_OK
    results = []
    for path in args.files:
        report = validate_document(_read(path))
        results.append({"file": path, **report.to_dict()})
        if not report.valid:
            status = EXIT_FAILURE
    if args.json:
        print(json.dumps(results, indent=2))
    else:
        for res in results:
            print(f"{res['file']}: {'valid' if res['valid'] else 'INVALID'}")
            for v in res["violations"]:
                print(f"  {v['jsonPath']}  [{v['rule']}] {v['message']}")
    return status


def cmd_ingest(args) -> int:
    db = _require_db(args)
    docs, failed = [], False
    for path in args.files:
        raw = _read(path)
        report = validate_document(raw)
        if not report.valid:
            failed = True
            print(f"{path}: INVALID", file=sys.stderr)
            for v in report.violations:
                print(f"  {v.json_path}  [{v.rule}] {v.message}", file=sys.stderr)
            continue
        docs.append(parse_document(raw))
    if failed:
        print("nothing ingested: fix the invalid documents and retry", file=sys.stderr)
        return EXIT_FAILURE
    service = GraphService(db)
    reports = service.ingest(docs)
    totals = {
        key: sum(getattr(r, attr) for r in reports)
        for key, attr in (
            ("nodesCreated", "nodes_created"),
            ("nodesMatched", "nodes_matched"),
            ("relationshipsCreated", "relationships_created"),
            ("relationshipsMatched", "relationships_matched"),
        )
    }
    if args.json:
        print(json.dumps({"documents": len(reports), **totals}))
    else:
        print(
            f"ingested {len(reports)} document(s): {totals['nodesCreated']} nodes created, "
            f"{totals['nodesMatched']} matched; {totals['relationshipsCreated']} relationships created, "
            f"{totals['relationshipsMatched']} matched"
        )
    return EXIT_OK


def cmd_stats(args) -> int:
    stats = _open_existing(args).stats()
    if args.json:
        print(json.dumps(stats.to_dict(), indent=2))
        return EXIT_OK
    rows = [["All Relations", stats.total_relationships], ["All Nodes", stats.total_nodes]]
    rows += [[f"Relation {k}", v] for k, v in stats.relationship_count_by_type.items()]
    rows += [[f"Node {k}", v] for k, v in stats.node_count_by_label.items()]
    sys.stdout.write(render_table(["KG Entities", "Quantity"], rows))
    return EXIT_OK


def cmd_query(args) -> int:
    text = args.execute if args.execute is not None else _read(args.file).decode("utf-8")
    try:
        if args.explain:
            service = _open_existing(args)
            print(explain(parse(text), service.graph))
            return EXIT_OK
        cap = None if args.max_rows == 0 else args.max_rows
        table = _open_existing(args).query(text, row_cap=cap)
    except QueryError as exc:
        if args.format == "json":
            print(json.dumps(query_error_body(exc)), file=sys.stderr)
        else:
            print(f"query error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    data = table.to_dict()
    if args.format == "json":
        print(json.dumps({**data, "truncated": table.truncated}, ensure_ascii=False))
    elif args.format == "csv":
        sys.stdout.write(render_csv(data["columns"], data["rows"]))
    else:
        sys.stdout.write(render_table(data["columns"], data["rows"]))
        print(f"({len(table)} row{'s' if len(table) != 1 else ''})")
    if table.truncated:
        print(f"warning: output truncated to {cap} rows; add LIMIT or --max-rows", file=sys.stderr)
    return EXIT_OK


def cmd_export(args) -> int:
    _write(args.out, _open_existing(args).export(args.format))
    return EXIT_OK


def cmd_fixture_generate(args) -> int:
    config = fixtures.FixtureConfig(random_seed=args.seed)
    paths = fixtures.write_corpus(fixtures.generate(config), args.out)
    print(f"wrote {len(paths)} documents to {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    service = GraphService(_require_db(args))
    http_serve(service, args.port, args.host)
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    default_db = os.environ.get(DB_ENV)
    parser = argparse.ArgumentParser(prog="mrm3", description="Machine-readable ML model metadata graph.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_db(p):
        p.add_argument("--db", default=default_db, help=f"graph snapshot file (default: ${DB_ENV})")
        return p

    schema = sub.add_parser("schema", help="metadata JSON schema")
    schema_sub = schema.add_subparsers(dest="action", required=True)
    export_schema = schema_sub.add_parser("export", help="print the JSON schema")
    export_schema.add_argument("--out", help="write to a file instead of stdout")
    export_schema.set_defaults(func=cmd_schema_export)

    validate = sub.add_parser("validate", help="validate metadata documents")
    validate.add_argument("files", nargs="+", metavar="FILE")
    validate.add_argument("--json", action="store_true", help="machine-readable report")
    validate.set_defaults(func=cmd_validate)

    ingest = with_db(sub.add_parser("ingest", help="validate and merge documents into the graph"))
    ingest.add_argument("files", nargs="+", metavar="FILE")
    ingest.add_argument("--json", action="store_true")
    ingest.set_defaults(func=cmd_ingest)

    stats = with_db(sub.add_parser("stats", help="node and relationship counts"))
    stats.add_argument("--json", action="store_true")
    stats.set_defaults(func=cmd_stats)

    query = with_db(sub.add_parser("query", help="run a query"))
    source = query.add_mutually_exclusive_group(required=True)
    source.add_argument("-e", "--execute", metavar="TEXT", help="query text")
    source.add_argument("-f", "--file", metavar="FILE", help="file holding the query")
    query.add_argument("--format", choices=("table", "json", "csv"), default="table")
    query.add_argument(
        "--max-rows",
        type=int,
        default=DEFAULT_ROW_CAP,
        help=f"row cap when the query has no LIMIT (default {DEFAULT_ROW_CAP}; 0 disables)",
    )
    query.add_argument("--explain", action="store_true", help="print the plan instead of running")
    query.set_defaults(func=cmd_query)

    export = with_db(sub.add_parser("export", help="export the graph"))
    export.add_argument("--format", choices=("cypher", "dot", "graphml"), required=True)
    export.add_argument("--out", required=True, metavar="FILE", help="output file ('-' for stdout)")
    export.set_defaults(func=cmd_export)

    fixture = sub.add_parser("fixture", help="synthetic localization corpus")
    fixture_sub = fixture.add_subparsers(dest="action", required=True)
    gen = fixture_sub.add_parser("generate", help="write one JSON document per model")
    gen.add_argument("--out", required=True, metavar="DIR")
    gen.add_argument("--seed", type=int, default=fixtures.FixtureConfig.random_seed)
    gen.set_defaults(func=cmd_fixture_generate)

    serve = with_db(sub.add_parser("serve", help="run the HTTP JSON API"))
    serve.add_argument("--port", type=int, default=7474)
    serve.add_argument("--host", default="127.0.0.1")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"mrm3: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"mrm3: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
