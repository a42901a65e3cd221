"""JSON-over-HTTP service for programmatic consumers (MLOps orchestrators).

Endpoints::

    POST /api/documents      one metadata document -> 200 IngestReport | 422 ValidationReport
    POST /api/query          {"query": text[, "maxRows": n]} -> 200 {columns, rows, truncated}
    GET  /api/stats          -> 200 GraphStats
    GET  /api/graph?format=  graphml (default) | dot | cypher
    GET  /health             -> 200 {"status": "ok"}
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from ..query import QueryError
from .service import DEFAULT_ROW_CAP, GraphService

log = logging.getLogger(__name__)

_CONTENT_TYPES = {
    "graphml": "application/graphml+xml; charset=utf-8",
    "dot": "text/vnd.graphviz; charset=utf-8",
    "cypher": "application/x-cypher-query; charset=utf-8",
}


def query_error_body(exc: QueryError) -> dict:
    body = {"error": type(exc).__name__, "message": exc.detail, "line": exc.line, "column": exc.column}
    expected = getattr(exc, "expected", None)
    if expected:
        body["expected"] = list(expected)
    return body


class _Handler(BaseHTTPRequestHandler):
    service: GraphService
    server_version = "mrm3"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        log.info("%s - %s", self.address_string(), fmt % args)

    def _send(self, status: int, body, content_type: str = "application/json; charset=utf-8") -> None:
        if isinstance(body, (dict, list)):
            payload = json.dumps(body, ensure_ascii=False).encode("utf-8")
        else:
            payload = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def do_GET(self):
        url = urlsplit(self.path)
        if url.path == "/health":
            return self._send(200, {"status": "ok"})
        if url.path == "/api/stats":
            return self._send(200, self.service.stats().to_dict())
        if url.path == "/api/graph":
            fmt = parse_qs(url.query).get("format", ["graphml"])[0]
            if fmt not in _CONTENT_TYPES:
                return self._send(400, {"error": "BadRequest", "message": f"unknown format {fmt!r}"})
            return self._send(200, self.service.export(fmt), _CONTENT_TYPES[fmt])
        if url.path in ("/api/documents", "/api/query"):
            return self._send(405, {"error": "MethodNotAllowed"})
        return self._send(404, {"error": "NotFound"})

    def do_POST(self):
        path = urlsplit(self.path).path
        if path == "/api/documents":
            return self._post_document()
        if path == "/api/query":
            return self._post_query()
        if path in ("/health", "/api/stats", "/api/graph"):
            return self._send(405, {"error": "MethodNotAllowed"})
        return self._send(404, {"error": "NotFound"})

    def _post_document(self):
        report, ingest = self.service.ingest_raw(self._body())
        if ingest is not None:
            return self._send(200, ingest.to_dict())
        status = 400 if any(v.rule == "syntax" for v in report.violations) else 422
        return self._send(status, report.to_dict())

    def _post_query(self):
        try:
            payload = json.loads(self._body() or b"null")
        except ValueError as exc:
            return self._send(400, {"error": "BadRequest", "message": f"malformed JSON body: {exc}"})
        if not isinstance(payload, dict) or not isinstance(payload.get("query"), str):
            return self._send(400, {"error": "BadRequest", "message": 'body must be {"query": "<text>"}'})
        cap = payload.get("maxRows", DEFAULT_ROW_CAP)
        if cap is not None and (not isinstance(cap, int) or isinstance(cap, bool) or cap < 1):
            return self._send(400, {"error": "BadRequest", "message": "maxRows must be a positive integer"})
        try:
            table = self.service.query(payload["query"], row_cap=cap)
        except QueryError as exc:
            return self._send(400, query_error_body(exc))
        return self._send(200, {**table.to_dict(), "truncated": table.truncated})


def make_server(service: GraphService, host: str = "127.0.0.1", port: int = 7474) -> ThreadingHTTPServer:
    """Bind a threaded server; ``port=0`` picks a free port."""
    handler = type("Handler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


def http_serve(service: GraphService, port: int, host: str = "127.0.0.1") -> None:
    """Serve until interrupted."""
    server = make_server(service, host, port)
    log.info("serving on http://%s:%d", host, server.server_address[1])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def serve_in_background(service: GraphService, host: str = "127.0.0.1", port: int = 0):
    """Start a server on a daemon thread; returns ``(server, base_url)``."""
    server = make_server(service, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, f"http://{host}:{server.server_address[1]}"
