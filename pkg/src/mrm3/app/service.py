"""Shared graph handle used by the CLI and the HTTP server."""

from __future__ import annotations

import contextlib
import os
import threading
from pathlib import Path

from .. import interchange
from ..ontology import IngestReport, map_document, merge_into, new_graph, open_graph
from ..query import ResultTable, execute, parse
from ..schema import ModelMetadataDocument, ValidationReport, parse_document, validate_document
from ..store import GraphStats, PropertyGraph, save_snapshot

DEFAULT_ROW_CAP = 10_000
DB_ENV = "MRM3_DB"


class ReadWriteLock:
    """Many concurrent readers or one writer; waiting writers block new readers."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0

    @contextlib.contextmanager
    def read(self):
        with self._cond:
            while self._writer or self._writers_waiting:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if not self._readers:
                    self._cond.notify_all()

    @contextlib.contextmanager
    def write(self):
        with self._cond:
            self._writers_waiting += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._writers_waiting -= 1
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


class GraphService:
    """A graph plus its snapshot path, with serialized writes.

    Args:
        db_path: snapshot file. Loaded if it exists; rewritten after every
            successful ingest batch. ``None`` keeps the graph in memory only.
    """

    def __init__(self, db_path: str | os.PathLike | None = None, graph: PropertyGraph | None = None):
        self.db_path = Path(db_path) if db_path is not None else None
        if graph is not None:
            self.graph = graph
        elif self.db_path is not None and self.db_path.exists():
            self.graph = open_graph(self.db_path)
        else:
            self.graph = new_graph()
        self.lock = ReadWriteLock()

    def ingest(self, documents: list[ModelMetadataDocument]) -> list[IngestReport]:
        """Merge a batch as one unit.

        Either every document lands and the snapshot is rewritten, or the
        graph is left as it was.
        """
        with self.lock.write(), self.graph.atomic():
            reports = [merge_into(self.graph, map_document(doc)) for doc in documents]
            if self.db_path is not None:
                save_snapshot(self.graph, self.db_path)
        return reports

    def ingest_raw(self, raw: str | bytes) -> tuple[ValidationReport, IngestReport | None]:
        report = validate_document(raw)
        if not report.valid:
            return report, None
        return report, self.ingest([parse_document(raw)])[0]

    def query(self, text: str, row_cap: int | None = DEFAULT_ROW_CAP) -> ResultTable:
        ast = parse(text)
        with self.lock.read():
            return execute(self.graph, ast, row_cap=row_cap)

    def stats(self) -> GraphStats:
        with self.lock.read():
            return self.graph.stats()

    def export(self, fmt: str) -> str:
        exporters = {
            "cypher": interchange.export_cypher,
            "dot": interchange.export_dot,
            "graphml": interchange.export_graphml,
        }
        if fmt not in exporters:
            raise ValueError(f"unknown export format {fmt!r}")
        with self.lock.read():
            return exporters[fmt](self.graph)
