"""mrm3: machine-readable ML model metadata as an embedded knowledge graph.

Typical flow::

    from mrm3 import fixtures, ontology, query

    graph = ontology.new_graph()
    ontology.ingest(graph, fixtures.generate())
    table = query.run(graph, "MATCH (m:Model) RETURN m.name ORDER BY m.name LIMIT 3")
"""

from .ontology import IngestReport, ingest, map_document, merge_into, new_graph, open_graph
from .query import ResultTable, execute, explain, parse, run
from .schema import ModelMetadataDocument, ValidationReport, load_schema, parse_document, validate_document
from .store import GraphStats, PropertyGraph, load_snapshot, save_snapshot
from .vocabulary import NodeLabel, RelationType

__version__ = "0.1.0"

__all__ = [
    "GraphStats",
    "IngestReport",
    "ModelMetadataDocument",
    "NodeLabel",
    "PropertyGraph",
    "RelationType",
    "ResultTable",
    "ValidationReport",
    "execute",
    "explain",
    "ingest",
    "load_schema",
    "load_snapshot",
    "map_document",
    "merge_into",
    "new_graph",
    "open_graph",
    "parse",
    "parse_document",
    "run",
    "save_snapshot",
    "validate_document",
]
