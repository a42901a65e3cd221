"""Embedded, append-only property graph.

Nodes and relationships get monotonically increasing integer ids. The graph
keeps a label index, a relationship-type index, per-node adjacency lists and
an equality index over a configurable set of (label, property) pairs that the
ingest layer uses for MERGE lookups. Nothing is ever deleted; a
:meth:`PropertyGraph.atomic` block undoes its own writes if it fails.

Snapshots are line-delimited JSON::

    {"formatVersion":1,"nodeCount":N,"relationshipCount":R}
    {"kind":"node","id":1,"label":"Model","props":{...}}
    ...
    {"kind":"rel","id":1,"type":"TRAINED_ON","source":1,"target":2,"props":{...}}
"""

from __future__ import annotations

import contextlib
import json
import math
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

from .vocabulary import NODE_LABELS, RELATION_TYPES, NodeLabel, RelationType

__all__ = [
    "GraphError",
    "ReferentialIntegrityError",
    "DuplicateRelationshipError",
    "UnknownEntityError",
    "SnapshotError",
    "Node",
    "Relationship",
    "GraphStats",
    "PropertyGraph",
    "save_snapshot",
    "load_snapshot",
    "check_property_value",
    "value_key",
]

FORMAT_VERSION = 1


class GraphError(Exception):
    pass


class ReferentialIntegrityError(GraphError):
    pass


class DuplicateRelationshipError(GraphError):
    def __init__(self, existing_id: int, triple: tuple[str, int, int]):
        self.existing_id = existing_id
        super().__init__(f"relationship {triple} already exists with id {existing_id}")


class UnknownEntityError(GraphError, KeyError):
    pass


class SnapshotError(GraphError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def _is_scalar(value: Any) -> bool:
    if isinstance(value, (bool, int, str)):
        return True
    return isinstance(value, float) and math.isfinite(value)


def check_property_value(value: Any) -> Any:
    """Validate a property value, returning it with lists normalised to ``list``."""
    if value is None or _is_scalar(value):
        return value
    if isinstance(value, (list, tuple)):
        if all(_is_scalar(item) for item in value):
            return list(value)
        raise TypeError("lists may only contain finite scalars")
    raise TypeError(f"unsupported property value {value!r}")


def value_key(value: Any) -> tuple:
    """Hashable equality key; ``1`` and ``1.0`` collide, ``True`` and ``1`` do not."""
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, (int, float)):
        return ("num", value)
    if isinstance(value, list):
        return ("list", tuple(value_key(v) for v in value))
    return ("str" if isinstance(value, str) else "null", value)


@dataclass
class Node:
    id: int
    label: str
    properties: dict[str, Any] = field(default_factory=dict)


@dataclass
class Relationship:
    id: int
    type: str
    source: int
    target: int
    properties: dict[str, Any] = field(default_factory=dict)


@dataclass
class GraphStats:
    node_count_by_label: dict[str, int]
    relationship_count_by_type: dict[str, int]

    @property
    def total_nodes(self) -> int:
        return sum(self.node_count_by_label.values())

    @property
    def total_relationships(self) -> int:
        return sum(self.relationship_count_by_type.values())

    def to_dict(self) -> dict:
        return {
            "nodeCountByLabel": dict(self.node_count_by_label),
            "relationshipCountByType": dict(self.relationship_count_by_type),
            "totalNodes": self.total_nodes,
            "totalRelationships": self.total_relationships,
        }


def _label(label) -> str:
    label = str(label)
    if label not in NODE_LABELS:
        raise ValueError(f"unknown node label {label!r}")
    return label


def _rel_type(rel_type) -> str:
    rel_type = str(rel_type)
    if rel_type not in RELATION_TYPES:
        raise ValueError(f"unknown relationship type {rel_type!r}")
    return rel_type


def _clean_props(properties: Mapping[str, Any] | None) -> dict[str, Any]:
    out = {}
    for name, value in (properties or {}).items():
        if not isinstance(name, str):
            raise TypeError(f"property names must be strings, got {name!r}")
        out[name] = check_property_value(value)
    return out


class PropertyGraph:
    """In-memory property graph.

    Args:
        indexed: (label, property) pairs kept in the equality index. Lookups
            through :meth:`find_nodes` use it when a filter names one of them.
    """

    def __init__(self, indexed: Iterable[tuple[str, str]] = ()):
        self._nodes: dict[int, Node] = {}
        self._rels: dict[int, Relationship] = {}
        self._by_label: dict[str, dict[int, None]] = {}
        self._by_type: dict[str, dict[int, None]] = {}
        self._out: dict[int, list[int]] = {}
        self._in: dict[int, list[int]] = {}
        self._triples: dict[tuple[str, int, int], int] = {}
        self._indexed = {(str(lbl), prop) for lbl, prop in indexed}
        self._prop_index: dict[tuple[str, str, tuple], set[int]] = {}
        self._next_node_id = 1
        self._next_rel_id = 1
        self._undo: list | None = None

    # -- writes ----------------------------------------------------------

    def create_node(self, label: NodeLabel | str, properties: Mapping[str, Any] | None = None) -> int:
        label = _label(label)
        node = Node(self._next_node_id, label, _clean_props(properties))
        self._next_node_id += 1
        self._insert_node(node)
        if self._undo is not None:
            self._undo.append(("node", node.id))
        return node.id

    def create_relationship(
        self,
        rel_type: RelationType | str,
        source: int,
        target: int,
        properties: Mapping[str, Any] | None = None,
    ) -> int:
        rel_type = _rel_type(rel_type)
        for end in (source, target):
            if end not in self._nodes:
                raise ReferentialIntegrityError(f"node {end} does not exist")
        triple = (rel_type, source, target)
        if triple in self._triples:
            raise DuplicateRelationshipError(self._triples[triple], triple)
        rel = Relationship(self._next_rel_id, rel_type, source, target, _clean_props(properties))
        self._next_rel_id += 1
        self._insert_rel(rel)
        if self._undo is not None:
            self._undo.append(("rel", rel.id))
        return rel.id

    def set_properties(self, node_id: int, properties: Mapping[str, Any]) -> None:
        """Overwrite the given properties of a node; other properties are kept."""
        node = self.node(node_id)
        props = _clean_props(properties)
        if self._undo is not None:
            self._undo.append(("props", node_id, dict(node.properties)))
        self._unindex(node)
        node.properties.update(props)
        self._index(node)

    @contextlib.contextmanager
    def atomic(self) -> Iterator["PropertyGraph"]:
        """Run a block of writes that is rolled back entirely on exception."""
        if self._undo is not None:
            yield self
            return
        self._undo = []
        try:
            yield self
        except BaseException:
            self._rollback(self._undo)
            raise
        finally:
            self._undo = None

    def _rollback(self, log: list) -> None:
        for entry in reversed(log):
            if entry[0] == "rel":
                rel = self._rels.pop(entry[1])
                del self._by_type[rel.type][rel.id]
                self._out[rel.source].remove(rel.id)
                self._in[rel.target].remove(rel.id)
                del self._triples[(rel.type, rel.source, rel.target)]
                self._next_rel_id = rel.id
            elif entry[0] == "node":
                node = self._nodes.pop(entry[1])
                self._unindex(node)
                del self._by_label[node.label][node.id]
                del self._out[node.id], self._in[node.id]
                self._next_node_id = node.id
            else:
                node = self._nodes[entry[1]]
                self._unindex(node)
                node.properties = entry[2]
                self._index(node)

    def _insert_node(self, node: Node) -> None:
        self._nodes[node.id] = node
        self._by_label.setdefault(node.label, {})[node.id] = None
        self._out[node.id] = []
        self._in[node.id] = []
        self._index(node)

    def _insert_rel(self, rel: Relationship) -> None:
        self._rels[rel.id] = rel
        self._by_type.setdefault(rel.type, {})[rel.id] = None
        self._out[rel.source].append(rel.id)
        self._in[rel.target].append(rel.id)
        self._triples[(rel.type, rel.source, rel.target)] = rel.id

    def _index(self, node: Node) -> None:
        for name, value in node.properties.items():
            if (node.label, name) in self._indexed:
                self._prop_index.setdefault((node.label, name, value_key(value)), set()).add(node.id)

    def _unindex(self, node: Node) -> None:
        for name, value in node.properties.items():
            if (node.label, name) in self._indexed:
                self._prop_index[(node.label, name, value_key(value))].discard(node.id)

    # -- reads -----------------------------------------------------------

    def node(self, node_id: int) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownEntityError(f"node {node_id} does not exist") from None

    def relationship(self, rel_id: int) -> Relationship:
        try:
            return self._rels[rel_id]
        except KeyError:
            raise UnknownEntityError(f"relationship {rel_id} does not exist") from None

    def nodes(self) -> list[Node]:
        return [self._nodes[i] for i in sorted(self._nodes)]

    def relationships(self) -> list[Relationship]:
        return [self._rels[i] for i in sorted(self._rels)]

    def node_count(self, label: str | None = None) -> int:
        if label is None:
            return len(self._nodes)
        return len(self._by_label.get(str(label), ()))

    def relationship_ids_of_type(self, rel_type: str) -> list[int]:
        return sorted(self._by_type.get(str(rel_type), ()))

    def find_relationship(self, rel_type: str, source: int, target: int) -> int | None:
        return self._triples.get((str(rel_type), source, target))

    def find_nodes(
        self, label: NodeLabel | str | None = None, filters: Mapping[str, Any] | None = None
    ) -> list[Node]:
        """Nodes with the given label whose properties equal ``filters``, by ascending id."""
        filters = dict(filters or {})
        if label is None:
            candidates: Iterable[int] = self._nodes
        else:
            label = str(label)
            candidates = self._by_label.get(label, ())
            for name, value in filters.items():
                if (label, name) in self._indexed:
                    candidates = self._prop_index.get((label, name, value_key(value)), ())
                    break
        found = []
        for node_id in candidates:
            node = self._nodes[node_id]
            if label is not None and node.label != label:
                continue
            if all(
                name in node.properties and value_key(node.properties[name]) == value_key(value)
                for name, value in filters.items()
            ):
                found.append(node)
        found.sort(key=lambda n: n.id)
        return found

    def neighbors(
        self, node_id: int, direction: str = "both", rel_type: str | None = None
    ) -> list[tuple[Relationship, Node]]:
        """Incident relationships and the node at their other end.

        ``direction`` is ``"out"``, ``"in"`` or ``"both"``. A self-loop is
        reported once. Results are ordered by relationship id.
        """
        if node_id not in self._nodes:
            raise UnknownEntityError(f"node {node_id} does not exist")
        if direction == "out":
            rel_ids = set(self._out[node_id])
        elif direction == "in":
            rel_ids = set(self._in[node_id])
        elif direction == "both":
            rel_ids = set(self._out[node_id]) | set(self._in[node_id])
        else:
            raise ValueError(f"direction must be 'out', 'in' or 'both', not {direction!r}")
        result = []
        for rel_id in sorted(rel_ids):
            rel = self._rels[rel_id]
            if rel_type is not None and rel.type != str(rel_type):
                continue
            other = rel.target if rel.source == node_id else rel.source
            result.append((rel, self._nodes[other]))
        return result

    def stats(self) -> GraphStats:
        labels = Counter({label.value: 0 for label in NodeLabel})
        labels.update({lbl: len(ids) for lbl, ids in self._by_label.items()})
        types = Counter({rel.value: 0 for rel in RelationType})
        types.update({t: len(ids) for t, ids in self._by_type.items()})
        return GraphStats(dict(labels), dict(types))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return _deep_records(self) == _deep_records(other)

    def __repr__(self) -> str:
        return f"PropertyGraph(nodes={len(self._nodes)}, relationships={len(self._rels)})"


def stats(graph: PropertyGraph) -> GraphStats:
    return graph.stats()


def _deep_records(graph: PropertyGraph) -> list:
    return [
        ("n", n.id, n.label, sorted((k, value_key(v)) for k, v in n.properties.items()))
        for n in graph.nodes()
    ] + [
        ("r", r.id, r.type, r.source, r.target, sorted((k, value_key(v)) for k, v in r.properties.items()))
        for r in graph.relationships()
    ]


# -- snapshots -------------------------------------------------------------


def _dumps(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def snapshot_lines(graph: PropertyGraph) -> Iterator[str]:
    nodes, rels = graph.nodes(), graph.relationships()
    yield _dumps({"formatVersion": FORMAT_VERSION, "nodeCount": len(nodes), "relationshipCount": len(rels)})
    for n in nodes:
        yield _dumps({"kind": "node", "id": n.id, "label": n.label, "props": dict(sorted(n.properties.items()))})
    for r in rels:
        yield _dumps(
            {
                "kind": "rel",
                "id": r.id,
                "type": r.type,
                "source": r.source,
                "target": r.target,
                "props": dict(sorted(r.properties.items())),
            }
        )


def save_snapshot(graph: PropertyGraph, destination: str | os.PathLike) -> None:
    """Write ``graph`` to ``destination`` atomically (temp file + rename)."""
    destination = Path(destination)
    destination.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=destination.name + ".", suffix=".tmp", dir=destination.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for line in snapshot_lines(graph):
                fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, destination)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _require(record: dict, key: str, kind, line: int):
    if key not in record:
        raise SnapshotError(line, f"missing field {key!r}")
    value = record[key]
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise SnapshotError(line, f"field {key!r} has wrong type")
    return value


def load_snapshot(source: str | os.PathLike, indexed: Iterable[tuple[str, str]] = ()) -> PropertyGraph:
    """Read a snapshot written by :func:`save_snapshot`.

    Raises:
        SnapshotError: naming the first line that is malformed, out of order,
            or inconsistent with the header counts.
    """
    with open(source, encoding="utf-8") as fh:
        text = fh.read()
    return loads_snapshot(text, indexed)


def loads_snapshot(text: str, indexed: Iterable[tuple[str, str]] = ()) -> PropertyGraph:
    graph = PropertyGraph(indexed)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SnapshotError(1, "empty snapshot (missing header)")
    header = None
    seen_rel = False
    for lineno, line in enumerate(lines, start=1):
        try:
            record = json.loads(line, parse_constant=lambda c: float("nan"))
        except ValueError as exc:
            raise SnapshotError(lineno, f"invalid JSON ({exc.msg})") from None
        if not isinstance(record, dict):
            raise SnapshotError(lineno, "record is not an object")
        if lineno == 1:
            if record.get("formatVersion") != FORMAT_VERSION:
                raise SnapshotError(1, "unsupported or missing formatVersion")
            header = (_require(record, "nodeCount", int, 1), _require(record, "relationshipCount", int, 1))
            continue
        kind = record.get("kind")
        props = _require(record, "props", dict, lineno)
        try:
            props = _clean_props(props)
        except TypeError as exc:
            raise SnapshotError(lineno, str(exc)) from None
        if kind == "node":
            if seen_rel:
                raise SnapshotError(lineno, "node record after relationship records")
            node_id = _require(record, "id", int, lineno)
            label = _require(record, "label", str, lineno)
            if label not in NODE_LABELS:
                raise SnapshotError(lineno, f"unknown label {label!r}")
            if node_id in graph._nodes:
                raise SnapshotError(lineno, f"duplicate node id {node_id}")
            graph._insert_node(Node(node_id, label, props))
            graph._next_node_id = max(graph._next_node_id, node_id + 1)
        elif kind == "rel":
            seen_rel = True
            rel_id = _require(record, "id", int, lineno)
            rel_type = _require(record, "type", str, lineno)
            source = _require(record, "source", int, lineno)
            target = _require(record, "target", int, lineno)
            if rel_type not in RELATION_TYPES:
                raise SnapshotError(lineno, f"unknown relationship type {rel_type!r}")
            if source not in graph._nodes or target not in graph._nodes:
                raise SnapshotError(lineno, "relationship endpoint does not exist")
            if rel_id in graph._rels or (rel_type, source, target) in graph._triples:
                raise SnapshotError(lineno, "duplicate relationship")
            graph._insert_rel(Relationship(rel_id, rel_type, source, target, props))
            graph._next_rel_id = max(graph._next_rel_id, rel_id + 1)
        else:
            raise SnapshotError(lineno, f"unknown record kind {kind!r}")
    assert header is not None
    counts = (len(graph._nodes), len(graph._rels))
    if counts != header:
        raise SnapshotError(
            len(lines) + 1,
            f"truncated snapshot: header declares {header[0]} nodes/{header[1]} relationships, found {counts[0]}/{counts[1]}",
        )
    return graph
