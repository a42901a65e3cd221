"""Graph exports: Cypher MERGE scripts, Graphviz DOT and GraphML.

The Cypher script loads the graph into an external graph database. Nodes are
written first, one ``MERGE`` per node carrying all its properties, followed by
one ``MATCH ... MERGE`` per relationship that finds its endpoints by identity
key. When a node's identity key is missing or shared with another node of the
same label, it is keyed by an extra ``_nodeId`` property instead.
Relationship properties are not exported.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from collections import Counter

from .ontology import IDENTITY_PROPERTIES
from .query.ast import format_key, format_literal
from .query.parser import MergeNode, parse_script
from .store import Node, PropertyGraph, value_key

__all__ = [
    "DISPLAY_PROPERTY",
    "export_cypher",
    "export_dot",
    "export_graphml",
    "lint_cypher_script",
    "load_cypher_script",
]

DISPLAY_PROPERTY = {
    "Model": "name",
    "Dataset": "name",
    "Service": "name",
    "ProblemType": "name",
    "ModelArchitecture": "type",
    "ModelTraining": "modelName",
    "ModelInference": "modelName",
    "Parameters": "modelName",
    "Hyperparameters": "signature",
    "Device": "cpu",
}

LABEL_COLORS = {
    "Model": "#4C8EDA",
    "Dataset": "#F79767",
    "Service": "#57C7E3",
    "ProblemType": "#F16667",
    "ModelArchitecture": "#D9C8AE",
    "ModelTraining": "#8DCC93",
    "ModelInference": "#ECB5C9",
    "Parameters": "#FFC454",
    "Hyperparameters": "#DA7194",
    "Device": "#569480",
}

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


def display_text(node: Node) -> str:
    value = node.properties.get(DISPLAY_PROPERTY.get(node.label, ""))
    return node.label if value is None else str(value)


# -- Cypher ----------------------------------------------------------------


def _key_properties(graph: PropertyGraph) -> dict[int, list[tuple[str, object]]]:
    keyed: dict[int, list[tuple[str, object]]] = {}
    seen: Counter = Counter()
    for node in graph.nodes():
        names = IDENTITY_PROPERTIES.get(node.label, ())
        if names and all(node.properties.get(n) is not None for n in names):
            key = [(n, node.properties[n]) for n in names]
            seen[(node.label, tuple(value_key(v) for _, v in key))] += 1
            keyed[node.id] = key
    for node in graph.nodes():
        key = keyed.get(node.id)
        if key is None or seen[(node.label, tuple(value_key(v) for _, v in key))] > 1:
            keyed[node.id] = [("_nodeId", node.id)]
    return keyed


def _prop_map(items) -> str:
    return "{" + ", ".join(f"{format_key(k)}: {format_literal(v)}" for k, v in items) + "}"


def export_cypher(graph: PropertyGraph) -> str:
    """Render the graph as a deterministic Cypher MERGE script."""
    stats = graph.stats()
    lines = [
        f"// mrm3 export: {stats.total_nodes} nodes, {stats.total_relationships} relationships",
    ]
    keys = _key_properties(graph)
    for node in graph.nodes():
        key = keys[node.id]
        key_names = {k for k, _ in key}
        rest = sorted((k, v) for k, v in node.properties.items() if k not in key_names and v is not None)
        lines.append(f"MERGE (:{format_key(node.label)} {_prop_map(key + rest)});")
    for rel in graph.relationships():
        src, dst = graph.node(rel.source), graph.node(rel.target)
        lines.append(
            f"MATCH (a:{format_key(src.label)} {_prop_map(keys[src.id])}), "
            f"(b:{format_key(dst.label)} {_prop_map(keys[dst.id])}) "
            f"MERGE (a)-[:{format_key(rel.type)}]->(b);"
        )
    return "\n".join(lines) + "\n"


def lint_cypher_script(text: str) -> int:
    """Check a MERGE script against the script grammar; return its statement count.

    Raises:
        mrm3.query.QueryError: on the first malformed statement.
    """
    return len(parse_script(text))


def _pattern_props(node_pattern) -> dict:
    return {
        k: list(lit.value) if isinstance(lit.value, tuple) else lit.value for k, lit in node_pattern.properties
    }


def load_cypher_script(text: str, graph: PropertyGraph | None = None) -> PropertyGraph:
    """Replay a MERGE script into ``graph`` (a fresh graph by default).

    MERGE matches on the full pattern: a node statement reuses an existing
    node only if label and every listed property agree.
    """
    from .ontology import new_graph

    graph = new_graph() if graph is None else graph
    for stmt in parse_script(text):
        if isinstance(stmt, MergeNode):
            props = _pattern_props(stmt.node)
            if not graph.find_nodes(stmt.node.label, props):
                graph.create_node(stmt.node.label, props)
            continue
        sources = graph.find_nodes(stmt.source.label, _pattern_props(stmt.source))
        targets = graph.find_nodes(stmt.target.label, _pattern_props(stmt.target))
        for s in sources:
            for t in targets:
                if graph.find_relationship(stmt.type, s.id, t.id) is None:
                    graph.create_relationship(stmt.type, s.id, t.id)
    return graph


# -- DOT -------------------------------------------------------------------


def _dot_string(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\r", "")
    return f'"{escaped}"'


def export_dot(graph: PropertyGraph, name: str = "mrm3") -> str:
    """Graphviz digraph; each node shows one designated property and is coloured by label."""
    lines = [f"digraph {_dot_string(name)} {{", '  node [shape=ellipse, style=filled, fontname="Helvetica"];']
    for node in graph.nodes():
        color = LABEL_COLORS.get(node.label, "#CCCCCC")
        lines.append(
            f"  {_dot_string(f'n{node.id}')} [label={_dot_string(display_text(node))}, "
            f"class={_dot_string(node.label)}, fillcolor={_dot_string(color)}];"
        )
    for rel in graph.relationships():
        lines.append(
            f"  {_dot_string(f'n{rel.source}')} -> {_dot_string(f'n{rel.target}')} "
            f"[label={_dot_string(rel.type)}, id={_dot_string(f'r{rel.id}')}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- GraphML ---------------------------------------------------------------


def _graphml_type(values: list) -> str:
    if all(isinstance(v, bool) for v in values):
        return "boolean"
    if all(isinstance(v, int) and not isinstance(v, bool) for v in values):
        return "long"
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        return "double"
    return "string"


def _graphml_text(value, attr_type: str) -> str:
    if attr_type == "boolean":
        return "true" if value else "false"
    if attr_type in ("long", "double"):
        return repr(float(value)) if attr_type == "double" else str(value)
    if isinstance(value, str):
        return value
    return json.dumps(value, ensure_ascii=False)


def export_graphml(graph: PropertyGraph) -> str:
    """GraphML document with one typed ``<key>`` per property name.

    Lists and properties with mixed value types are stored as JSON strings;
    null values are left out. Every node also carries ``labels`` and
    ``display`` and every edge carries ``type``; these take precedence over
    properties of the same name.
    """
    nodes, rels = graph.nodes(), graph.relationships()

    def collect(entities):
        found: dict[str, list] = {}
        for entity in entities:
            for k, v in entity.properties.items():
                if v is not None:
                    found.setdefault(k, []).append(v)
        return {k: _graphml_type(vs) for k, vs in sorted(found.items())}

    node_types, edge_types = collect(nodes), collect(rels)

    root = ET.Element("graphml", {"xmlns": GRAPHML_NS})
    key_ids: dict[tuple[str, str], str] = {}

    def add_key(domain: str, name: str, attr_type: str) -> None:
        key_id = f"d{len(key_ids)}"
        key_ids[(domain, name)] = key_id
        ET.SubElement(root, "key", {"id": key_id, "for": domain, "attr.name": name, "attr.type": attr_type})

    add_key("node", "labels", "string")
    add_key("node", "display", "string")
    for name, attr_type in node_types.items():
        if name not in ("labels", "display"):
            add_key("node", name, attr_type)
    add_key("edge", "type", "string")
    for name, attr_type in edge_types.items():
        if name != "type":
            add_key("edge", name, attr_type)

    g = ET.SubElement(root, "graph", {"id": "mrm3", "edgedefault": "directed"})

    def add_data(parent, domain, name, text):
        ET.SubElement(parent, "data", {"key": key_ids[(domain, name)]}).text = text

    for node in nodes:
        el = ET.SubElement(g, "node", {"id": f"n{node.id}"})
        add_data(el, "node", "labels", f":{node.label}")
        add_data(el, "node", "display", display_text(node))
        for name, value in sorted(node.properties.items()):
            if value is not None and name not in ("labels", "display"):
                add_data(el, "node", name, _graphml_text(value, node_types[name]))
    for rel in rels:
        el = ET.SubElement(g, "edge", {"id": f"r{rel.id}", "source": f"n{rel.source}", "target": f"n{rel.target}"})
        add_data(el, "edge", "type", rel.type)
        for name, value in sorted(rel.properties.items()):
            if value is not None and name != "type":
                add_data(el, "edge", name, _graphml_text(value, edge_types[name]))

    ET.indent(root)
    body = ET.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"
