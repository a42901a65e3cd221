"""
Snapshots and exports
=====================

The graph persists as line-delimited JSON and can be exported as a Cypher
MERGE script (to load into a graph database), Graphviz DOT or GraphML.
"""

# %%
import tempfile
from pathlib import Path

from mrm3.fixtures import generate
from mrm3.interchange import export_cypher, export_dot, export_graphml, lint_cypher_script, load_cypher_script
from mrm3.ontology import ingest, new_graph, open_graph
from mrm3.store import save_snapshot

graph = new_graph()
ingest(graph, generate())
workdir = Path(tempfile.mkdtemp())

# %%
# Save and reload. Ids, labels and property types survive unchanged.
path = workdir / "graph.jsonl"
save_snapshot(graph, path)
print(path.read_text(encoding="utf-8").splitlines()[0])
print(open_graph(path) == graph)

# %%
# The Cypher script has one statement per node and per relationship.
script = export_cypher(graph)
print("\n".join(script.splitlines()[:3]))
print(lint_cypher_script(script), "statements")
print(load_cypher_script(script).stats() == graph.stats())

# %%
# DOT for a quick picture (``dot -Tsvg graph.dot > graph.svg``).
(workdir / "graph.dot").write_text(export_dot(graph), encoding="utf-8")
print(export_dot(graph).splitlines()[2])

# %%
# GraphML keeps typed attributes for tools such as Gephi or networkx.
graphml = export_graphml(graph)
(workdir / "graph.graphml").write_text(graphml, encoding="utf-8")
print(graphml.splitlines()[2])
print("written to", workdir)
