"""
Building the knowledge graph
============================

Each document expands into Model, Dataset, Service, ProblemType,
ModelArchitecture, ModelTraining, ModelInference, Parameters,
Hyperparameters and Device nodes. Shared entities are merged by identity key
so that, for instance, every model trained on UMU points at one Dataset node.
"""

# %%
from mrm3.fixtures import calibration_report, generate
from mrm3.ontology import ingest, map_document, new_graph

docs = generate()
print(len(docs), "documents")

# %%
# What one document turns into before it is merged.
mapped = map_document(docs[0])
for key, props in mapped.nodes:
    print(key)
for rel_type, src, dst in mapped.relationships:
    print(f"  ({src.label})-[:{rel_type}]->({dst.label})")

# %%
# Merge the whole corpus and look at the counts per class.
graph = new_graph()
reports = ingest(graph, docs)
stats = graph.stats()
for label, n in stats.node_count_by_label.items():
    print(f"{label:18s} {n:4d}")
for rel_type, n in stats.relationship_count_by_type.items():
    print(f"{rel_type:18s} {n:4d}")
print("total", stats.total_nodes, "nodes,", stats.total_relationships, "relationships")

# %%
# Re-ingesting changes nothing: every node and relationship is matched.
again = ingest(graph, docs)
print(sum(r.nodes_created for r in again), "nodes created on the second pass")
print(graph.stats() == stats)

# %%
# The corpus totals depend on how often hyperparameter sets are reused. The
# calibration report shows the default setting against its target.
report = calibration_report()
print({k: report[k] for k in ("hyperparameterSets", "totalNodes", "totalRelationships", "calibrated")})
