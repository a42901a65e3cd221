"""Mapping of metadata documents onto graph entities.

Every document expands into a fixed template of node slots (Model, Dataset,
Service, ProblemType, ModelArchitecture, ModelTraining, ModelInference,
Parameters, Hyperparameters and one or two Devices) connected by ten
relationship slots. Each slot carries an identity key; merging a document
into a graph reuses any node whose key already exists (get-or-create).

Identity keys:

=================  ==========================================
Model              name, version
Dataset            name, version
Service            name
ProblemType        name
ModelArchitecture  type
Device             cpu, gpu, memoryGB
ModelTraining      modelName, modelVersion
ModelInference     modelName, modelVersion
Parameters         modelName, modelVersion
Hyperparameters    signature (canonical JSON of the value map)
=================  ==========================================

String key values are whitespace-normalised (trimmed, internal runs collapsed,
case preserved) before they are stored, so equal keys always meet in the index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable

from .schema import ModelMetadataDocument
from .store import DuplicateRelationshipError, PropertyGraph, load_snapshot
from .vocabulary import NodeLabel, RelationType, signature_allows

__all__ = [
    "IDENTITY_PROPERTIES",
    "IdentityKey",
    "IngestReport",
    "MappedDocument",
    "canonical_text",
    "hyperparameter_signature",
    "map_document",
    "merge_into",
    "ingest",
    "new_graph",
    "open_graph",
]

IDENTITY_PROPERTIES: dict[str, tuple[str, ...]] = {
    "Model": ("name", "version"),
    "Dataset": ("name", "version"),
    "Service": ("name",),
    "ProblemType": ("name",),
    "ModelArchitecture": ("type",),
    "Device": ("cpu", "gpu", "memoryGB"),
    "ModelTraining": ("modelName", "modelVersion"),
    "ModelInference": ("modelName", "modelVersion"),
    "Parameters": ("modelName", "modelVersion"),
    "Hyperparameters": ("signature",),
}

INDEXED = tuple((label, props[0]) for label, props in IDENTITY_PROPERTIES.items())


def new_graph() -> PropertyGraph:
    """Empty graph with equality indexes on the identity-key properties."""
    return PropertyGraph(indexed=INDEXED)


def open_graph(path) -> PropertyGraph:
    return load_snapshot(path, indexed=INDEXED)


def canonical_text(text: str) -> str:
    return " ".join(text.split())


def _canonical_value(value: Any) -> str:
    if isinstance(value, str):
        return canonical_text(value)
    if isinstance(value, float) and math.isfinite(value) and value.is_integer():
        return str(int(value))
    return json.dumps(value)


def hyperparameter_signature(hyperparameters: dict) -> str:
    return json.dumps(hyperparameters, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class IdentityKey:
    label: str
    key_properties: tuple[tuple[str, str], ...]

    @classmethod
    def of(cls, label: NodeLabel | str, properties: dict) -> "IdentityKey":
        label = str(label)
        names = IDENTITY_PROPERTIES[label]
        return cls(label, tuple((name, _canonical_value(properties[name])) for name in names))

    def __str__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self.key_properties)
        return f"{self.label}({inner})"


@dataclass(frozen=True)
class MappedDocument:
    nodes: tuple[tuple[IdentityKey, dict], ...]
    relationships: tuple[tuple[str, IdentityKey, IdentityKey], ...]

    # allow `nodes, rels = map_document(doc)`
    def __iter__(self):
        return iter((self.nodes, self.relationships))


@dataclass
class IngestReport:
    nodes_created: int = 0
    nodes_matched: int = 0
    relationships_created: int = 0
    relationships_matched: int = 0
    model_node_id: int | None = None

    def to_dict(self) -> dict:
        return {
            "nodesCreated": self.nodes_created,
            "nodesMatched": self.nodes_matched,
            "relationshipsCreated": self.relationships_created,
            "relationshipsMatched": self.relationships_matched,
            "modelNodeId": self.model_node_id,
        }


def _device_props(device) -> dict:
    return {"cpu": canonical_text(device.cpu), "gpu": canonical_text(device.gpu), "memoryGB": device.memory_gb}


def map_document(doc: ModelMetadataDocument) -> MappedDocument:
    """Expand a valid document into keyed node slots and relationship slots."""
    b, g, d, t, i = doc.basic, doc.general, doc.dataset, doc.training, doc.inference
    model_name, model_version = canonical_text(b.name), canonical_text(b.version)
    owner = {"modelName": model_name, "modelVersion": model_version}

    model = {
        "name": model_name,
        "version": model_version,
        "date": b.date,
        "description": b.description,
        "authors": list(b.authors),
        "sizeMB": g.size_mb,
        "modelType": g.model_type,
        "explainability": g.explainability,
    }
    dataset = {
        "name": canonical_text(d.name),
        "version": canonical_text(d.version),
        "date": d.date,
        "sizeMB": d.size_mb,
    }
    training = {
        **owner,
        "splitType": t.split_type,
        "optimizer": t.optimizer,
        "energyConsumption": t.sustainability.energy_consumption,
        "carbonFootprint": t.sustainability.carbon_footprint,
        **t.evaluation,
    }
    inference = {
        **owner,
        "latencyMs": i.latency_ms,
        "flops": i.flops,
        "energyConsumption": i.sustainability.energy_consumption,
        "carbonFootprint": i.sustainability.carbon_footprint,
    }
    if i.accuracy is not None:
        inference["accuracy"] = i.accuracy
    hyper = {"signature": hyperparameter_signature(t.hyperparameters), **t.hyperparameters}

    slots = {
        "model": (NodeLabel.MODEL, model),
        "dataset": (NodeLabel.DATASET, dataset),
        "service": (NodeLabel.SERVICE, {"name": canonical_text(g.service)}),
        "problem": (NodeLabel.PROBLEM_TYPE, {"name": canonical_text(g.problem_type)}),
        "architecture": (NodeLabel.MODEL_ARCHITECTURE, {"type": canonical_text(g.architecture)}),
        "training": (NodeLabel.MODEL_TRAINING, training),
        "inference": (NodeLabel.MODEL_INFERENCE, inference),
        "parameters": (NodeLabel.PARAMETERS, dict(owner)),
        "hyperparameters": (NodeLabel.HYPERPARAMETERS, hyper),
        "train_device": (NodeLabel.DEVICE, _device_props(t.device)),
        "infer_device": (NodeLabel.DEVICE, _device_props(i.device)),
    }
    keys = {slot: IdentityKey.of(label, props) for slot, (label, props) in slots.items()}

    nodes: dict[IdentityKey, dict] = {}
    for slot, (_, props) in slots.items():
        nodes.setdefault(keys[slot], props)

    edges = (
        (RelationType.TRAINED_ON, "model", "dataset"),
        (RelationType.PROVIDES, "model", "service"),
        (RelationType.SOLUTION_FOR, "service", "problem"),
        (RelationType.UTILIZES, "model", "architecture"),
        (RelationType.TRAINS_ON, "model", "training"),
        (RelationType.INFERENCE_ON, "inference", "model"),
        (RelationType.RUNS_ON, "training", "train_device"),
        (RelationType.RUNS_ON, "inference", "infer_device"),
        (RelationType.CONFIGURED_WITH, "training", "parameters"),
        (RelationType.TUNED_WITH, "parameters", "hyperparameters"),
    )
    rels = tuple((rel.value, keys[src], keys[dst]) for rel, src, dst in edges)
    return MappedDocument(tuple(nodes.items()), rels)


def _lookup(graph: PropertyGraph, key: IdentityKey, props: dict) -> int | None:
    filters = {name: props[name] for name, _ in key.key_properties}
    found = graph.find_nodes(key.label, filters)
    return found[0].id if found else None


def merge_into(graph: PropertyGraph, mapped: MappedDocument) -> IngestReport:
    """Get-or-create every slot of ``mapped`` in ``graph``.

    Matched nodes have the incoming properties written over their own
    (last writer wins). The whole document is applied atomically: on any
    failure the graph is left exactly as it was.
    """
    nodes, rels = mapped
    labels = {key: key.label for key, _ in nodes}
    for rel_type, src, dst in rels:
        if not signature_allows(rel_type, labels[src], labels[dst]):
            raise ValueError(f"{rel_type} may not connect {src.label} to {dst.label}")

    report = IngestReport()
    ids: dict[IdentityKey, int] = {}
    with graph.atomic():
        for key, props in nodes:
            node_id = _lookup(graph, key, props)
            if node_id is None:
                node_id = graph.create_node(key.label, props)
                report.nodes_created += 1
            else:
                graph.set_properties(node_id, props)
                report.nodes_matched += 1
            ids[key] = node_id
            if key.label == NodeLabel.MODEL.value:
                report.model_node_id = node_id
        for rel_type, src, dst in rels:
            try:
                graph.create_relationship(rel_type, ids[src], ids[dst])
                report.relationships_created += 1
            except DuplicateRelationshipError:
                report.relationships_matched += 1
    return report


def ingest(graph: PropertyGraph, documents: Iterable[ModelMetadataDocument]) -> list[IngestReport]:
    """Merge several documents, one atomic step per document."""
    return [merge_into(graph, map_document(doc)) for doc in documents]
