"""Deterministic synthetic corpus of wireless-localization model metadata.

The default configuration yields 22 models over 4 datasets, 4 architectures
and a single device. Five of the models carry the reference lowest-energy
inference results; every other inference energy is drawn from 0.4-2.0 J so
those five stay at the top of an energy-ordered listing.

Other numeric fields are drawn from seeded uniform ranges:

========================  ==================
inference energy          0.4 - 2.0 J
inference latency         0.5 - 25 ms
inference FLOPs           100 - 400
training energy           20 - 900 J
MAE / MEDE / RMSE         0.5 - 6 m
R_squared                 0.55 - 0.97
========================  ==================

Carbon footprint is energy times a fixed grid intensity of 250 gCO2eq/kWh.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from pathlib import Path

from .schema import (
    BasicMetadata,
    DatasetInfo,
    DeviceInfo,
    GeneralInfo,
    InferenceRecord,
    ModelMetadataDocument,
    SustainabilityRecord,
    TrainingRecord,
    serialize_document,
)

__all__ = [
    "GOLDEN_ROWS",
    "FixtureConfig",
    "generate",
    "calibration_report",
    "calibrate",
    "write_corpus",
]

# (architecture, dataset, inference energy J, inference FLOPs)
GOLDEN_ROWS = (
    ("Random Forest", "UMU", 0.072, 249),
    ("Random Forest", "Lumos5G", 0.132, 263),
    ("XGBoost", "LOG-a-TEC Winter", 0.284, 140),
    ("KNeighbors", "UMU", 0.326, 134),
    ("Random Forest", "LOG-a-TEC Spring", 0.370, 246),
)

TARGET_NODES = 113
TARGET_RELATIONSHIPS = 199

GRID_INTENSITY_G_PER_J = 250.0 / 3.6e6

_DEVICES = (
    ("AMD Ryzen 9 5950X 16-Core Processor", "none", 64.0),
    ("Intel Xeon Gold 6248R", "NVIDIA A100", 256.0),
    ("Apple M2", "none", 16.0),
)

_DATASET_META = {
    "Lumos5G": ("1.0", "2020-10-27", 61.4),
    "LOG-a-TEC Winter": ("1.0", "2022-02-14", 12.8),
    "LOG-a-TEC Spring": ("1.0", "2022-05-09", 13.5),
    "UMU": ("1.0", "2024-03-18", 148.2),
}

_ARCH_META = {
    "Random Forest": ("ensemble", "medium"),
    "KNeighbors": ("instance-based", "high"),
    "XGBoost": ("gradient boosting", "medium"),
    "MLP": ("neural network", "low"),
}


@dataclass(frozen=True)
class FixtureConfig:
    model_count: int = 22
    dataset_names: tuple[str, ...] = ("Lumos5G", "LOG-a-TEC Winter", "LOG-a-TEC Spring", "UMU")
    architecture_names: tuple[str, ...] = ("Random Forest", "KNeighbors", "XGBoost", "MLP")
    device_count: int = 1
    random_seed: int = 7
    # Distinct hyperparameter sets across the corpus, dealt round-robin to
    # architectures. Each architecture has at least one set and at most one
    # per model. 14 calibrates the default corpus to 113 nodes / 199 relationships.
    hyperparameter_sets: int = 14

    def __post_init__(self):
        for name in ("model_count", "device_count", "hyperparameter_sets"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("dataset_names", "architecture_names"):
            values = getattr(self, name)
            if not values or len(set(values)) != len(values):
                raise ValueError(f"{name} must be non-empty and unique")
        if self.device_count > len(_DEVICES):
            raise ValueError(f"at most {len(_DEVICES)} devices are available")


def _slug(text: str) -> str:
    return "".join(ch.lower() if ch.isalnum() else "-" for ch in text).strip("-")


def _hyperparameters(architecture: str, variant: int) -> dict:
    if architecture == "Random Forest":
        return {"n_estimators": 100 + 50 * variant, "max_depth": 20, "criterion": "squared_error"}
    if architecture == "KNeighbors":
        return {"n_neighbors": 3 + 2 * variant, "weights": "distance", "p": 2}
    if architecture == "XGBoost":
        return {"n_estimators": 100 + 100 * variant, "learning_rate": 0.1, "max_depth": 6}
    if architecture == "MLP":
        return {"hidden_layers": "128x64", "learning_rate_init": 0.001 * (variant + 1), "early_stopping": True}
    raise KeyError(architecture)


def _assignments(config: FixtureConfig) -> list[tuple[str, str, int]]:
    """(architecture, dataset, version number) per model; combinations cycle, bumping the version."""
    combos = [(a, d) for a in config.architecture_names for d in config.dataset_names]
    return [(*combos[i % len(combos)], i // len(combos) + 1) for i in range(config.model_count)]


def _hyperparameter_plan(config: FixtureConfig, assignments) -> list[dict]:
    archs = config.architecture_names
    pools: dict[str, list[int]] = {a: [] for a in archs}
    for k in range(config.hyperparameter_sets):
        pools[archs[k % len(archs)]].append(k)
    seen: dict[str, int] = {}
    plan = []
    for arch, _, _ in assignments:
        pool = pools[arch] or [archs.index(arch) % config.hyperparameter_sets]
        k = pool[seen.get(arch, 0) % len(pool)]
        seen[arch] = seen.get(arch, 0) + 1
        plan.append(_hyperparameters(arch, k // len(archs)) if arch in _ARCH_META else {"variant": k})
    return plan


def generate(config: FixtureConfig = FixtureConfig()) -> list[ModelMetadataDocument]:
    """Generate the corpus; identical configs give identical documents."""
    rng = random.Random(config.random_seed)
    assignments = _assignments(config)
    hyper = _hyperparameter_plan(config, assignments)
    golden = {(arch, ds): (energy, flops) for arch, ds, energy, flops in GOLDEN_ROWS}

    docs = []
    for idx, ((arch, ds, version), hp) in enumerate(zip(assignments, hyper)):
        ds_version, ds_date, ds_size = _DATASET_META.get(ds, ("1.0", "2023-01-01", 10.0))
        model_type, explainability = _ARCH_META.get(arch, ("other", "unknown"))
        cpu, gpu, mem = _DEVICES[idx % config.device_count]
        device = DeviceInfo(cpu=cpu, gpu=gpu, memory_gb=mem)

        inf_energy = round(rng.uniform(0.4, 2.0), 3)
        flops = rng.randint(100, 400)
        if version == 1 and (arch, ds) in golden:
            inf_energy, flops = golden[(arch, ds)]
        train_energy = round(rng.uniform(20.0, 900.0), 2)
        mae = round(rng.uniform(0.5, 6.0), 3)
        evaluation = {
            "MAE": mae,
            "MEDE": round(mae * rng.uniform(0.7, 0.95), 3),
            "RMSE": round(mae * rng.uniform(1.1, 1.6), 3),
            "R_squared": round(rng.uniform(0.55, 0.97), 3),
        }
        month, day = rng.randint(1, 12), rng.randint(1, 28)

        docs.append(
            ModelMetadataDocument(
                basic=BasicMetadata(
                    name=f"{_slug(arch)}-{_slug(ds)}",
                    version=f"{version}.0",
                    date=f"2024-{month:02d}-{day:02d}",
                    description=f"{arch} localization model trained on {ds}.",
                    authors=("SensorLab",),
                ),
                general=GeneralInfo(
                    size_mb=round(rng.uniform(0.05, 250.0), 2),
                    architecture=arch,
                    model_type=model_type,
                    explainability=explainability,
                    service="localization",
                    problem_type="regression",
                ),
                dataset=DatasetInfo(name=ds, version=ds_version, date=ds_date, size_mb=ds_size),
                training=TrainingRecord(
                    split_type="80/20 holdout",
                    optimizer="adam" if arch == "MLP" else "none",
                    hyperparameters=hp,
                    evaluation=evaluation,
                    sustainability=SustainabilityRecord(
                        train_energy, round(train_energy * GRID_INTENSITY_G_PER_J, 9)
                    ),
                    device=device,
                ),
                inference=InferenceRecord(
                    latency_ms=round(rng.uniform(0.5, 25.0), 3),
                    flops=flops,
                    sustainability=SustainabilityRecord(
                        inf_energy, round(inf_energy * GRID_INTENSITY_G_PER_J, 12)
                    ),
                    device=device,
                ),
            )
        )
    return docs


def calibration_report(config: FixtureConfig = FixtureConfig()) -> dict:
    """Ingest the generated corpus into a fresh graph and compare totals with the targets."""
    from .ontology import ingest, new_graph

    graph = new_graph()
    ingest(graph, generate(config))
    stats = graph.stats()
    return {
        "hyperparameterSets": config.hyperparameter_sets,
        "totalNodes": stats.total_nodes,
        "totalRelationships": stats.total_relationships,
        "targetNodes": TARGET_NODES,
        "targetRelationships": TARGET_RELATIONSHIPS,
        "calibrated": (stats.total_nodes, stats.total_relationships) == (TARGET_NODES, TARGET_RELATIONSHIPS),
        "stats": stats.to_dict(),
    }


def calibrate(
    config: FixtureConfig = FixtureConfig(),
    target_nodes: int = TARGET_NODES,
    target_relationships: int = TARGET_RELATIONSHIPS,
) -> FixtureConfig:
    """Search the hyperparameter-set count that reproduces the target totals.

    Raises:
        ValueError: when no count in 1..model_count reaches both targets.
    """
    from .ontology import ingest, new_graph

    for sets in range(1, config.model_count + 1):
        candidate = replace(config, hyperparameter_sets=sets)
        graph = new_graph()
        ingest(graph, generate(candidate))
        stats = graph.stats()
        if (stats.total_nodes, stats.total_relationships) == (target_nodes, target_relationships):
            return candidate
    raise ValueError(f"no hyperparameter reuse reaches {target_nodes} nodes / {target_relationships} relationships")


def write_corpus(docs: list[ModelMetadataDocument], out_dir: str | Path) -> list[Path]:
    """Write one ``NN_<name>-v<version>.json`` file per document."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for idx, doc in enumerate(docs):
        path = out_dir / f"{idx:02d}_{doc.basic.name}-v{doc.basic.version}.json"
        path.write_text(serialize_document(doc) + "\n", encoding="utf-8")
        paths.append(path)
    return paths
