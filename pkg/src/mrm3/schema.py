"""Metadata document model and validation.

A metadata document describes one trained model in five sections:
``basic``, ``general``, ``dataset``, ``training`` and ``inference``.
Documents arrive as UTF-8 JSON text; :func:`validate_document` reports every
structural problem as data, and :func:`parse_document` turns a valid document
into typed records.

Units are fixed: energy in joules, carbon footprint in grams CO2-equivalent,
latency in milliseconds, sizes in megabytes and memory in gigabytes.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Any, Union

import jsonschema
from jsonschema import Draft202012Validator, FormatChecker

__all__ = [
    "BasicMetadata",
    "GeneralInfo",
    "DatasetInfo",
    "SustainabilityRecord",
    "DeviceInfo",
    "TrainingRecord",
    "InferenceRecord",
    "ModelMetadataDocument",
    "Violation",
    "ValidationReport",
    "DocumentValidationError",
    "RECOGNIZED_METRICS",
    "SECTIONS",
    "load_schema",
    "validate_document",
    "parse_document",
    "serialize_document",
]

Scalar = Union[str, int, float, bool]

SECTIONS = ("basic", "general", "dataset", "training", "inference")
RECOGNIZED_METRICS = ("MAE", "MEDE", "RMSE", "R_squared")
MAX_INT64 = 2**63 - 1

# Property names already used on the ModelTraining node; evaluation metric
# keys are flattened next to them and must not shadow them.
RESERVED_TRAINING_PROPERTIES = (
    "modelName",
    "modelVersion",
    "splitType",
    "optimizer",
    "energyConsumption",
    "carbonFootprint",
)

_NONEMPTY = {"type": "string", "minLength": 1, "pattern": r"\S"}


def _number(description: str, unit: str | None = None) -> dict:
    node: dict[str, Any] = {"type": "number", "minimum": 0, "description": description}
    if unit:
        node["unit"] = unit
    return node


def _object(properties: dict, required: list[str], description: str) -> dict:
    return {
        "type": "object",
        "description": description,
        "properties": properties,
        "required": required,
        "additionalProperties": False,
    }


def _build_schema() -> dict:
    sustainability = _object(
        {
            "energyConsumption": _number("Energy consumed.", "J"),
            "carbonFootprint": _number("Carbon footprint.", "gCO2eq"),
        },
        ["energyConsumption", "carbonFootprint"],
        "Environmental impact of the stage.",
    )
    device = _object(
        {
            "cpu": {**_NONEMPTY, "description": "CPU model of the device."},
            "gpu": {"type": "string", "description": "GPU model, or the literal 'none'."},
            "memoryGB": _number("Device memory.", "GB"),
        },
        ["cpu", "gpu", "memoryGB"],
        "Hardware the stage ran on.",
    )
    basic = _object(
        {
            "name": {**_NONEMPTY, "description": "Model name."},
            "version": {**_NONEMPTY, "description": "Model version."},
            "date": {"type": "string", "format": "date", "description": "ISO-8601 calendar date."},
            "description": {"type": "string", "description": "Free-text description."},
            "authors": {
                "type": "array",
                "items": {"type": "string"},
                "description": "Model authors.",
            },
        },
        ["name", "version", "date", "description", "authors"],
        "Basic metadata.",
    )
    general = _object(
        {
            "sizeMB": _number("Serialized model size.", "MB"),
            "architecture": {**_NONEMPTY, "description": "Model architecture, e.g. 'Random Forest'."},
            "modelType": {"type": "string", "description": "Model family or type."},
            "explainability": {"type": "string", "description": "Explainability of the architecture."},
            "service": {**_NONEMPTY, "description": "Service the model serves, e.g. 'localization'."},
            "problemType": {**_NONEMPTY, "description": "ML problem type, e.g. 'regression'."},
        },
        ["sizeMB", "architecture", "modelType", "explainability", "service", "problemType"],
        "General model information.",
    )
    dataset = _object(
        {
            "name": {**_NONEMPTY, "description": "Dataset name."},
            "version": {"type": "string", "description": "Dataset version."},
            "date": {"type": "string", "format": "date", "description": "ISO-8601 calendar date."},
            "sizeMB": _number("Dataset size.", "MB"),
        },
        ["name", "version", "date", "sizeMB"],
        "Dataset the model was trained on; (name, version) identifies it.",
    )
    evaluation = {
        "type": "object",
        "description": "Evaluation metrics. MAE, MEDE, RMSE and R_squared are recognized; other keys are allowed.",
        "properties": {
            "MAE": {"type": "number", "description": "Mean absolute error."},
            "MEDE": {"type": "number", "description": "Median error."},
            "RMSE": {"type": "number", "description": "Root mean squared error."},
            "R_squared": {"type": "number", "description": "Coefficient of determination."},
        },
        "additionalProperties": {"type": "number"},
        "propertyNames": {"minLength": 1, "not": {"enum": list(RESERVED_TRAINING_PROPERTIES)}},
    }
    training = _object(
        {
            "splitType": {"type": "string", "description": "Train/test split, e.g. '80/20 holdout'."},
            "optimizer": {"type": "string", "description": "Optimizer used for training."},
            "hyperparameters": {
                "type": "object",
                "description": "Scalar hyperparameter values by name.",
                "additionalProperties": {"type": ["string", "number", "boolean"]},
                "propertyNames": {"minLength": 1, "not": {"const": "signature"}},
            },
            "evaluation": evaluation,
            "sustainability": sustainability,
            "device": device,
        },
        ["splitType", "optimizer", "hyperparameters", "evaluation", "sustainability", "device"],
        "Model training metadata.",
    )
    inference = _object(
        {
            "latencyMs": _number("End-to-end latency of one request.", "ms"),
            "flops": {
                "type": "integer",
                "minimum": 0,
                "maximum": MAX_INT64,
                "description": "Floating-point operations for one input sample.",
            },
            "accuracy": {"type": "number", "description": "Inference accuracy, if measured."},
            "sustainability": copy.deepcopy(sustainability),
            "device": copy.deepcopy(device),
        },
        ["latencyMs", "flops", "sustainability", "device"],
        "Model inference metadata.",
    )
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": "https://mrm3.invalid/model-metadata.schema.json",
        "title": "ModelMetadataDocument",
        "description": "Machine-readable metadata for one trained ML model.",
        "type": "object",
        "properties": {
            "basic": basic,
            "general": general,
            "dataset": dataset,
            "training": training,
            "inference": inference,
        },
        "required": list(SECTIONS),
        "additionalProperties": False,
    }


_SCHEMA = _build_schema()


def load_schema() -> dict:
    """Return the built-in JSON-schema (draft 2020-12) for metadata documents.

    A fresh deep copy is returned on every call so callers may mutate it.
    """
    return copy.deepcopy(_SCHEMA)


def _strict_integer(checker, instance) -> bool:
    return isinstance(instance, int) and not isinstance(instance, bool)


_Validator = jsonschema.validators.extend(
    Draft202012Validator,
    type_checker=Draft202012Validator.TYPE_CHECKER.redefine("integer", _strict_integer),
)
_VALIDATOR = _Validator(_SCHEMA, format_checker=FormatChecker())


# -- typed records ---------------------------------------------------------


@dataclass(frozen=True)
class BasicMetadata:
    name: str
    version: str
    date: str
    description: str = ""
    authors: tuple[str, ...] = ()


@dataclass(frozen=True)
class GeneralInfo:
    size_mb: float
    architecture: str
    model_type: str
    explainability: str
    service: str
    problem_type: str


@dataclass(frozen=True)
class DatasetInfo:
    name: str
    version: str
    date: str
    size_mb: float


@dataclass(frozen=True)
class SustainabilityRecord:
    energy_consumption: float
    carbon_footprint: float


@dataclass(frozen=True)
class DeviceInfo:
    cpu: str
    gpu: str
    memory_gb: float


@dataclass(frozen=True)
class TrainingRecord:
    split_type: str
    optimizer: str
    hyperparameters: dict[str, Scalar]
    evaluation: dict[str, float]
    sustainability: SustainabilityRecord
    device: DeviceInfo


@dataclass(frozen=True)
class InferenceRecord:
    latency_ms: float
    flops: int
    sustainability: SustainabilityRecord
    device: DeviceInfo
    accuracy: float | None = None


@dataclass(frozen=True)
class ModelMetadataDocument:
    basic: BasicMetadata
    general: GeneralInfo
    dataset: DatasetInfo
    training: TrainingRecord
    inference: InferenceRecord

    def to_dict(self) -> dict:
        b, g, d, t, i = self.basic, self.general, self.dataset, self.training, self.inference
        inference = {
            "latencyMs": i.latency_ms,
            "flops": i.flops,
            "sustainability": _sustainability_dict(i.sustainability),
            "device": _device_dict(i.device),
        }
        if i.accuracy is not None:
            inference["accuracy"] = i.accuracy
        return {
            "basic": {
                "name": b.name,
                "version": b.version,
                "date": b.date,
                "description": b.description,
                "authors": list(b.authors),
            },
            "general": {
                "sizeMB": g.size_mb,
                "architecture": g.architecture,
                "modelType": g.model_type,
                "explainability": g.explainability,
                "service": g.service,
                "problemType": g.problem_type,
            },
            "dataset": {"name": d.name, "version": d.version, "date": d.date, "sizeMB": d.size_mb},
            "training": {
                "splitType": t.split_type,
                "optimizer": t.optimizer,
                "hyperparameters": dict(t.hyperparameters),
                "evaluation": dict(t.evaluation),
                "sustainability": _sustainability_dict(t.sustainability),
                "device": _device_dict(t.device),
            },
            "inference": inference,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelMetadataDocument":
        """Build a document from an already-validated mapping."""
        b, g, d, t, i = (data[s] for s in SECTIONS)
        accuracy = i.get("accuracy")
        return cls(
            basic=BasicMetadata(
                name=b["name"],
                version=b["version"],
                date=b["date"],
                description=b["description"],
                authors=tuple(b["authors"]),
            ),
            general=GeneralInfo(
                size_mb=float(g["sizeMB"]),
                architecture=g["architecture"],
                model_type=g["modelType"],
                explainability=g["explainability"],
                service=g["service"],
                problem_type=g["problemType"],
            ),
            dataset=DatasetInfo(
                name=d["name"], version=d["version"], date=d["date"], size_mb=float(d["sizeMB"])
            ),
            training=TrainingRecord(
                split_type=t["splitType"],
                optimizer=t["optimizer"],
                hyperparameters=dict(t["hyperparameters"]),
                evaluation={k: float(v) for k, v in t["evaluation"].items()},
                sustainability=_sustainability(t["sustainability"]),
                device=_device(t["device"]),
            ),
            inference=InferenceRecord(
                latency_ms=float(i["latencyMs"]),
                flops=int(i["flops"]),
                accuracy=None if accuracy is None else float(accuracy),
                sustainability=_sustainability(i["sustainability"]),
                device=_device(i["device"]),
            ),
        )


def _sustainability(data: dict) -> SustainabilityRecord:
    return SustainabilityRecord(float(data["energyConsumption"]), float(data["carbonFootprint"]))


def _sustainability_dict(rec: SustainabilityRecord) -> dict:
    return {"energyConsumption": rec.energy_consumption, "carbonFootprint": rec.carbon_footprint}


def _device(data: dict) -> DeviceInfo:
    return DeviceInfo(cpu=data["cpu"], gpu=data["gpu"], memory_gb=float(data["memoryGB"]))


def _device_dict(rec: DeviceInfo) -> dict:
    return {"cpu": rec.cpu, "gpu": rec.gpu, "memoryGB": rec.memory_gb}


def serialize_document(doc: ModelMetadataDocument, indent: int | None = 2) -> str:
    return json.dumps(doc.to_dict(), indent=indent, ensure_ascii=False)


# -- validation ------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Violation:
    json_path: str
    rule: str
    message: str

    def to_dict(self) -> dict:
        return {"jsonPath": self.json_path, "rule": self.rule, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"valid": self.valid, "violations": [v.to_dict() for v in self.violations]}


class DocumentValidationError(ValueError):
    """Raised when an invalid document is handed to :func:`parse_document`."""

    def __init__(self, report: ValidationReport):
        self.report = report
        first = report.violations[0]
        super().__init__(
            f"document is invalid ({len(report.violations)} violation(s)); "
            f"first: {first.json_path}: {first.message}"
        )


def _reject_constant(name: str):
    raise ValueError(f"non-finite number literal {name!r} is not allowed")


def _child_path(parent: str, key: str) -> str:
    if key.isidentifier():
        return f"{parent}.{key}"
    return f"{parent}[{json.dumps(key)}]"


def _nonfinite(value: Any, path: str):
    if isinstance(value, float) and not math.isfinite(value):
        yield Violation(path, "finite", "number must be finite")
    elif isinstance(value, dict):
        for key, child in value.items():
            yield from _nonfinite(child, _child_path(path, key))
    elif isinstance(value, list):
        for idx, child in enumerate(value):
            yield from _nonfinite(child, f"{path}[{idx}]")


def _error_path(error: jsonschema.ValidationError) -> str:
    path = "$"
    for elem in error.absolute_path:
        path = f"{path}[{elem}]" if isinstance(elem, int) else _child_path(path, elem)
    return path


def _violations_for(error: jsonschema.ValidationError):
    path = _error_path(error)
    rule = str(error.validator)
    if rule == "required" and isinstance(error.instance, dict):
        for name in error.validator_value:
            if name not in error.instance:
                yield Violation(_child_path(path, name), "required", f"{name!r} is a required property")
    elif rule == "additionalProperties" and isinstance(error.instance, dict):
        allowed = error.schema.get("properties", {})
        for name in error.instance:
            if name not in allowed:
                yield Violation(_child_path(path, name), rule, f"unexpected property {name!r}")
    elif "propertyNames" in error.absolute_schema_path:
        yield Violation(path, "propertyNames", f"property name {error.instance!r} is not allowed here")
    else:
        yield Violation(path, rule, error.message)


def _load_json(raw: str | bytes) -> Any:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    return json.loads(raw, parse_constant=_reject_constant)


def validate_document(raw: str | bytes) -> ValidationReport:
    """Validate one JSON-encoded metadata document.

    Never raises for bad input: malformed JSON is reported as a violation at
    ``$`` with rule ``"syntax"``.
    """
    try:
        data = _load_json(raw)
    except (ValueError, UnicodeDecodeError) as exc:
        return ValidationReport((Violation("$", "syntax", str(exc)),))
    return _validate_data(data)


def _validate_data(data: Any) -> ValidationReport:
    found: set[Violation] = set()
    for error in _VALIDATOR.iter_errors(data):
        found.update(_violations_for(error))
    found.update(_nonfinite(data, "$"))
    return ValidationReport(tuple(sorted(found)))


def parse_document(raw: str | bytes) -> ModelMetadataDocument:
    """Parse a JSON document into a :class:`ModelMetadataDocument`.

    Raises:
        DocumentValidationError: if the document does not validate.
    """
    report = validate_document(raw)
    if not report.valid:
        raise DocumentValidationError(report)
    return ModelMetadataDocument.from_dict(_load_json(raw))
