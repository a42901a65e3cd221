"""Closed label and relationship-type vocabularies of the metadata graph."""

from enum import Enum


class NodeLabel(str, Enum):
    MODEL = "Model"
    DATASET = "Dataset"
    SERVICE = "Service"
    PROBLEM_TYPE = "ProblemType"
    MODEL_ARCHITECTURE = "ModelArchitecture"
    MODEL_TRAINING = "ModelTraining"
    MODEL_INFERENCE = "ModelInference"
    PARAMETERS = "Parameters"
    HYPERPARAMETERS = "Hyperparameters"
    DEVICE = "Device"

    def __str__(self) -> str:
        return self.value


class RelationType(str, Enum):
    TRAINED_ON = "TRAINED_ON"
    PROVIDES = "PROVIDES"
    SOLUTION_FOR = "SOLUTION_FOR"
    UTILIZES = "UTILIZES"
    TRAINS_ON = "TRAINS_ON"
    INFERENCE_ON = "INFERENCE_ON"
    RUNS_ON = "RUNS_ON"
    # Not named in the source ontology; chosen for this package.
    CONFIGURED_WITH = "CONFIGURED_WITH"
    TUNED_WITH = "TUNED_WITH"

    def __str__(self) -> str:
        return self.value


NODE_LABELS = frozenset(label.value for label in NodeLabel)
RELATION_TYPES = frozenset(rel.value for rel in RelationType)

# relationship type -> (allowed source labels, target label)
SIGNATURES: dict[str, tuple[frozenset[str], str]] = {
    "TRAINED_ON": (frozenset({"Model"}), "Dataset"),
    "PROVIDES": (frozenset({"Model"}), "Service"),
    "SOLUTION_FOR": (frozenset({"Service"}), "ProblemType"),
    "UTILIZES": (frozenset({"Model"}), "ModelArchitecture"),
    "TRAINS_ON": (frozenset({"Model"}), "ModelTraining"),
    "INFERENCE_ON": (frozenset({"ModelInference"}), "Model"),
    "RUNS_ON": (frozenset({"ModelTraining", "ModelInference"}), "Device"),
    "CONFIGURED_WITH": (frozenset({"ModelTraining"}), "Parameters"),
    "TUNED_WITH": (frozenset({"Parameters"}), "Hyperparameters"),
}


def signature_allows(rel_type: str, source_label: str, target_label: str) -> bool:
    sources, target = SIGNATURES[str(rel_type)]
    return str(source_label) in sources and str(target_label) == target
