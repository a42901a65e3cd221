"""
Validating model metadata documents
===================================

A metadata document has five sections: basic, general, dataset, training
and inference. Before anything reaches the graph it is checked against a
JSON Schema, and every problem is reported with a JSON path.
"""

# %%
# Start from one document of the synthetic localization corpus.
import json

from mrm3.fixtures import generate
from mrm3.schema import load_schema, parse_document, serialize_document, validate_document

doc = generate()[0]
raw = serialize_document(doc)
print(json.dumps(json.loads(raw)["inference"], indent=2))

# %%
# The schema itself is plain JSON (Draft 2020-12) and can be shipped to
# other tools.
schema = load_schema()
print(sorted(schema["properties"]))
print(schema["properties"]["training"]["properties"]["sustainability"]["required"])

# %%
# A valid document produces an empty report.
report = validate_document(raw)
print(report.valid, report.violations)

# %%
# Break it in a few ways: drop the training energy, make FLOPs fractional and
# add an unknown field. All three problems come back at once.
broken = json.loads(raw)
del broken["training"]["sustainability"]["energyConsumption"]
broken["inference"]["flops"] = 249.5
broken["general"]["license"] = "MIT"
for v in validate_document(json.dumps(broken)).violations:
    print(f"{v.json_path:45s} {v.rule:22s} {v.message}")

# %%
# Malformed JSON is a report too, never an exception.
print(validate_document("{not json").to_dict())

# %%
# ``parse_document`` returns the typed dataclass form.
typed = parse_document(raw)
print(typed.general.architecture, typed.inference.sustainability.energy_consumption, "J")
