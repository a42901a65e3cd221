"""
Ranking models by inference energy
==================================

The graph answers Cypher-style queries. Here we list every model with its
architecture and dataset, cheapest inference first, and then narrow the
list down the way an orchestrator choosing a model would.
"""

# %%
from mrm3.fixtures import generate
from mrm3.ontology import ingest, new_graph
from mrm3.query import QueryError, explain, parse, run

graph = new_graph()
ingest(graph, generate())

QUERY = """
MATCH (m:Model)-[:TRAINED_ON]->(d:Dataset)
MATCH (m)-[:UTILIZES]->(a:ModelArchitecture)
MATCH (i:ModelInference)-[:INFERENCE_ON]->(m)
RETURN m.name, a.type AS architecture, d.name AS dataset,
       i.energyConsumption, i.flops
ORDER BY i.energyConsumption ASC
"""

table = run(graph, QUERY)
print(table.columns)
for row in table.rows[:5]:
    print(row)

# %%
# The planner starts from the label with the fewest nodes.
print(explain(parse(QUERY), graph))

# %%
# Filtering: only Random Forest models under half a joule, with their RMSE.
narrow = run(
    graph,
    """
    MATCH (m:Model)-[:UTILIZES]->(a:ModelArchitecture {type: 'Random Forest'})
    MATCH (i:ModelInference)-[:INFERENCE_ON]->(m)
    MATCH (m)-[:TRAINS_ON]->(t:ModelTraining)
    WHERE i.energyConsumption < 0.5
    RETURN m.name, i.energyConsumption AS energy, t.RMSE
    ORDER BY energy
    """,
)
for row in narrow.rows:
    print(row)

# %%
# Missing properties read as null, and comparisons with null never hold.
print(run(graph, "MATCH (i:ModelInference) WHERE i.accuracy > 0.5 RETURN i LIMIT 3").rows)

# %%
# Errors point at the offending position.
try:
    run(graph, "MATCH (m:Model RETURN m")
except QueryError as err:
    print(err)
