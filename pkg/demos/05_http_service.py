"""
Talking to the graph over HTTP
==============================

``mrm3 serve`` exposes the graph as a small JSON API. This demo starts the
same server on a background thread, posts a document and runs a query.
"""

# %%
import json
import urllib.error
import urllib.request
from dataclasses import replace

from mrm3.app.server import serve_in_background
from mrm3.app.service import GraphService
from mrm3.fixtures import generate
from mrm3.schema import serialize_document

docs = generate()
service = GraphService()  # in memory; pass a path to persist
service.ingest(docs[:-1])
server, url = serve_in_background(service)


def call(path, body=None):
    data = None if body is None else (body if isinstance(body, bytes) else json.dumps(body).encode())
    req = urllib.request.Request(url + path, data=data, method="GET" if data is None else "POST")
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


print(call("/api/stats")[1]["totalNodes"])

# %%
# Add the last model through the API.
status, report = call("/api/documents", serialize_document(docs[-1]).encode())
print(status, report)

# %%
# An invalid document is refused with 422 and the list of violations.
bad = replace(docs[0], basic=replace(docs[0].basic, date="2024-13-01"))
status, body = call("/api/documents", serialize_document(bad).encode())
print(status, body["violations"])

# %%
# Queries return columns and rows.
status, body = call(
    "/api/query",
    {"query": "MATCH (i:ModelInference)-[:INFERENCE_ON]->(m:Model) RETURN m.name, i.flops ORDER BY i.flops DESC LIMIT 3"},
)
print(status, body)

# %%
# A malformed query comes back as 400 with its position.
print(call("/api/query", {"query": "MATCH (m) RETURN"}))

server.shutdown()
server.server_close()
