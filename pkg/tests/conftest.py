import pytest

from mrm3.fixtures import generate
from mrm3.ontology import ingest, new_graph


@pytest.fixture(scope="session")
def fixture_docs():
    return generate()


@pytest.fixture(scope="session")
def fixture_graph(fixture_docs):
    """Default localization corpus, ingested once. Tests must not mutate it."""
    graph = new_graph()
    ingest(graph, fixture_docs)
    return graph


@pytest.fixture
def fresh_graph(fixture_docs):
    graph = new_graph()
    ingest(graph, fixture_docs)
    return graph
