import pytest

from popgraph.graphs import generate, line_graph, ring_graph, star_graph
from popgraph.protocols import kreg_id, star_id, tree_id


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ("POPGRAPH_MAX_STEPS", "POPGRAPH_WINDOW_FACTOR", "POPGRAPH_CAP", "POPGRAPH_SWEEP_WORKERS",
                 "POPGRAPH_PIVOT_BUDGET", "POPGRAPH_LOG_LEVEL", "POPGRAPH_CONFIRM_CAP",
                 "POPGRAPH_CONFIRM_AGENTS", "POPGRAPH_EXTENDED_FACTOR"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture(scope="session")
def ti():
    return tree_id()


@pytest.fixture(scope="session")
def si4():
    return star_id(4)


@pytest.fixture(scope="session")
def kri2():
    return kreg_id(2, 8)


@pytest.fixture
def line3():
    return line_graph(3)


@pytest.fixture
def line4():
    return line_graph(4)


@pytest.fixture
def ring3():
    return ring_graph(3)


@pytest.fixture
def ring4():
    return ring_graph(4)


@pytest.fixture
def star4():
    return star_graph(4)


@pytest.fixture
def small_tree():
    return generate("tree:8:1")
