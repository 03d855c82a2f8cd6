from pathlib import Path

import pytest

from ksubgraph import Graph, karate

DATA = Path(__file__).parent / "data"


def path_graph(n):
    return Graph.from_edges([(i, i + 1) for i in range(n - 1)], n=n)


def complete_graph(n):
    return Graph.from_edges([(i, j) for i in range(n) for j in range(i + 1, n)], n=n)


def star_graph(leaves):
    return Graph.from_edges([(0, i) for i in range(1, leaves + 1)], n=leaves + 1)


@pytest.fixture(scope="session")
def kg():
    return karate()


@pytest.fixture
def p4():
    return path_graph(4)


@pytest.fixture
def k4():
    return complete_graph(4)


@pytest.fixture(scope="session")
def fixture_text():
    return (DATA / "signed_fixture.csv").read_text()
