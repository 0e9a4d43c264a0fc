from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from edgeloc.graphs import DirectedGraph
from edgeloc.locgraph import localize
from edgeloc.scenarios import example1, example3, random_scenario

FOUR_VERTEX_EDGES = {"a": ("1", "2"), "b": ("2", "3"), "c": ("3", "1"), "d": ("3", "4"), "e": ("4", "3")}


def four_vertex_graph() -> DirectedGraph:
    return DirectedGraph(["1", "2", "3", "4"], FOUR_VERTEX_EDGES.values())


def random_symmetric_graph(rng: np.random.Generator, max_vertices: int = 6) -> DirectedGraph:
    """Symmetric graph on 2..max_vertices vertices in which every vertex has a neighbour."""
    n = int(rng.integers(2, max_vertices + 1))
    names = [str(i + 1) for i in range(n)]
    pairs = list(itertools.combinations(names, 2))
    while True:
        chosen = [p for p in pairs if rng.random() < 0.5]
        touched = {x for p in chosen for x in p}
        if len(touched) == n:
            break
    edges = [(a, b) for a, b in chosen] + [(b, a) for a, b in chosen]
    return DirectedGraph(names, edges)


def random_digraph(rng: np.random.Generator, max_vertices: int = 5) -> DirectedGraph:
    n = int(rng.integers(1, max_vertices + 1))
    names = [str(i + 1) for i in range(n)]
    edges = [(a, b) for a in names for b in names if a != b and rng.random() < 0.4]
    return DirectedGraph(names, edges)


@st.composite
def scenario_seeds(draw, max_agents: int = 7):
    n = draw(st.integers(3, max_agents))
    seed = draw(st.integers(0, 10_000))
    extra = draw(st.integers(0, 3))
    return n, seed, extra


def random_localization(n: int, seed: int, extra: int = 0):
    return localize(random_scenario(n, seed, extra))


@pytest.fixture(scope="session")
def ex1():
    return localize(example1())


@pytest.fixture(scope="session")
def ex3():
    return localize(example3())


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
