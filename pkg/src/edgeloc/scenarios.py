"""Named preset scenarios and a seeded random scenario generator."""

from __future__ import annotations

import math

import numpy as np

from .errors import PreconditionError
from .geometry import Position, Scenario, Triple
from .locgraph import _connected

MIN_SEPARATION = 0.05
MAX_DRAWS = 1000


def _positions(coords: dict[str, tuple[float, float]]) -> dict[str, Position]:
    return {k: Position(*xy) for k, xy in coords.items()}


# Coordinates follow the drawings of the worked examples.
EXAMPLE1_POSITIONS = {"1": (0.5, 1.0), "2": (2.0, 2.5), "3": (3.8, 3.0), "4": (2.0, 0.5), "5": (3.5, 1.5)}
EXAMPLE3_POSITIONS = {"1": (0.5, 0.5), "2": (0.5, 3.5), "3": (3.5, 3.5), "4": (3.5, 0.5)}
SPLIT_PAIRS_POSITIONS = {
    "1": (0.5, 3.0), "2": (2.0, 2.0), "3": (3.8, 3.0),
    "4": (0.8, 0.5), "5": (3.5, 1.5), "6": (3.5, 0.5),
}


def example1() -> Scenario:
    """Five agents; agent 1 measures the pair (2, 4), agent 2 the pair (3, 5)."""
    return Scenario(_positions(EXAMPLE1_POSITIONS), [("1", "4", "2"), ("2", "5", "3")])


def example3() -> Scenario:
    """Four agents; agents 1, 2 and 4 each measure one pair."""
    return Scenario(_positions(EXAMPLE3_POSITIONS), [("1", "4", "2"), ("2", "4", "3"), ("4", "2", "1")])


def split_pairs() -> Scenario:
    """Agent 2 measures (1,4), (3,5), (3,6): its pairs split into two groups."""
    return Scenario(_positions(SPLIT_PAIRS_POSITIONS), [("2", "4", "1"), ("2", "5", "3"), ("2", "6", "3")])


def linked_pairs() -> Scenario:
    """As :func:`split_pairs` plus the pair (4,6), which links the two groups."""
    triples = [("2", "4", "1"), ("2", "5", "3"), ("2", "6", "3"), ("2", "6", "4")]
    return Scenario(_positions(SPLIT_PAIRS_POSITIONS), triples)


def single_triple() -> Scenario:
    return Scenario(_positions({"1": (0.0, 0.0), "2": (1.0, 0.0), "3": (0.0, 1.0)}), [("1", "2", "3")])


PRESETS = {
    "example1": example1,
    "example3": example3,
    "split-pairs": split_pairs,
    "linked-pairs": linked_pairs,
    "triple": single_triple,
}


def preset(name: str) -> Scenario:
    try:
        return PRESETS[name]()
    except KeyError:
        raise PreconditionError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def random_scenario(n_agents: int, seed: int = 0, extra_triples: int = 0) -> Scenario:
    """Uniform positions in the unit square, random triples until the graph is connected.

    A new triple at an observer that already measures something must reuse one
    of the agents it already sees, so every observer's measured pairs stay
    linked to each other.  ``extra_triples`` more are drawn after connectivity,
    fewer if every possible triple is already measured.
    """
    if n_agents < 3:
        raise PreconditionError("random scenarios need at least 3 agents")
    rng = np.random.default_rng(seed)

    points: list[tuple[float, float]] = []
    for _ in range(100 * n_agents):
        p = tuple(rng.uniform(0.0, 1.0, size=2))
        if all(math.dist(p, q) >= MIN_SEPARATION for q in points):
            points.append(p)
            if len(points) == n_agents:
                break
    else:
        raise PreconditionError(f"could not place {n_agents} agents {MIN_SEPARATION} apart")
    ids = [str(i + 1) for i in range(n_agents)]
    agents = {a: Position(float(x), float(y)) for a, (x, y) in zip(ids, points)}

    triples: list[Triple] = []
    seen: dict[str, set[str]] = {a: set() for a in ids}
    links: set[tuple[str, str]] = set()
    remaining_extra = extra_triples
    capacity = n_agents * (n_agents - 1) * (n_agents - 2) // 2
    for _ in range(MAX_DRAWS):
        u = ids[rng.integers(n_agents)]
        others = [a for a in ids if a != u]
        if seen[u]:
            pool = sorted(seen[u])
            v = pool[rng.integers(len(pool))]
            w = [a for a in others if a != v][rng.integers(n_agents - 2)]
        else:
            v, w = (others[i] for i in rng.choice(n_agents - 1, size=2, replace=False))
        if (u, v, w) in triples or (u, w, v) in triples:
            continue
        triples.append((u, v, w))
        seen[u] |= {v, w}
        links |= {(u, v), (u, w)}
        if len(_connected(ids, links)) == 1:
            if remaining_extra == 0 or len(triples) == capacity:
                return Scenario(agents, triples)
            remaining_extra -= 1
    raise PreconditionError(f"no connected scenario after {MAX_DRAWS} draws")
