"""From subtended angles to the interaction graph of edge agents.

Pipeline::

    measurements --(every measured pair implies both directed edges)--> communication graph G
    G --(virtual-vertex surgery)--> edge localization graph G_bar
    line_graph(G_bar) --(numbering by lexicographic edge order)--> interaction graph G'

A virtual copy of agent ``v`` attached to agent ``u`` is named ``"v~u"``.  It is
co-located with ``v``, so stripping the suffix recovers the original edge.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AssumptionViolation, InvariantError, PreconditionError
from .geometry import (
    VIRTUAL_SEPARATOR,
    AngleMeasurementSet,
    Position,
    Scenario,
    Triple,
    bearing_angle,
    principal_value,
    synthesize_measurements,
)
from .graphs import DirectedGraph, EdgeNode, has_spanning_tree, line_graph, spanning_tree_roots

log = logging.getLogger(__name__)

CLOSURE_TOL = 1e-9

__all__ = [
    "AngleMeasurementSet",
    "PairConnectivityReport",
    "CommunicationGraph",
    "EdgeAgent",
    "EdgeLocalizationGraph",
    "Localization",
    "LocalizationInteractionGraph",
    "UndesiredConnectionError",
    "build_communication_graph",
    "build_edge_localization_graph",
    "build_localization_interaction_graph",
    "check_assumption2",
    "close_measurements",
    "find_undesired_connections",
    "residual_undesired_connections",
    "localize",
    "strip_virtual",
    "virtual_name",
]


class UndesiredConnectionError(AssumptionViolation):
    """A line-graph adjacency has no measured angle to back it."""


def virtual_name(v: str, u: str) -> str:
    """Name of the unreachable virtual copy of ``v`` seen from ``u``."""
    return f"{v}{VIRTUAL_SEPARATOR}{u}"


def strip_virtual(name: str) -> str:
    return name.split(VIRTUAL_SEPARATOR, 1)[0]


def is_virtual(name: str) -> bool:
    return VIRTUAL_SEPARATOR in name


# --------------------------------------------------------------------------
# communication graph and measurement closure
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CommunicationGraph:
    graph: DirectedGraph


def _connected(vertices: Sequence[str], links: Iterable[tuple[str, str]]) -> list[set[str]]:
    adj: dict[str, set[str]] = {v: set() for v in vertices}
    for a, b in links:
        adj[a].add(b)
        adj[b].add(a)
    comps: list[set[str]] = []
    seen: set[str] = set()
    for v in vertices:
        if v in seen:
            continue
        comp = {v}
        queue = deque([v])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in comp:
                    comp.add(y)
                    queue.append(y)
        seen |= comp
        comps.append(comp)
    return comps


def build_communication_graph(s: AngleMeasurementSet, all_agents: Iterable[str]) -> CommunicationGraph:
    """Symmetric graph with ``u <-> v`` and ``u <-> w`` for every measurement at ``u``."""
    agents = list(all_agents)
    if not s:
        raise PreconditionError("empty measurement set")
    unknown = s.agents() - set(agents)
    if unknown:
        raise PreconditionError(f"measurements mention unknown agents {sorted(unknown)}")
    edges: dict[tuple[str, str], None] = {}
    for u, v, w in s:
        for x in (v, w):
            edges[(u, x)] = None
            edges[(x, u)] = None
    comps = _connected(agents, edges)
    if len(comps) > 1:
        raise PreconditionError(
            "communication graph is disconnected: " + " | ".join(",".join(sorted(c)) for c in comps)
        )
    order = {a: i for i, a in enumerate(agents)}
    ordered = sorted(edges, key=lambda e: (order[e[0]], order[e[1]]))
    return CommunicationGraph(DirectedGraph(agents, ordered))


@dataclass(frozen=True)
class PairConnectivityReport:
    """Per-observer connectivity of the pairs it measures."""

    components: Mapping[str, tuple[frozenset, ...]]

    @property
    def satisfied(self) -> bool:
        return all(len(c) <= 1 for c in self.components.values())

    def observer_ok(self, observer: str) -> bool:
        return len(self.components[observer]) <= 1

    def violations(self) -> list[str]:
        return [u for u, c in self.components.items() if len(c) > 1]


def check_assumption2(s: AngleMeasurementSet) -> PairConnectivityReport:
    comps = {}
    for u in s.observers():
        nodes = sorted(s.seen_by(u))
        comps[u] = tuple(frozenset(c) for c in _connected(nodes, s.pairs(u)))
    return PairConnectivityReport(comps)


def close_measurements(s: AngleMeasurementSet) -> AngleMeasurementSet:
    """Add every angle derivable by chaining measured angles at the same observer."""
    report = check_assumption2(s)
    if not report.satisfied:
        raise AssumptionViolation(f"observers with disconnected measured pairs: {report.violations()}")
    entries = dict(s)
    for u in s.observers():
        nodes = sorted(s.seen_by(u))
        # relative ray direction of every seen agent w.r.t. the first one
        offset = {nodes[0]: 0.0}
        queue = deque([nodes[0]])
        while queue:
            v = queue.popleft()
            for w in nodes:
                if w not in offset and (u, v, w) in s:
                    offset[w] = offset[v] + s[(u, v, w)]
                    queue.append(w)
        for v, w in s.pairs(u):
            gap = principal_value(offset[w] - offset[v] - s[(u, v, w)])
            if abs(gap) > CLOSURE_TOL:
                raise AssumptionViolation(
                    f"inconsistent angles at observer {u}: chains disagree by {gap:.3g} rad on ({v},{w})"
                )
        for v in nodes:
            for w in nodes:
                if v != w and (u, v, w) not in entries:
                    entries[(u, v, w)] = principal_value(offset[w] - offset[v])
    # re-derive mirrors from the forward value so the pair is exactly sign-symmetric
    for (u, v, w) in list(entries):
        if (u, v, w) not in s and v < w:
            entries[(u, w, v)] = principal_value(-entries[(u, v, w)])
    return AngleMeasurementSet(entries)


def find_undesired_connections(g: CommunicationGraph, s: AngleMeasurementSet) -> list[tuple[EdgeNode, EdgeNode]]:
    """Line-graph edges ``(u,v) -> (v,w)`` with ``u != w`` and no angle at ``v`` between ``u`` and ``w``."""
    lg = line_graph(g.graph)
    return [(k, j) for k, j in lg.edges if k.tail != j.head and (k.head, k.tail, j.head) not in s]


def residual_undesired_connections(
    elg: EdgeLocalizationGraph, s: AngleMeasurementSet
) -> list[tuple[EdgeNode, EdgeNode]]:
    """Undesired connections left in ``line_graph(elg)``, reported on original edges."""
    found = []
    for k, j in line_graph(elg.graph).edges:
        u, v, w = strip_virtual(k.tail), strip_virtual(k.head), strip_virtual(j.head)
        if u != w and (v, u, w) not in s:
            found.append((elg.origin[k], elg.origin[j]))
    return found


# --------------------------------------------------------------------------
# edge localization graph
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeLocalizationGraph:
    graph: DirectedGraph
    origin: Mapping[EdgeNode, EdgeNode]
    removed_agents: tuple[str, ...] = ()

    def virtual_vertices(self) -> list[str]:
        return [v for v in self.graph.vertices if is_virtual(v)]


def build_edge_localization_graph(g: CommunicationGraph, s: AngleMeasurementSet) -> EdgeLocalizationGraph:
    """Replace each unsupported edge pair by edges to an unreachable virtual vertex.

    The pair ``(u,v), (v,u)`` becomes ``(u, v~u), (v~u, u)`` when ``v`` measures no
    angle involving ``u``.  Agents that measure nothing are dropped.
    """
    graph = g.graph

    def unsupported(u: str, v: str) -> bool:
        return u not in s.seen_by(v)

    edges: list[EdgeNode] = []
    origin: dict[EdgeNode, EdgeNode] = {}
    for u, v in graph.edges:
        fwd, back = unsupported(u, v), unsupported(v, u)
        if fwd and back:
            raise InvariantError(f"edge ({u},{v}) is not backed by any measurement")
        if fwd:
            new = EdgeNode(u, virtual_name(v, u))
        elif back:
            new = EdgeNode(virtual_name(u, v), v)
        else:
            new = EdgeNode(u, v)
        edges.append(new)
        origin[new] = EdgeNode(u, v)

    observers = set(s.observers())
    kept = [v for v in graph.vertices if v in observers]
    removed = tuple(v for v in graph.vertices if v not in observers)
    virtual: dict[str, None] = {}
    for e in edges:
        for x in e:
            if is_virtual(x):
                virtual[x] = None
    if removed:
        log.info("agents measuring no angle, dropped from the edge localization graph: %s", ", ".join(removed))
    elg = DirectedGraph(kept + list(virtual), edges)
    for t, h in elg.edges:
        if is_virtual(t) and is_virtual(h):
            raise InvariantError(f"edge ({t},{h}) joins two virtual vertices")
    return EdgeLocalizationGraph(elg, origin, removed)


# --------------------------------------------------------------------------
# localization interaction graph
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeAgent:
    id: int
    node: EdgeNode
    origin: tuple[str, str]

    def __str__(self) -> str:
        return f"({self.origin[0]},{self.origin[1]})^e"


@dataclass(frozen=True)
class LocalizationInteractionGraph:
    """Edge agents ``1..M`` and the relative orientation on every interaction edge.

    ``weights[(k, j)]`` is the relative orientation used by agent ``k`` when it
    reads neighbour ``j``.
    """

    agents: tuple[EdgeAgent, ...]
    weights: Mapping[tuple[int, int], float]
    anchored: tuple[int, ...] = ()
    _neighbors: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        nbrs: dict[int, list[int]] = {a.id: [] for a in self.agents}
        for k, j in self.weights:
            nbrs[k].append(j)
        object.__setattr__(self, "_neighbors", nbrs)

    def __len__(self) -> int:
        return len(self.agents)

    @property
    def ids(self) -> list[int]:
        return [a.id for a in self.agents]

    def agent(self, k: int) -> EdgeAgent:
        if not 1 <= k <= len(self.agents):
            raise PreconditionError(f"unknown edge agent {k}")
        return self.agents[k - 1]

    def neighbors(self, k: int) -> list[int]:
        self.agent(k)
        return list(self._neighbors[k])

    def agent_for_edge(self, u: str, v: str) -> int:
        for a in self.agents:
            if a.origin == (u, v):
                return a.id
        raise PreconditionError(f"no edge agent for edge ({u},{v})")

    @property
    def graph(self) -> DirectedGraph:
        return DirectedGraph(self.ids, list(self.weights))

    def true_orientations(self, positions: Mapping[str, Position]) -> np.ndarray:
        """Ground-truth bearing angle of each edge agent's original edge."""
        return np.array([bearing_angle(positions[a.origin[0]], positions[a.origin[1]]) for a in self.agents])

    def to_dot(self) -> str:
        labels = {kj: f"{theta:.6f}" for kj, theta in self.weights.items()}
        return self.graph.to_dot(labels)


def build_localization_interaction_graph(
    elg: EdgeLocalizationGraph, s: AngleMeasurementSet
) -> LocalizationInteractionGraph:
    nodes = sorted(elg.graph.edges, key=lambda e: (e.tail, e.head))
    phi = {node: i + 1 for i, node in enumerate(nodes)}
    agents = tuple(
        EdgeAgent(phi[n], n, (strip_virtual(n.tail), strip_virtual(n.head))) for n in nodes
    )
    lg = line_graph(elg.graph)
    weights: dict[tuple[int, int], float] = {}
    for k_node, j_node in sorted(lg.edges, key=lambda kj: (phi[kj[0]], phi[kj[1]])):
        u, v = strip_virtual(k_node.tail), strip_virtual(k_node.head)
        w = strip_virtual(j_node.head)
        if w == u:
            theta = -math.pi
        else:
            try:
                theta = principal_value(s[(v, u, w)] + math.pi)
            except KeyError:
                raise UndesiredConnectionError(
                    f"no angle at {v} between {u} and {w} backs the adjacency {k_node} -> {j_node}"
                ) from None
        weights[(phi[k_node], phi[j_node])] = theta
    return LocalizationInteractionGraph(agents, weights)


# --------------------------------------------------------------------------
# whole pipeline
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Localization:
    """Every intermediate object built from one scenario."""

    scenario: Scenario
    measurements: AngleMeasurementSet
    effective: AngleMeasurementSet
    pair_connectivity: PairConnectivityReport
    comm: CommunicationGraph
    undesired: tuple[tuple[EdgeNode, EdgeNode], ...]
    elg: EdgeLocalizationGraph
    lig: LocalizationInteractionGraph
    closure: bool

    @property
    def elg_roots(self) -> frozenset:
        return spanning_tree_roots(self.elg.graph)

    @property
    def has_spanning_tree(self) -> bool:
        return has_spanning_tree(self.elg.graph)

    def true_orientations(self) -> np.ndarray:
        return self.lig.true_orientations(self.scenario.agents)


def localize(scenario: Scenario, closure: bool = True) -> Localization:
    measured = synthesize_measurements(scenario)
    a2 = check_assumption2(measured)
    effective = close_measurements(measured) if closure else measured
    comm = build_communication_graph(effective, scenario.agents)
    undesired = tuple(find_undesired_connections(comm, effective))
    elg = build_edge_localization_graph(comm, effective)
    lig = build_localization_interaction_graph(elg, effective)
    return Localization(scenario, measured, effective, a2, comm, undesired, elg, lig, closure)
