"""Directed graphs, directed line graphs and oriented spanning trees.

An *oriented spanning tree* rooted at ``r`` (an in-arborescence) is a spanning
subgraph in which every vertex has a directed path to ``r``.  Counting uses
the out-degree Laplacian with exact integer determinants; existence uses the
strongly connected component condensation.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence

from .errors import InvariantError, PreconditionError

Vertex = Hashable
BRUTE_FORCE_MAX_EDGES = 8


class EdgeNode(NamedTuple):
    """An edge of a graph viewed as a vertex of its line graph."""

    tail: Vertex
    head: Vertex

    def __str__(self) -> str:
        return f"({self.tail},{self.head})"


class DirectedGraph:
    """Immutable directed graph without self-loops or parallel edges.

    Vertex identifiers are opaque hashables (strings at the API boundary);
    internally they are mapped to dense indices in insertion order.
    """

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[tuple[Vertex, Vertex]]):
        self.vertices: tuple[Vertex, ...] = tuple(vertices)
        self.index: dict[Vertex, int] = {}
        for v in self.vertices:
            if v in self.index:
                raise PreconditionError(f"duplicate vertex {v!r}")
            self.index[v] = len(self.index)

        n = len(self.vertices)
        self._succ: list[list[int]] = [[] for _ in range(n)]
        self._pred: list[list[int]] = [[] for _ in range(n)]
        seen: set[tuple[int, int]] = set()
        edge_list = []
        for tail, head in edges:
            if tail not in self.index or head not in self.index:
                raise PreconditionError(f"edge ({tail!r}, {head!r}) has an unknown endpoint")
            if tail == head:
                raise PreconditionError(f"self-loop at {tail!r}")
            key = (self.index[tail], self.index[head])
            if key in seen:
                raise PreconditionError(f"duplicate edge ({tail!r}, {head!r})")
            seen.add(key)
            self._succ[key[0]].append(key[1])
            self._pred[key[1]].append(key[0])
            edge_list.append(EdgeNode(tail, head))
        self.edges: tuple[EdgeNode, ...] = tuple(edge_list)
        self._edge_set = frozenset(self.edges)

    def __repr__(self) -> str:
        return f"DirectedGraph(|V|={len(self.vertices)}, |E|={len(self.edges)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return set(self.vertices) == set(other.vertices) and self._edge_set == other._edge_set

    def __hash__(self) -> int:
        return hash((frozenset(self.vertices), self._edge_set))

    def _idx(self, v: Vertex) -> int:
        try:
            return self.index[v]
        except KeyError:
            raise PreconditionError(f"unknown vertex {v!r}") from None

    def has_edge(self, tail: Vertex, head: Vertex) -> bool:
        return (tail, head) in self._edge_set

    def successors(self, v: Vertex) -> list[Vertex]:
        return [self.vertices[j] for j in self._succ[self._idx(v)]]

    def predecessors(self, v: Vertex) -> list[Vertex]:
        return [self.vertices[j] for j in self._pred[self._idx(v)]]

    def out_degree(self, v: Vertex) -> int:
        return len(self._succ[self._idx(v)])

    def in_degree(self, v: Vertex) -> int:
        return len(self._pred[self._idx(v)])

    def is_symmetric(self) -> bool:
        return all((h, t) in self._edge_set for t, h in self.edges)

    def adjacency(self) -> list[list[int]]:
        """Successor lists over dense indices."""
        return [list(s) for s in self._succ]

    def laplacian(self) -> list[list[int]]:
        """Unit-weight out-degree Laplacian ``D_out - A``."""
        n = len(self.vertices)
        lap = [[0] * n for _ in range(n)]
        for i, succ in enumerate(self._succ):
            lap[i][i] = len(succ)
            for j in succ:
                lap[i][j] -= 1
        return lap

    def subgraph_without_edges(self, drop: Iterable[tuple[Vertex, Vertex]]) -> DirectedGraph:
        gone = set(drop)
        return DirectedGraph(self.vertices, [e for e in self.edges if e not in gone])

    def to_dot(self, edge_labels: Mapping[tuple[Vertex, Vertex], str] | None = None) -> str:
        lines = ["digraph {"]
        lines += [f'  "{v}";' for v in self.vertices]
        for e in self.edges:
            label = (edge_labels or {}).get(e)
            attr = f' [label="{label}"]' if label is not None else ""
            lines.append(f'  "{e.tail}" -> "{e.head}"{attr};')
        lines.append("}")
        return "\n".join(lines) + "\n"


def line_graph(g: DirectedGraph) -> DirectedGraph:
    """Directed line graph: one vertex per edge, ``e1 -> e2`` iff head(e1) == tail(e2)."""
    out_edges: dict[Vertex, list[EdgeNode]] = {v: [] for v in g.vertices}
    for e in g.edges:
        out_edges[e.tail].append(e)
    adjacency = [(e1, e2) for e1 in g.edges for e2 in out_edges[e1.head]]
    return DirectedGraph(g.edges, adjacency)


def strongly_connected_components(g: DirectedGraph) -> list[list[Vertex]]:
    """Tarjan's algorithm, iterative.  Components come out in reverse topological order."""
    succ = g.adjacency()
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[Vertex]] = []
    counter = 0

    for start in range(n):
        if index[start] != -1:
            continue
        work = [(start, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recursed = False
            for k in range(pos, len(succ[v])):
                w = succ[v][k]
                if index[w] == -1:
                    work.append((v, k + 1))
                    work.append((w, 0))
                    recursed = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recursed:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(g.vertices[w])
                    if w == v:
                        break
                components.append(sorted(comp, key=g.index.__getitem__))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return components


def sink_components(g: DirectedGraph) -> list[list[Vertex]]:
    """SCCs with no edge leaving them (sinks of the condensation)."""
    comps = strongly_connected_components(g)
    owner = {v: i for i, comp in enumerate(comps) for v in comp}
    leaves = [False] * len(comps)
    for tail, head in g.edges:
        if owner[tail] != owner[head]:
            leaves[owner[tail]] = True
    return [comp for i, comp in enumerate(comps) if not leaves[i]]


def spanning_tree_roots(g: DirectedGraph) -> frozenset:
    """Vertices reachable from every vertex; nonempty iff an oriented spanning tree exists."""
    sinks = sink_components(g)
    if len(sinks) != 1:
        return frozenset()
    return frozenset(sinks[0])


def has_spanning_tree(g: DirectedGraph) -> bool:
    return bool(spanning_tree_roots(g))


def integer_determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix by fraction-free Bareiss elimination."""
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if any(len(row) != n for row in a):
        raise PreconditionError("determinant needs a square matrix")
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def count_in_trees(g: DirectedGraph, r: Vertex) -> int:
    """Number of oriented spanning trees rooted at ``r`` (matrix-tree theorem)."""
    ri = g._idx(r)
    lap = g.laplacian()
    minor = [[x for j, x in enumerate(row) if j != ri] for i, row in enumerate(lap) if i != ri]
    return integer_determinant(minor)


def is_in_tree(g: DirectedGraph, edges: Iterable[tuple[Vertex, Vertex]], r: Vertex) -> bool:
    """Oriented-spanning-tree predicate: acyclic, every vertex has a path to ``r``."""
    parent: dict[Vertex, Vertex] = {}
    for tail, head in edges:
        if tail in parent or tail == r:
            return False
        parent[tail] = head
    for v in g.vertices:
        seen = set()
        while v != r:
            if v in seen or v not in parent:
                return False
            seen.add(v)
            v = parent[v]
    return True


def brute_force_in_trees(g: DirectedGraph, r: Vertex, max_edges: int = BRUTE_FORCE_MAX_EDGES) -> int:
    """Count oriented spanning trees at ``r`` by enumerating edge subsets of size |V|-1."""
    g._idx(r)
    if len(g.edges) > max_edges:
        raise PreconditionError(f"brute force limited to {max_edges} edges, graph has {len(g.edges)}")
    size = len(g.vertices) - 1
    return sum(1 for subset in combinations(g.edges, size) if is_in_tree(g, subset, r))


def knuth_count(g: DirectedGraph, e: tuple[Vertex, Vertex]) -> int:
    """Oriented spanning trees of ``line_graph(g)`` rooted at ``e``, by Knuth's formula.

    Requires every vertex of ``g`` to have positive in-degree.
    """
    e = EdgeNode(*e)
    if not g.has_edge(*e):
        raise PreconditionError(f"{e} is not an edge of the graph")
    zero_in = [v for v in g.vertices if g.in_degree(v) == 0]
    if zero_in:
        raise PreconditionError(f"vertices with in-degree 0: {zero_in}")
    head_out = g.out_degree(e.head)
    if head_out == 0:
        raise PreconditionError(f"head {e.head!r} has out-degree 0")
    product = 1
    for v in g.vertices:
        product *= g.out_degree(v) ** (g.in_degree(v) - 1)
    value = Fraction(count_in_trees(g, e.tail) * product, head_out)
    if value.denominator != 1:
        raise InvariantError(f"Knuth's formula gave non-integer {value} for {e}")
    return int(value)
