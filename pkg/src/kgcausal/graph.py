"""Directed graphs over integer node indices.

Nodes are ``0..n-1``; names live in a :class:`~kgcausal.catalog.VariableCatalog`
kept alongside. Graphs are immutable; the ``with_edges``/``without_edges``
helpers return new instances.
"""
from __future__ import annotations

import heapq
import json
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import CycleError

if TYPE_CHECKING:
    from .catalog import VariableCatalog
    from .constraints import ConstraintSet

Edge = tuple[int, int]


class DirectedGraph:
    """Simple directed graph without self-loops.

    Stores the edge set for O(1) membership and sorted child/parent lists
    for ordered iteration.
    """

    __slots__ = ("n", "edges", "_children", "_parents")

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        if n < 0:
            raise ValueError("node count must be non-negative")
        es = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for {n} nodes")
            es.add((u, v))
        self.n = n
        self.edges = frozenset(es)
        children: list[list[int]] = [[] for _ in range(n)]
        parents: list[list[int]] = [[] for _ in range(n)]
        for u, v in sorted(es):
            children[u].append(v)
            parents[v].append(u)
        self._children = tuple(tuple(c) for c in children)
        self._parents = tuple(tuple(sorted(p)) for p in parents)

    @classmethod
    def from_adjacency(cls, A) -> "DirectedGraph":
        A = np.asarray(A)
        n = A.shape[0]
        return cls(n, ((int(i), int(j)) for i, j in zip(*np.nonzero(A)) if i != j))

    def __contains__(self, edge) -> bool:
        return tuple(edge) in self.edges

    def __len__(self) -> int:
        return len(self.edges)

    def __eq__(self, other) -> bool:
        return isinstance(other, DirectedGraph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"DirectedGraph(n={self.n}, edges={self.sorted_edges()})"

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edges

    def children(self, u: int) -> tuple[int, ...]:
        return self._children[u]

    def parents(self, v: int) -> tuple[int, ...]:
        return self._parents[v]

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def with_edges(self, edges: Iterable[Edge]) -> "DirectedGraph":
        return DirectedGraph(self.n, self.edges | set(edges))

    def without_edges(self, edges: Iterable[Edge]) -> "DirectedGraph":
        return DirectedGraph(self.n, self.edges - set(edges))

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=int)
        for u, v in self.edges:
            A[u, v] = 1
        return A

    def descendants(self, u: int) -> set[int]:
        seen: set[int] = set()
        stack = list(self._children[u])
        while stack:
            x = stack.pop()
            if x not in seen:
                seen.add(x)
                stack.extend(self._children[x])
        return seen


def is_acyclic(g: DirectedGraph) -> bool:
    try:
        topological_order(g)
    except CycleError:
        return False
    return True


def topological_order(g: DirectedGraph) -> list[int]:
    """Kahn's algorithm; among ready nodes the smallest index goes first."""
    indeg = [len(g.parents(v)) for v in range(g.n)]
    ready = [v for v in range(g.n) if indeg[v] == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for v in g.children(u):
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    if len(order) != g.n:
        raise CycleError("graph contains a directed cycle")
    return order


def find_cycle(g: DirectedGraph) -> list[int] | None:
    """Return one directed cycle as a node sequence, or None.

    Iterative DFS from nodes in ascending order; the first back edge found
    defines the cycle, so the result is deterministic.
    """
    WHITE, GREY, BLACK = 0, 1, 2
    color = [WHITE] * g.n
    for root in range(g.n):
        if color[root] != WHITE:
            continue
        path = [root]
        iters = [iter(g.children(root))]
        color[root] = GREY
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                color[path.pop()] = BLACK
                iters.pop()
            elif color[nxt] == GREY:
                return path[path.index(nxt):]
            elif color[nxt] == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                iters.append(iter(g.children(nxt)))
    return None


def find_cycles(g: DirectedGraph) -> list[list[int]]:
    """All simple cycles, each rotated to start at its smallest node.

    Exhaustive enumeration: intended for small graphs and diagnostics. The
    cycle-breaking path uses :func:`find_cycle` instead.
    """
    cycles: list[list[int]] = []
    for s in range(g.n):
        # only cycles whose minimum node is s
        stack = [(s, iter(c for c in g.children(s) if c >= s))]
        path = [s]
        on_path = {s}
        while stack:
            _, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
            elif nxt == s:
                cycles.append(list(path))
            elif nxt not in on_path:
                path.append(nxt)
                on_path.add(nxt)
                stack.append((nxt, iter(c for c in g.children(nxt) if c >= s)))
    return cycles


def support_graph(W: np.ndarray) -> DirectedGraph:
    W = np.asarray(W)
    return DirectedGraph.from_adjacency(W != 0)


def resolve_cycles(W: np.ndarray, constraints: "ConstraintSet | None" = None) -> np.ndarray:
    """Zero out entries of ``W`` until its support is acyclic.

    Each round takes one cycle and removes the non-required edge with the
    smallest ``|W|``; if every edge on it is required, the edge minimising
    ``w(u, v) * |W[u, v]|`` goes instead. Ties fall to the smallest
    ``(u, v)`` pair.
    """
    W = np.array(W, dtype=float, copy=True)
    required = constraints.required if constraints is not None else frozenset()
    while True:
        cyc = find_cycle(support_graph(W))
        if cyc is None:
            return W
        edges = [(cyc[k], cyc[(k + 1) % len(cyc)]) for k in range(len(cyc))]
        free = [e for e in edges if e not in required]
        if free:
            victim = min(free, key=lambda e: (abs(W[e]), e))
        else:
            victim = min(edges, key=lambda e: (constraints.weight(*e) * abs(W[e]), e))
        W[victim] = 0.0


def to_dot(g: DirectedGraph, catalog: "VariableCatalog", weights: np.ndarray | None = None,
           name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    for u, v in g.sorted_edges():
        w = 1.0 if weights is None else float(weights[u, v])
        lines.append(f"  {catalog.name(u)} -> {catalog.name(v)} [weight={w:.6g}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(g: DirectedGraph, catalog: "VariableCatalog", weights: np.ndarray | None = None) -> str:
    edges = []
    for u, v in g.sorted_edges():
        e = {"source": catalog.name(u), "target": catalog.name(v)}
        if weights is not None:
            e["weight"] = round(float(weights[u, v]), 10)
        edges.append(e)
    return json.dumps({"variables": list(catalog.names), "edges": edges}, indent=2) + "\n"


def from_json(text: str, catalog: "VariableCatalog") -> DirectedGraph:
    from .errors import CatalogMismatch

    obj = json.loads(text)
    if "variables" in obj and list(obj["variables"]) != list(catalog.names):
        raise CatalogMismatch("graph file was written for a different variable catalog")
    return DirectedGraph(len(catalog), [(catalog.idx(e["source"]), catalog.idx(e["target"]))
                                        for e in obj["edges"]])


def edges_by_name(edges: Sequence[tuple[str, str]], catalog: "VariableCatalog") -> list[Edge]:
    return [(catalog.idx(u), catalog.idx(v)) for u, v in edges]
