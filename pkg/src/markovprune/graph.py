"""Acyclic directed mixed graphs.

A :class:`CausalGraph` holds named nodes, a latent flag per node, directed
edges and bidirected (correlated-error) edges. Graphs are immutable; every
query is a pure function of the graph.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import GraphError

IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

#: soft cap for operations that enumerate node subsets
MAX_SUBSET_NODES = 64


@dataclass(frozen=True)
class Violation:
    """One broken graph invariant. ``code`` is machine readable."""

    code: str
    message: str


class CausalGraph:
    """Acyclic directed mixed graph over named nodes.

    Parameters
    ----------
    nodes : sequence of str
        Node names in declaration order. Declaration order is the tie-break
        used by every ordered output.
    directed : iterable of (tail, head)
    bidirected : iterable of (a, b)
        Unordered pairs. ``a <-> b`` behaves as ``a <- u -> b`` for a fresh
        latent ``u`` in all separation queries.
    latent : iterable of str
        Nodes that are never observed.

    The constructor does not reject malformed input; use :func:`validate`
    (or :meth:`check`) to list invariant violations.

    Examples
    --------
    >>> g = CausalGraph(["A", "B", "C"], directed=[("A", "B"), ("B", "C")])
    >>> g.topological_order()
    ['A', 'B', 'C']
    """

    __slots__ = ("_nodes", "_index", "_latent", "_directed", "_bidirected",
                 "_parents", "_children", "_spouses")

    def __init__(
        self,
        nodes: Sequence[str],
        directed: Iterable[tuple[str, str]] = (),
        bidirected: Iterable[tuple[str, str]] = (),
        latent: Iterable[str] = (),
    ):
        self._nodes = tuple(dict.fromkeys(nodes))
        self._index = {v: i for i, v in enumerate(self._nodes)}
        self._latent = frozenset(latent)
        self._directed = tuple((a, b) for a, b in directed)
        self._bidirected = tuple(self._norm_pair(a, b) for a, b in bidirected)
        parents: dict[str, list[str]] = {v: [] for v in self._nodes}
        children: dict[str, list[str]] = {v: [] for v in self._nodes}
        spouses: dict[str, list[str]] = {v: [] for v in self._nodes}
        for a, b in self._directed:
            if a in parents and b in parents:
                if a not in parents[b]:
                    parents[b].append(a)
                if b not in children[a]:
                    children[a].append(b)
        for a, b in self._bidirected:
            if a in spouses and b in spouses and a != b:
                if b not in spouses[a]:
                    spouses[a].append(b)
                if a not in spouses[b]:
                    spouses[b].append(a)
        key = self._index.get
        self._parents = {v: tuple(sorted(p, key=key)) for v, p in parents.items()}
        self._children = {v: tuple(sorted(c, key=key)) for v, c in children.items()}
        self._spouses = {v: tuple(sorted(s, key=key)) for v, s in spouses.items()}

    def _norm_pair(self, a, b):
        ia, ib = self._index.get(a), self._index.get(b)
        if ia is not None and ib is not None:
            return (a, b) if ia <= ib else (b, a)
        return (a, b) if a <= b else (b, a)

    # -- basic accessors -------------------------------------------------
    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def latent(self) -> frozenset[str]:
        return self._latent

    @property
    def observed(self) -> tuple[str, ...]:
        return tuple(v for v in self._nodes if v not in self._latent)

    @property
    def directed_edges(self) -> tuple[tuple[str, str], ...]:
        return self._directed

    @property
    def bidirected_edges(self) -> tuple[tuple[str, str], ...]:
        return self._bidirected

    def __contains__(self, node) -> bool:
        return node in self._index

    def __len__(self) -> int:
        return len(self._nodes)

    def __repr__(self) -> str:
        parts = [f"{a}->{b}" for a, b in self._directed]
        parts += [f"{a}<->{b}" for a, b in self._bidirected]
        lat = f", latent={sorted(self._latent)}" if self._latent else ""
        return f"CausalGraph({', '.join(parts) or ' '.join(self._nodes)}{lat})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, CausalGraph):
            return NotImplemented
        return (
            set(self._nodes) == set(other._nodes)
            and self._latent == other._latent
            and set(self._directed) == set(other._directed)
            and {frozenset(e) for e in self._bidirected}
            == {frozenset(e) for e in other._bidirected}
        )

    def __hash__(self):
        return hash((frozenset(self._nodes), self._latent, frozenset(self._directed)))

    def order_key(self, node: str) -> int:
        """Declaration index of ``node``; used for deterministic sorting."""
        return self._index[node]

    def sort(self, nodes: Iterable[str]) -> list[str]:
        """Sort ``nodes`` by declaration order."""
        return sorted(nodes, key=self._index.__getitem__)

    def is_latent(self, node: str) -> bool:
        return node in self._latent

    def parents(self, node: str) -> tuple[str, ...]:
        self._require([node])
        return self._parents[node]

    def children(self, node: str) -> tuple[str, ...]:
        self._require([node])
        return self._children[node]

    def spouses(self, node: str) -> tuple[str, ...]:
        """Nodes sharing a bidirected edge with ``node``."""
        self._require([node])
        return self._spouses[node]

    def has_edge(self, tail: str, head: str) -> bool:
        return tail in self._parents.get(head, ())

    def has_bidirected(self, a: str, b: str) -> bool:
        return b in self._spouses.get(a, ())

    def _require(self, nodes: Iterable[str]) -> None:
        for v in nodes:
            if v not in self._index:
                raise GraphError(f"unknown node {v!r}", code="E002")

    # -- derived graphs --------------------------------------------------
    def with_edges(
        self,
        directed: Iterable[tuple[str, str]] | None = None,
        bidirected: Iterable[tuple[str, str]] | None = None,
    ) -> "CausalGraph":
        """Copy of the graph with replaced edge sets (same nodes and latents)."""
        return CausalGraph(
            self._nodes,
            self._directed if directed is None else directed,
            self._bidirected if bidirected is None else bidirected,
            self._latent,
        )

    def subgraph(self, keep: Iterable[str]) -> "CausalGraph":
        """Induced subgraph on ``keep`` (declaration order preserved)."""
        keep = set(keep)
        self._require(keep)
        return CausalGraph(
            [v for v in self._nodes if v in keep],
            [(a, b) for a, b in self._directed if a in keep and b in keep],
            [(a, b) for a, b in self._bidirected if a in keep and b in keep],
            self._latent & keep,
        )

    def check(self) -> None:
        """Raise :class:`GraphError` for the first invariant violation."""
        problems = validate(self)
        if problems:
            v = problems[0]
            raise GraphError(v.message, code=VIOLATION_CODES[v.code])

    # -- structural queries ----------------------------------------------
    def ancestors(self, s: Iterable[str]) -> frozenset[str]:
        """Reflexive-transitive closure along incoming directed edges."""
        return self._closure(s, self._parents)

    def descendants(self, s: Iterable[str]) -> frozenset[str]:
        """Reflexive-transitive closure along outgoing directed edges."""
        return self._closure(s, self._children)

    def _closure(self, s, step) -> frozenset[str]:
        s = [s] if isinstance(s, str) else list(s)
        self._require(s)
        seen = set(s)
        stack = list(s)
        while stack:
            v = stack.pop()
            for w in step[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return frozenset(seen)

    def topological_order(self) -> list[str]:
        """Kahn's algorithm, always releasing the earliest-declared ready node."""
        indeg = {v: len(self._parents[v]) for v in self._nodes}
        ready = [self._index[v] for v in self._nodes if indeg[v] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            v = self._nodes[heapq.heappop(ready)]
            order.append(v)
            for w in self._children[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(ready, self._index[w])
        if len(order) != len(self._nodes):
            raise GraphError("cycle", code="E001")
        return order

    def directed_paths(self, x: str, y: str) -> list[list[str]]:
        """All simple directed paths from ``x`` to ``y``, sorted lexicographically."""
        self._require([x, y])
        if x == y:
            return [[x]]
        can_reach = self.ancestors([y])
        paths = []

        def walk(path):
            v = path[-1]
            for w in self._children[v]:
                if w == y:
                    paths.append(path + [w])
                elif w in can_reach and w not in path:
                    walk(path + [w])

        if x in can_reach:
            walk([x])
        return sorted(paths)


VIOLATION_CODES = {
    "CycleDetected": "E001",
    "UnknownNode": "E002",
    "DuplicateEdge": "E003",
    "SelfLoop": "E004",
    "InvalidName": "E005",
}


def validate(graph: CausalGraph) -> list[Violation]:
    """Every invariant violation in ``graph``; empty list means valid."""
    out = []
    known = set(graph.nodes)
    for v in graph.nodes:
        if not isinstance(v, str) or not IDENT_RE.match(v):
            out.append(Violation("InvalidName", f"invalid node name {v!r}"))
    for v in sorted(graph.latent - known):
        out.append(Violation("UnknownNode", f"latent {v!r} is not a declared node"))
    seen_dir: set[tuple[str, str]] = set()
    for a, b in graph.directed_edges:
        for v in (a, b):
            if v not in known:
                out.append(Violation("UnknownNode", f"edge {a} -> {b}: unknown node {v!r}"))
        if a == b:
            out.append(Violation("SelfLoop", f"self-loop on {a}"))
        if (a, b) in seen_dir:
            out.append(Violation("DuplicateEdge", f"duplicate edge {a} -> {b}"))
        seen_dir.add((a, b))
    seen_bi: set[frozenset] = set()
    for a, b in graph.bidirected_edges:
        for v in (a, b):
            if v not in known:
                out.append(Violation("UnknownNode", f"edge {a} <-> {b}: unknown node {v!r}"))
        if a == b:
            out.append(Violation("SelfLoop", f"self-loop on {a}"))
        if frozenset((a, b)) in seen_bi:
            out.append(Violation("DuplicateEdge", f"duplicate edge {a} <-> {b}"))
        seen_bi.add(frozenset((a, b)))
    try:
        graph.topological_order()
    except GraphError:
        cyc = find_cycle(graph)
        out.append(Violation("CycleDetected", "cycle: " + " -> ".join(cyc)))
    return out


def find_cycle(graph: CausalGraph) -> list[str]:
    """One directed cycle as a closed node list, or ``[]`` if acyclic."""
    color = {v: 0 for v in graph.nodes}
    stack: list[str] = []

    def dfs(v):
        color[v] = 1
        stack.append(v)
        for w in graph._children[v]:
            if color[w] == 1:
                return stack[stack.index(w):] + [w]
            if color[w] == 0:
                found = dfs(w)
                if found:
                    return found
        color[v] = 2
        stack.pop()
        return None

    for v in graph.nodes:
        if color[v] == 0:
            found = dfs(v)
            if found:
                return found
    return []


def ancestors(graph: CausalGraph, s: Iterable[str]) -> frozenset[str]:
    return graph.ancestors(s)


def descendants(graph: CausalGraph, s: Iterable[str]) -> frozenset[str]:
    return graph.descendants(s)


def topological_order(graph: CausalGraph) -> list[str]:
    return graph.topological_order()


def directed_paths(graph: CausalGraph, x: str, y: str) -> list[list[str]]:
    return graph.directed_paths(x, y)
