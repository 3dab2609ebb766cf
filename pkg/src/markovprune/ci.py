"""Separation queries: d/m-separation, implied independencies, Markov blankets."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .errors import SeparationError
from .graph import CausalGraph


@dataclass(frozen=True)
class CiStatement:
    left: frozenset
    right: frozenset
    given: frozenset
    independent: bool = True

    def __str__(self):
        def names(s):
            return ",".join(sorted(s))

        sym = "_||_" if self.independent else "_|/|_"
        text = f"{names(self.left)} {sym} {names(self.right)}"
        if self.given:
            text += f" | {names(self.given)}"
        return text


def _as_set(s) -> frozenset:
    return frozenset([s]) if isinstance(s, str) else frozenset(s)


def reachable(graph: CausalGraph, sources: Iterable[str], given: Iterable[str]) -> frozenset:
    """Nodes m-connected to ``sources`` given ``given`` (Bayes-ball sweep).

    A visit state is ``(node, into)`` where ``into`` says whether the edge we
    arrived by has an arrowhead at ``node``. Bidirected edges carry arrowheads
    at both ends, which is exactly the ``a <- u -> b`` expansion.
    """
    given = frozenset(given)
    opens = graph.ancestors(given) if given else frozenset()
    start = [(v, False) for v in sources]
    seen = set(start)
    queue = deque(start)
    found = set()
    while queue:
        v, into = queue.popleft()
        if v not in given:
            found.add(v)
        nxt = []
        if into:
            # arrowhead at v: pass through as non-collider via tails only,
            # or bounce back through arrowheads when v is an open collider
            if v not in given:
                nxt += [(w, True) for w in graph._children[v]]
            if v in opens:
                nxt += [(w, False) for w in graph._parents[v]]
                nxt += [(w, True) for w in graph._spouses[v]]
        elif v not in given:
            nxt += [(w, True) for w in graph._children[v]]
            nxt += [(w, False) for w in graph._parents[v]]
            nxt += [(w, True) for w in graph._spouses[v]]
        for state in nxt:
            if state not in seen:
                seen.add(state)
                queue.append(state)
    return frozenset(found)


def d_separated(graph: CausalGraph, a, b, z=()) -> bool:
    """True iff ``a`` and ``b`` are m-separated given ``z``.

    Latent nodes may appear in ``a`` or ``b`` but not in ``z``.

    >>> from markovprune.graph import CausalGraph
    >>> g = CausalGraph("ABC", [("A", "B"), ("C", "B")])
    >>> d_separated(g, "A", "C"), d_separated(g, "A", "C", "B")
    (True, False)
    """
    a, b, z = _as_set(a), _as_set(b), _as_set(z)
    graph._require(a | b | z)
    if not a or not b:
        raise SeparationError("separation sets must be non-empty", code="E013")
    if a & b or a & z or b & z:
        raise SeparationError("separation sets overlap", code="E013")
    bad = z & graph.latent
    if bad:
        raise SeparationError(f"cannot condition on latent node(s) {sorted(bad)}")
    return not (reachable(graph, a, z) & b)


def implied_independencies(graph: CausalGraph, max_conditioning: int = 2) -> list[CiStatement]:
    """Pairwise statements ``X _||_ Y | Z`` over observed nodes with ``|Z| <= max_conditioning``.

    Pairs follow declaration order; within a pair, conditioning sets go by
    size and then declaration order.
    """
    obs = list(graph.observed)
    out = []
    for i, x in enumerate(obs):
        for y in obs[i + 1:]:
            rest = [v for v in obs if v not in (x, y)]
            for k in range(min(max_conditioning, len(rest)) + 1):
                for z in combinations(rest, k):
                    if not (reachable(graph, [x], z) & {y}):
                        out.append(CiStatement(frozenset([x]), frozenset([y]), frozenset(z)))
    return out


def markov_blanket(graph: CausalGraph, s) -> frozenset:
    """Parents, children and co-parents of ``s`` in a fully observed DAG, minus ``s``."""
    s = _as_set(s)
    graph._require(s)
    if graph.latent or graph.bidirected_edges:
        raise SeparationError(
            "Markov blanket needs a fully observed DAG; project out latents first",
            code="E014",
        )
    mb = set()
    for v in s:
        mb.update(graph._parents[v])
        for c in graph._children[v]:
            mb.add(c)
            mb.update(graph._parents[c])
    return frozenset(mb - s)
