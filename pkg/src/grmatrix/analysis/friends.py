"""Friendship networks: strongest column entries of the direct and hidden components."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..reduced import ReducedMatrixSet

DIRECT = "direct"
INDIRECT = "indirect"
LEADER = "leader"
CLOSURE = "closure"


class Friend(NamedTuple):
    name: str
    index: int
    weight: float
    dominance: str


@dataclass(frozen=True)
class FriendEdge:
    source: str
    target: str
    weight: float
    dominance: str
    generation: str

    @property
    def color(self) -> str:
        return "red" if self.dominance == INDIRECT else "black"


@dataclass
class FriendshipGraph:
    nodes: tuple[str, ...]
    edges: list[FriendEdge] = field(default_factory=list)
    component: str = "Grr+Gqrnd"
    k: int = 4

    def edge_set(self) -> set[tuple[str, str]]:
        return {(e.source, e.target) for e in self.edges}

    def out_edges(self, name: str) -> list[FriendEdge]:
        return [e for e in self.edges if e.source == name]


def _dominance(rset: ReducedMatrixSet, i: int, j: int) -> str:
    return INDIRECT if rset.Gqrnd[i, j] > rset.Grr[i, j] else DIRECT


def _friends_of(rset, matrix, j, k) -> list[Friend]:
    col = matrix[:, j]
    candidates = [i for i in range(rset.n) if i != j]
    # stable sort keeps ascending index among equal weights
    candidates.sort(key=lambda i: -col[i])
    return [Friend(rset.names[i], i, float(col[i]), _dominance(rset, i, j))
            for i in candidates[:k]]


def top_friends(rset: ReducedMatrixSet, source: str, k: int = 4,
                component: str = "Grr+Gqrnd") -> list[Friend]:
    """The k largest off-diagonal entries in the source's column."""
    j = rset.subset.position(source)
    if not 0 < k < rset.n:
        raise ValueError(f"k must lie in [1, {rset.n - 1}], got {k}")
    return _friends_of(rset, rset.component(component), j, k)


def friendship_graph(rset: ReducedMatrixSet, k: int = 4,
                     component: str = "Grr+Gqrnd") -> FriendshipGraph:
    """Every node linked to its top-k friends."""
    return leader_closure_graph(rset, list(rset.names), k, component)


def leader_closure_graph(rset: ReducedMatrixSet, leaders: list[str], k: int = 4,
                         component: str = "Gqrnd") -> FriendshipGraph:
    """Leaders' top-k friends, then friends of friends until nothing new is reached."""
    matrix = np.asarray(rset.component(component))
    if not 0 < k < rset.n:
        raise ValueError(f"k must lie in [1, {rset.n - 1}], got {k}")
    graph = FriendshipGraph(rset.names, component=component, k=k)
    frontier = [rset.subset.position(name) for name in leaders]
    expanded: set[int] = set()
    generation = LEADER
    while frontier:
        reached = []
        for j in frontier:
            if j in expanded:
                continue
            expanded.add(j)
            for f in _friends_of(rset, matrix, j, k):
                graph.edges.append(FriendEdge(rset.names[j], f.name, f.weight,
                                              f.dominance, generation))
                if f.index not in expanded:
                    reached.append(f.index)
        frontier = list(dict.fromkeys(i for i in reached if i not in expanded))
        generation = CLOSURE
    return graph
