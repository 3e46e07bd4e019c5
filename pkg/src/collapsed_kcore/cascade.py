"""Deletion cascades after interdicting a node set, and follower sets."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .graph import Graph, induced_subgraph, kcore, peel


class NotPreprocessedError(ValueError):
    """The operation needs a graph that equals its own k-core."""


@dataclass(frozen=True)
class Instance:
    graph: Graph
    k: int
    b: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.b < 0:
            raise ValueError("budget must be nonnegative")

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def preprocessed(self) -> bool:
        return bool(peel(self.graph, self.k).all())

    def require_preprocessed(self):
        if not self.preprocessed:
            raise NotPreprocessedError(
                f"graph is not its own {self.k}-core; call preprocess() first")

    def with_budget(self, b: int) -> "Instance":
        return Instance(self.graph, self.k, b)


def preprocess(inst: Instance) -> Instance:
    """Restrict the instance to the k-core of its graph."""
    core = kcore(inst.graph, inst.k)
    if len(core) == inst.n:
        return inst
    return Instance(induced_subgraph(inst.graph, core), inst.k, inst.b)


@dataclass(frozen=True)
class CascadeTrace:
    """``removed_at[v]`` is 0 for interdicted nodes, ``t >= 1`` for nodes
    leaving in round ``t`` and -1 for survivors."""

    removed_at: np.ndarray
    rounds: int
    survivors: frozenset[int]

    @property
    def interdicted(self) -> frozenset[int]:
        return frozenset(int(v) for v in np.flatnonzero(self.removed_at == 0))

    def leaving(self, t: int) -> list[int]:
        return [int(v) for v in np.flatnonzero(self.removed_at == t)]

    def to_json(self) -> dict:
        return {
            "interdicted": sorted(self.interdicted),
            "rounds": [self.leaving(t) for t in range(1, self.rounds + 1)],
            "survivors": sorted(self.survivors),
        }


def collapse(inst: Instance, w: Iterable[int]) -> CascadeTrace:
    """Synchronous cascade: after removing ``w``, every node whose number of
    remaining neighbours is below k leaves in the same round."""
    g, k = inst.graph, inst.k
    adj = g.adjacency
    removed_at = np.full(g.n, -1, dtype=np.int64)
    alive = np.ones(g.n, dtype=bool)
    w = list(w)
    removed_at[w] = 0
    alive[w] = False
    deg = [0] * g.n
    frontier = []
    for v in range(g.n):
        if alive[v]:
            d = 0
            for u in adj[v]:
                if alive[u]:
                    d += 1
            deg[v] = d
            if d < k:
                frontier.append(v)
    t = 0
    while frontier:
        t += 1
        for v in frontier:
            alive[v] = False
            removed_at[v] = t
        nxt = []
        for v in frontier:
            for u in adj[v]:
                if alive[u]:
                    deg[u] -= 1
                    if deg[u] == k - 1:
                        nxt.append(u)
        frontier = nxt
    survivors = frozenset(int(v) for v in np.flatnonzero(alive))
    return CascadeTrace(removed_at, t, survivors)


def survivors_mask(inst: Instance, w: Iterable[int], alive: np.ndarray | None = None) -> np.ndarray:
    """k-core mask of the graph minus ``w`` (order-free peeling)."""
    if alive is None:
        alive = np.ones(inst.n, dtype=bool)
    else:
        alive = alive.copy()
    alive[list(w)] = False
    return peel(inst.graph, inst.k, alive)


def collapsed_size(inst: Instance, w: Iterable[int]) -> int:
    return int(survivors_mask(inst, w).sum())


def followers_set(inst: Instance, s: Iterable[int]) -> frozenset[int]:
    """J_S: nodes outside the k-core of the graph minus ``s`` (``s`` included)."""
    mask = survivors_mask(inst, s)
    return frozenset(int(v) for v in np.flatnonzero(~mask))


def followers(inst: Instance, u: int) -> frozenset[int]:
    if not 0 <= u < inst.n:
        raise IndexError(f"node {u} out of range")
    return followers_set(inst, (u,))


def followers_table(inst: Instance) -> list[frozenset[int]]:
    """Follower set of every node of a preprocessed instance."""
    inst.require_preprocessed()
    return [followers(inst, u) for u in range(inst.n)]
