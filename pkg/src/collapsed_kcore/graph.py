"""Undirected simple graphs, edge-list ingestion and k-core decomposition."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Iterator, Sequence

import numpy as np

log = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%")


class ParseError(ValueError):
    """Raised for malformed edge-list input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph on nodes ``0..n-1``.

    ``labels[i]`` is the original label of node ``i``. ``dropped_self_loops``
    and ``dropped_duplicates`` record what ingestion discarded.
    """

    adjacency: tuple[tuple[int, ...], ...]
    labels: tuple[Hashable, ...] = ()
    dropped_self_loops: int = 0
    dropped_duplicates: int = 0
    _degree: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(len(self.adjacency))))
        if len(self.labels) != len(self.adjacency):
            raise ValueError("labels and adjacency differ in length")
        deg = np.fromiter((len(a) for a in self.adjacency), dtype=np.int64,
                          count=len(self.adjacency))
        object.__setattr__(self, "_degree", deg)

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def m(self) -> int:
        return int(self._degree.sum()) // 2

    @property
    def degree(self) -> np.ndarray:
        """Degree array (read-only view)."""
        d = self._degree.view()
        d.flags.writeable = False
        return d

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once, as ``(i, j)`` with ``i < j``."""
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if i < j:
                    yield i, j

    def label_of(self, nodes: Iterable[int]) -> list[Hashable]:
        return [self.labels[i] for i in sorted(nodes)]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   labels: Sequence[Hashable] | None = None) -> "Graph":
        """Build from integer edges, dropping loops and repeats."""
        nbrs: list[set[int]] = [set() for _ in range(n)]
        loops = dups = 0
        for i, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                loops += 1
                continue
            if j in nbrs[i]:
                dups += 1
                continue
            nbrs[i].add(j)
            nbrs[j].add(i)
        adjacency = tuple(tuple(sorted(s)) for s in nbrs)
        return cls(adjacency, tuple(labels) if labels is not None else (), loops, dups)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.adjacency == other.adjacency and self.labels == other.labels

    def __hash__(self):
        return hash(self.adjacency)

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _label_key(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def parse_edge_list(text: str, comment_prefix: Sequence[str] = COMMENT_PREFIXES,
                    separator: str | None = None) -> Graph:
    """Parse an edge list: one edge per line, two labels per line.

    Integer labels are relabelled in ascending numeric order, anything else
    in order of first appearance. Self-loops and repeated edges are dropped
    and counted on the returned graph.
    """
    if isinstance(comment_prefix, str):
        comment_prefix = (comment_prefix,)
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(tuple(comment_prefix)):
            continue
        parts = [p for p in line.split(separator) if p]
        if len(parts) < 2:
            raise ParseError(f"expected two node labels, got {raw!r}", lineno)
        # extra columns (weights, timestamps) are ignored
        pairs.append((_label_key(parts[0].strip()), _label_key(parts[1].strip())))
    if not pairs:
        raise ParseError("edge list is empty")

    seen: dict = {}
    for a, b in pairs:
        seen.setdefault(a, None)
        seen.setdefault(b, None)
    order = list(seen)
    if all(isinstance(x, int) for x in order):
        order.sort()
    index = {lab: i for i, lab in enumerate(order)}
    g = Graph.from_edges(len(order), ((index[a], index[b]) for a, b in pairs), order)
    if g.dropped_self_loops or g.dropped_duplicates:
        log.warning("dropped %d self-loops and %d duplicate edges",
                    g.dropped_self_loops, g.dropped_duplicates)
    return g


def read_edge_list(path, **options) -> Graph:
    return parse_edge_list(Path(path).read_text(), **options)


def _check_nodes(g: Graph, s: Iterable[int]) -> list[int]:
    nodes = sorted(set(s))
    if nodes and (nodes[0] < 0 or nodes[-1] >= g.n):
        bad = [v for v in nodes if not 0 <= v < g.n]
        raise IndexError(f"node ids {bad} out of range for n={g.n}")
    return nodes


def induced_subgraph(g: Graph, s: Iterable[int]) -> Graph:
    """Subgraph induced by ``s``; node ``i`` of the result is the ``i``-th
    smallest id in ``s`` and keeps its original label."""
    nodes = _check_nodes(g, s)
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[nodes] = np.arange(len(nodes))
    adjacency = tuple(
        tuple(int(pos[j]) for j in g.adjacency[v] if pos[j] >= 0) for v in nodes)
    return Graph(adjacency, tuple(g.labels[v] for v in nodes))


def remove_nodes(g: Graph, s: Iterable[int]) -> Graph:
    drop = set(s)
    return induced_subgraph(g, (v for v in range(g.n) if v not in drop))


def peel(g: Graph, k: int, alive: np.ndarray | None = None) -> np.ndarray:
    """Boolean mask of the k-core of ``g`` restricted to ``alive``.

    Iterated removal of nodes with fewer than ``k`` live neighbours; every
    node is queued at most once so the work is O(n + m).
    """
    adj = g.adjacency
    if alive is None:
        alive = np.ones(g.n, dtype=bool)
    else:
        alive = alive.copy()
    deg = [0] * g.n
    live = [int(v) for v in np.flatnonzero(alive)]
    for v in live:
        d = 0
        for u in adj[v]:
            if alive[u]:
                d += 1
        deg[v] = d
    stack = [v for v in live if deg[v] < k]
    alive[stack] = False
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if alive[u]:
                deg[u] -= 1
                if deg[u] < k:
                    alive[u] = False
                    stack.append(u)
    return alive


def kcore(g: Graph, k: int) -> frozenset[int]:
    """Node set of the (possibly empty, possibly disconnected) k-core."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    return frozenset(int(v) for v in np.flatnonzero(peel(g, k)))


@dataclass(frozen=True)
class CoreDecomposition:
    coreness: np.ndarray
    max_coreness: int
    layers: tuple[frozenset[int], ...]

    def core(self, k: int) -> frozenset[int]:
        return frozenset(int(v) for v in np.flatnonzero(self.coreness >= k))


def core_decomposition(g: Graph, alive: np.ndarray | None = None) -> CoreDecomposition:
    """Coreness of every node by bucket-queue peeling (Batagelj-Zaversnik).

    Nodes outside ``alive`` get coreness 0 and are ignored.
    """
    n = g.n
    adj = g.adjacency
    if alive is None:
        alive = np.ones(n, dtype=bool)
    deg = [0] * n
    for v in range(n):
        if alive[v]:
            deg[v] = sum(1 for u in adj[v] if alive[u])
    live = [v for v in range(n) if alive[v]]
    maxdeg = max((deg[v] for v in live), default=0)

    # bin sort by degree
    bins = [0] * (maxdeg + 1)
    for v in live:
        bins[deg[v]] += 1
    start = 0
    for d in range(maxdeg + 1):
        bins[d], start = start, start + bins[d]
    vert = [0] * len(live)
    pos = [0] * n
    for v in live:
        pos[v] = bins[deg[v]]
        vert[pos[v]] = v
        bins[deg[v]] += 1
    for d in range(maxdeg, 0, -1):
        bins[d] = bins[d - 1]
    if bins:
        bins[0] = 0

    for idx in range(len(live)):
        v = vert[idx]
        for u in adj[v]:
            if alive[u] and deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    vert[pu], vert[pw] = w, u
                    pos[u], pos[w] = pw, pu
                bins[du] += 1
                deg[u] -= 1

    coreness = np.zeros(n, dtype=np.int64)
    for v in live:
        coreness[v] = deg[v]
    ell = int(coreness.max()) if n else 0
    layers = tuple(frozenset(int(v) for v in np.flatnonzero((coreness == i) & alive))
                   for i in range(ell + 1))
    return CoreDecomposition(coreness, ell, layers)


def min_degree(g: Graph) -> int:
    if g.n == 0:
        raise ValueError("minimum degree of an empty graph is undefined")
    return int(g.degree.min())


def min_degree_of(g: Graph, s: Iterable[int]) -> int:
    """Minimum degree of the subgraph induced by ``s`` (without building it)."""
    nodes = set(s)
    if not nodes:
        raise ValueError("minimum degree of an empty graph is undefined")
    return min(sum(1 for u in g.adjacency[v] if u in nodes) for v in nodes)
