"""Immutable undirected simple graphs in CSR form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numba import njit


class GraphError(ValueError):
    """Raised for malformed graph input or queries that the graph cannot answer."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph with dense ids ``0..n-1``.

    ``indptr``/``indices`` hold the sorted adjacency lists in CSR layout.
    ``labels[i]`` is the original id of node ``i`` (identity when the graph was
    built from dense ids).
    """

    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.indptr, self.indices, self.labels):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        self._check_node(v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.indices[self.indptr[v]:self.indptr[v + 1]].tolist() for v in range(self.n)]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def edges(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` array with ``u < v``, sorted lexicographically."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def _check_node(self, v):
        if not 0 <= v < self.n:
            raise GraphError(f"node id {v} out of range 0..{self.n - 1}")

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    @classmethod
    def from_edges(cls, edges, n: int | None = None, labels=None) -> "Graph":
        """Build from an iterable of ``(u, v)`` pairs over dense ids.

        Self-loops and parallel edges are dropped.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if n is None:
            n = int(e.max()) + 1 if len(e) else 0
        if len(e) and (e.min() < 0 or e.max() >= n):
            raise GraphError("edge endpoint outside 0..n-1")
        e = e[e[:, 0] != e[:, 1]]
        e = np.sort(e, axis=1)
        e = np.unique(e, axis=0)
        both = np.concatenate([e, e[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(both[:, 0], minlength=n), out=indptr[1:])
        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        return cls(indptr, np.ascontiguousarray(both[:, 1]), np.asarray(labels, dtype=np.int64))


def load_edge_list(text: str | Iterable[str]) -> Graph:
    """Parse a whitespace-separated edge list.

    Lines starting with ``#`` (and blank lines) are skipped. Ids are remapped to
    ``0..n-1`` in order of first appearance; the original ids are kept in
    ``Graph.labels``.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    remap: dict[int, int] = {}
    pairs = []
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.split()
        if len(tok) < 2:
            raise GraphError(f"line {lineno}: expected two node ids, got {s!r}")
        try:
            a, b = int(tok[0]), int(tok[1])
        except ValueError:
            raise GraphError(f"line {lineno}: node ids must be integers, got {s!r}") from None
        if a < 0 or b < 0:
            raise GraphError(f"line {lineno}: node ids must be nonnegative")
        for x in (a, b):
            if x not in remap:
                remap[x] = len(remap)
        pairs.append((remap[a], remap[b]))
    if not remap:
        raise GraphError("empty edge list")
    return Graph.from_edges(pairs, n=len(remap), labels=list(remap))


def degree(g: Graph, v: int) -> int:
    g._check_node(v)
    return int(g.indptr[v + 1] - g.indptr[v])


def max_degree(g: Graph) -> int:
    if g.n == 0:
        raise GraphError("empty graph has no maximum degree")
    return int(g.degrees.max())


@njit(cache=True)
def _bfs_ecc(indptr, indices, src, dist, queue):
    dist[:] = -1
    dist[src] = 0
    head, tail = 0, 1
    queue[0] = src
    far = 0
    while head < tail:
        x = queue[head]
        head += 1
        dx = dist[x]
        if dx > far:
            far = dx
        for i in range(indptr[x], indptr[x + 1]):
            y = indices[i]
            if dist[y] < 0:
                dist[y] = dx + 1
                queue[tail] = y
                tail += 1
    return far, tail


@njit(cache=True)
def _all_pairs_diameter(indptr, indices):
    n = len(indptr) - 1
    dist = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    best = 0
    for s in range(n):
        far, reached = _bfs_ecc(indptr, indices, s, dist, queue)
        if reached < n:
            return -1
        if far > best:
            best = far
    return best


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        return False
    dist = np.empty(g.n, dtype=np.int64)
    _, reached = _bfs_ecc(g.indptr, g.indices, 0, dist, np.empty(g.n, dtype=np.int64))
    return reached == g.n


def diameter(g: Graph) -> int:
    """Exact diameter by BFS from every node; O(n*m)."""
    if g.n == 0:
        raise GraphError("empty graph")
    d = int(_all_pairs_diameter(g.indptr, g.indices))
    if d < 0:
        raise GraphError(
            "graph is disconnected; process components separately or pass an explicit "
            "diameter override (--diameter)"
        )
    return d


def is_connected_induced(g: Graph, nodes: Sequence[int]) -> bool:
    """True iff ``nodes`` induces a connected subgraph of ``g``."""
    nodes = list(nodes)
    if not nodes:
        raise GraphError("empty node set")
    for v in nodes:
        g._check_node(v)
    members = set(nodes)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        x = stack.pop()
        for y in members:
            if y not in seen and g.has_edge(x, y):
                seen.add(y)
                stack.append(y)
    return len(seen) == len(members)
