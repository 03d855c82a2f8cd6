"""The k-state graph: connected k-subgraphs and their swap adjacency.

A state is a sorted tuple of node ids. Two states are adjacent when their node
sets share exactly k-1 nodes. Per-state queries run lazily through the numba
kernels; :func:`enumerate_states` materializes the whole state graph by brute
force and doubles as the validation oracle.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from . import _kernels as K
from .graph import Graph, GraphError, max_degree

SubgraphState = tuple[int, ...]

DEFAULT_STATE_CAP = 10**6


class StateCapExceeded(RuntimeError):
    pass


class Workspace:
    """Scratch buffers for lazy neighbour enumeration on one graph."""

    def __init__(self, g: Graph, k: int):
        dmax = max_degree(g) if g.n else 0
        cap = k * k * max(dmax, 1) + 4
        self.ws = np.zeros((4, g.n), dtype=np.int64)
        self.ctr = np.zeros(1, dtype=np.int64)
        self.out_pos = np.empty(cap, dtype=np.int64)
        self.out_w = np.empty(cap, dtype=np.int64)


def validate_state(g: Graph, h: Sequence[int]) -> np.ndarray:
    arr = np.asarray(h, dtype=np.int64)
    if arr.ndim != 1 or len(arr) == 0:
        raise GraphError("state must be a nonempty sequence of node ids")
    if arr.min() < 0 or arr.max() >= g.n:
        raise GraphError("state contains a node id outside the graph")
    arr = np.sort(arr)
    if np.any(arr[1:] == arr[:-1]):
        raise GraphError("state has repeated nodes")
    if not K.connected(g.indptr, g.indices, arr, len(arr)):
        raise GraphError(f"state {tuple(arr.tolist())} does not induce a connected subgraph")
    return arr


def state_neighbors(g: Graph, h: Sequence[int], ws: Workspace | None = None) -> list[SubgraphState]:
    """All states sharing k-1 nodes with ``h``, in canonical order."""
    arr = validate_state(g, h)
    k = len(arr)
    ws = ws or Workspace(g, k)
    cnt = K.neighbors(g.indptr, g.indices, arr, k, ws.ws, ws.ctr, ws.out_pos, ws.out_w, True)
    out = []
    for pos, w in zip(ws.out_pos[:cnt].tolist(), ws.out_w[:cnt].tolist()):
        rest = arr.tolist()
        del rest[pos]
        out.append(tuple(sorted(rest + [w])))
    return out


def state_degree(g: Graph, h: Sequence[int], ws: Workspace | None = None) -> int:
    arr = validate_state(g, h)
    k = len(arr)
    ws = ws or Workspace(g, k)
    return int(K.state_degree(g.indptr, g.indices, arr, k, ws.ws, ws.ctr, ws.out_pos, ws.out_w))


def removable_count(g: Graph, h: Sequence[int]) -> int:
    """Number of nodes of ``h`` whose removal keeps it connected.

    Equals the number of connected (k-1)-subgraphs inside ``h``.
    """
    if len(h) < 2:
        raise GraphError("removable count needs k >= 2")
    arr = validate_state(g, h)
    return int(K.removable(g.indptr, g.indices, arr, len(arr)))


# ------------------------------------------------------------------ enumeration


@dataclass
class StateGraph:
    k: int
    states: list[SubgraphState]
    adjacency: list[list[int]]

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def index(self) -> dict[SubgraphState, int]:
        return {s: i for i, s in enumerate(self.states)}

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nb in enumerate(self.adjacency) for j in nb if i < j]

    def diameter(self) -> int:
        """BFS diameter; raises on a disconnected state graph."""
        n = len(self.states)
        if n == 0:
            raise GraphError("empty state graph")
        best = 0
        for s in range(n):
            dist = [-1] * n
            dist[s] = 0
            q = deque([s])
            while q:
                x = q.popleft()
                for y in self.adjacency[x]:
                    if dist[y] < 0:
                        dist[y] = dist[x] + 1
                        q.append(y)
            if min(dist) < 0:
                raise GraphError("state graph is disconnected")
            best = max(best, max(dist))
        return best

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "states": [list(s) for s in self.states],
                           "edges": [list(e) for e in self.edges()]})

    @classmethod
    def from_json(cls, text: str) -> "StateGraph":
        d = json.loads(text)
        states = [tuple(s) for s in d["states"]]
        adj: list[list[int]] = [[] for _ in states]
        for i, j in d["edges"]:
            adj[i].append(j)
            adj[j].append(i)
        return cls(d["k"], states, [sorted(a) for a in adj])


def connected_subsets(g: Graph, k: int, cap: int = DEFAULT_STATE_CAP) -> list[SubgraphState]:
    """Every connected k-node subset, each exactly once, sorted.

    Extension-set enumeration rooted at each node ``v``: only nodes larger than
    ``v`` may join, and a node enters the extension set only when it is first
    seen in the neighbourhood of the growing subset.
    """
    adj = g.adjacency
    found: list[SubgraphState] = []

    def extend(sub, ext, root, nbhd):
        if len(sub) == k:
            found.append(tuple(sorted(sub)))
            if len(found) > cap:
                raise StateCapExceeded(f"more than {cap} connected {k}-subgraphs")
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            new_ext = list(ext)
            new_nbhd = set(nbhd)
            for x in adj[w]:
                if x > root and x not in nbhd:
                    new_ext.append(x)
                    new_nbhd.add(x)
            extend(sub + [w], new_ext, root, new_nbhd)

    for v in range(g.n):
        ext = [x for x in adj[v] if x > v]
        extend([v], ext, v, set(ext) | {v})
    found.sort()
    return found


def enumerate_states(g: Graph, k: int, cap: int = DEFAULT_STATE_CAP) -> StateGraph:
    """Materialize the k-state graph by brute force.

    Adjacency comes from grouping states by their (k-1)-subsets: two distinct
    k-sets share exactly k-1 nodes iff they contain a common (k-1)-subset.
    """
    if not 1 <= k < g.n:
        raise GraphError(f"need 1 <= k < |V| = {g.n}, got k={k}")
    states = connected_subsets(g, k, cap)
    adj: list[set[int]] = [set() for _ in states]
    if k == 1:
        for i, j in g.edges().tolist():
            adj[i].add(j)
            adj[j].add(i)
    else:
        buckets: dict[tuple, list[int]] = {}
        for i, s in enumerate(states):
            for sub in combinations(s, k - 1):
                buckets.setdefault(sub, []).append(i)
        for members in buckets.values():
            for a, b in combinations(members, 2):
                adj[a].add(b)
                adj[b].add(a)
    return StateGraph(k, states, [sorted(a) for a in adj])


# ------------------------------------------------------------- table hierarchy


def _brute_removable(g: Graph, s: SubgraphState) -> int:
    from .graph import is_connected_induced
    return sum(is_connected_induced(g, s[:i] + s[i + 1:]) for i in range(len(s)))


class StateTables:
    """State graphs for levels 2..k flattened for the table backend.

    Neighbour lists follow the canonical order used by the lazy backend, so both
    backends consume random numbers identically.
    """

    def __init__(self, g: Graph, k: int, cap: int = DEFAULT_STATE_CAP):
        if k < 2:
            raise GraphError("tables need k >= 2")
        self.graph = g
        self.k = k
        self.levels: dict[int, StateGraph] = {}
        for j in range(2, k + 1):
            self.levels[j] = enumerate_states(g, j, cap)
        self._flatten()

    def _flatten(self):
        g, k = self.graph, self.k
        index = {j: sg.index() for j, sg in self.levels.items()}
        s_off = np.zeros(k + 2, dtype=np.int64)
        p_off = np.zeros(k + 2, dtype=np.int64)
        n_off = np.zeros(k + 2, dtype=np.int64)
        deg, rem, ptr, nbr, uni, nodes = [], [], [], [], [], []
        slot = 0
        for j in range(2, k + 1):
            sg = self.levels[j]
            s_off[j] = len(deg)
            p_off[j] = len(ptr)
            n_off[j] = len(nodes)
            upper = index.get(j + 1)
            for i, s in enumerate(sg.states):
                ordered = []
                for t in sg.adjacency[i]:
                    f = sg.states[t]
                    dropped = (set(s) - set(f)).pop()
                    added = (set(f) - set(s)).pop()
                    ordered.append((s.index(dropped), added, t))
                ordered.sort()
                ptr.append(slot)
                for _, added, t in ordered:
                    nbr.append(t)
                    uni.append(upper[tuple(sorted(s + (added,)))] if upper is not None else -1)
                slot += len(ordered)
                deg.append(len(ordered))
                rem.append(_brute_removable(g, s))
                nodes.extend(s)
            ptr.append(slot)
        s_off[k + 1] = len(deg)
        as64 = lambda x: np.asarray(x, dtype=np.int64)
        self.s_off, self.p_off, self.n_off = s_off, p_off, n_off
        self.deg, self.rem, self.ptr = as64(deg), as64(rem), as64(ptr)
        self.nbr, self.uni, self.nodes = as64(nbr), as64(uni), as64(nodes)

    def states(self, j: int | None = None) -> list[SubgraphState]:
        return self.levels[j or self.k].states

    def arrays(self):
        return (self.s_off, self.p_off, self.n_off, self.deg, self.rem, self.ptr,
                self.nbr, self.uni, self.nodes)
