"""Datasets: Zachary's karate club, Barabasi-Albert graphs, signed SNAP edge lists."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from .graph import Graph, GraphError

log = logging.getLogger(__name__)

BITCOIN_ALPHA_URL = "https://snap.stanford.edu/data/soc-sign-bitcoinalpha.csv.gz"

_KARATE = """\
0 1
0 2
0 3
0 4
0 5
0 6
0 7
0 8
0 10
0 11
0 12
0 13
0 17
0 19
0 21
0 31
1 2
1 3
1 7
1 13
1 17
1 19
1 21
1 30
2 3
2 7
2 8
2 9
2 13
2 27
2 28
2 32
3 7
3 12
3 13
4 6
4 10
5 6
5 10
5 16
6 16
8 30
8 32
8 33
9 33
13 33
14 32
14 33
15 32
15 33
18 32
18 33
19 33
20 32
20 33
22 32
22 33
23 25
23 27
23 29
23 32
23 33
24 25
24 27
24 31
25 31
26 29
26 33
27 33
28 31
28 33
29 32
29 33
30 32
30 33
31 32
31 33
32 33
"""
_KARATE_SHA256 = "2095f3a8d35c292020188d1a0fd641effd209a09bc854973d8d6425604f91f6c"


def karate() -> Graph:
    """Zachary's karate club: 34 nodes, 78 edges, ids 0..33."""
    digest = hashlib.sha256(_KARATE.encode()).hexdigest()
    if digest != _KARATE_SHA256:
        raise RuntimeError("embedded karate edge list is corrupted")
    pairs = [tuple(map(int, line.split())) for line in _KARATE.splitlines()]
    return Graph.from_edges(pairs, n=34)


def generate_ba(n: int, m: int, seed: int | None = None) -> Graph:
    """Barabasi-Albert preferential attachment.

    Seeds with a complete graph on ``m + 1`` nodes; every later node attaches to
    ``m`` distinct existing nodes drawn proportionally to degree (repeated draws
    from the endpoint list, duplicates rejected).
    """
    if m < 1 or n <= m:
        raise GraphError(f"need n > m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    n_edges = m * (m + 1) // 2 + m * (n - m - 1)
    src = np.empty(n_edges, dtype=np.int64)
    dst = np.empty(n_edges, dtype=np.int64)
    ends = np.empty(2 * n_edges, dtype=np.int64)
    e = 0
    for a in range(m + 1):
        for b in range(a + 1, m + 1):
            src[e], dst[e] = a, b
            ends[2 * e], ends[2 * e + 1] = a, b
            e += 1
    buf = rng.random(4096)
    bi = 0
    for v in range(m + 1, n):
        total = 2 * e
        chosen: list[int] = []
        while len(chosen) < m:
            if bi == len(buf):
                buf = rng.random(4096)
                bi = 0
            t = int(ends[int(buf[bi] * total)])
            bi += 1
            if t not in chosen:
                chosen.append(t)
        for t in chosen:
            src[e], dst[e] = t, v
            ends[2 * e], ends[2 * e + 1] = t, v
            e += 1
    return Graph.from_edges(np.column_stack([src, dst]), n=n)


@dataclass
class SignedGraph:
    """Directed rated edges plus their undirected signed projection.

    ``edges`` columns are (source, target, rating, time) in original ids.
    ``graph`` is the undirected projection on dense ids; ``sign[(u, v)]`` with
    ``u < v`` is -1 if any directed edge between the pair is negative, else +1.
    ``zero_pairs`` lists projected pairs whose only ratings are 0.
    """

    edges: np.ndarray
    graph: Graph
    sign: dict[tuple[int, int], int]
    zero_pairs: list[tuple[int, int]]

    def edge_sign(self, u: int, v: int) -> int:
        return self.sign[(u, v) if u < v else (v, u)]


def signed_from_edges(edges) -> SignedGraph:
    """Project rows (source, target, rating, time) onto an undirected signed graph."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 4)
    remap: dict[int, int] = {}
    for a, b in edges[:, :2].tolist():
        for x in (a, b):
            if x not in remap:
                remap[x] = len(remap)
    neg: dict[tuple[int, int], bool] = {}
    pos: dict[tuple[int, int], bool] = {}
    for a, b, r, _ in edges.tolist():
        u, v = remap[a], remap[b]
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        neg.setdefault(key, False)
        pos.setdefault(key, False)
        if r < 0:
            neg[key] = True
        elif r > 0:
            pos[key] = True
    sign = {key: -1 if neg[key] else 1 for key in neg}
    zero = sorted(key for key in neg if not neg[key] and not pos[key])
    if zero:
        log.warning("%d node pairs carry only zero ratings; projected as positive", len(zero))
    g = Graph.from_edges(list(sign), n=len(remap), labels=list(remap))
    return SignedGraph(edges, g, sign, zero)


def load_signed_snap(text: str) -> SignedGraph:
    """Parse SNAP signed CSV rows ``SOURCE,TARGET,RATING,TIME``."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split(",")
        if len(parts) != 4:
            raise GraphError(f"line {lineno}: expected SOURCE,TARGET,RATING,TIME, got {s!r}")
        try:
            row = [int(float(p)) for p in parts]
        except ValueError:
            raise GraphError(f"line {lineno}: non-numeric field in {s!r}") from None
        if not -10 <= row[2] <= 10:
            log.warning("line %d: rating %d outside [-10, 10]", lineno, row[2])
        rows.append(row)
    if not rows:
        raise GraphError("empty signed edge list")
    return signed_from_edges(rows)


def fetch_bitcoin_alpha(path: str) -> str:
    """Download the Bitcoin Alpha trust network to ``path`` (decompressed)."""
    import gzip
    import urllib.request

    with urllib.request.urlopen(BITCOIN_ALPHA_URL) as resp:
        data = gzip.decompress(resp.read())
    with open(path, "wb") as fh:
        fh.write(data)
    return path
