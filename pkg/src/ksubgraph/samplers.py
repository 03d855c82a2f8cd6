"""Uniform connected k-subgraph samplers.

``mcmc``  Metropolis-Hastings walk on the k-state graph.
``psrw``  simple walk on the (k-1)-state graph, lifting an edge to a k-subgraph.
``rss``   recursive subgraph sampling: uniform and degree-proportional draws
          calling each other down to closed-form edge sampling.
``rss+``  RSS with the rejection folded into the degree-proportional chain.

Every chain length is ``ceil(step_ratio * bound)`` with the matching bound from
:mod:`ksubgraph.bounds`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from . import _kernels as K
from ._levels import table_rss_batch
from .bounds import (BoundInputs, bound_degree_prop, bound_mcmc, bound_psrw,
                     bound_rss_plus)
from .graph import Graph, GraphError, diameter, max_degree
from .states import StateTables, SubgraphState, Workspace

METHODS = {"mcmc": K.MCMC, "psrw": K.PSRW, "rss": K.RSS, "rss+": K.RSS_PLUS,
           "degprop": K.DEGPROP, "degprop+": K.DEGPROP_PLUS}
SAMPLERS = ("mcmc", "psrw", "rss", "rss+")

RngLike = Union[np.random.Generator, int, None]


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs the algorithms leave to the experimenter.

    ``step_cap`` clamps every chain length after scaling; ``diameter`` overrides
    the exact BFS diameter used by the mcmc/psrw bounds (any value >= the true
    diameter keeps the bounds valid). ``psrw_redraw_steps`` is how far the PSRW
    walk advances after a rejected lift; None re-runs the full chain length, which
    keeps the lifts independent. Short redraws are biased: a rejected state is
    not a stationary draw.
    """

    epsilon: float = 0.05
    seed: int | None = None
    step_ratio: float = 1.0
    rejection_cap: int = 10**6
    psrw_redraw_steps: int | None = None
    step_cap: int | None = None
    diameter: int | None = None
    debug: bool = False

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 <= self.step_ratio <= 1:
            raise ValueError("step_ratio must lie in [0, 1]")
        if self.rejection_cap < 1 or (self.psrw_redraw_steps or 0) < 0:
            raise ValueError("caps must be positive")
        if self.step_cap is not None and self.step_cap < 0:
            raise ValueError("step_cap must be nonnegative")

    def with_(self, **kw) -> "SamplerConfig":
        return replace(self, **kw)


def step_schedule(g: Graph, k: int, method: str, cfg: SamplerConfig,
                  delta: int | None = None, diam: int | None = None) -> np.ndarray:
    """Chain length per level (index = subgraph size) for ``method``."""
    steps = np.zeros(k + 2, dtype=np.int64)
    delta = max_degree(g) if delta is None else delta
    if method in ("mcmc", "psrw"):
        if diam is None:
            diam = cfg.diameter if cfg.diameter is not None else diameter(g)
        b = BoundInputs(k, delta, diam, g.n, cfg.epsilon)
        bound = bound_mcmc(b) if method == "mcmc" else bound_psrw(b)
        steps[k] = bound.steps(cfg.step_ratio, cfg.step_cap)
        return steps
    plus = method in ("rss+", "degprop+")
    for j in range(3, k + 1):
        b = BoundInputs(j, delta, 1, g.n, cfg.epsilon)
        bound = bound_rss_plus(b) if plus else bound_degree_prop(b)
        steps[j] = bound.steps(cfg.step_ratio, cfg.step_cap)
    return steps


def _seed_from(rng: RngLike, fallback: int | None) -> int:
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(2**32))
    if rng is not None:
        return int(rng) % 2**32
    if fallback is not None:
        return int(fallback) % 2**32
    return int(np.random.default_rng().integers(2**32))


@dataclass
class SampleBatch:
    nodes: np.ndarray          # (n, k) sorted node ids
    steps: np.ndarray          # chain steps spent per sample, all levels
    rejections: np.ndarray     # rejected proposals per sample, all levels
    totals: np.ndarray         # per-level [calls, steps, attempts, rejections, proposals]
    wall_ns: np.ndarray | None = None
    index: np.ndarray | None = None   # table backend: level-k state indices

    def states(self) -> list[SubgraphState]:
        return [tuple(r) for r in self.nodes.tolist()]

    def records(self) -> list[dict]:
        wall = self.wall_ns if self.wall_ns is not None else np.zeros(len(self.nodes), np.int64)
        return [{"nodes": n, "steps": int(s), "rejections": int(r), "wall_ns": int(w)}
                for n, s, r, w in zip(self.nodes.tolist(), self.steps, self.rejections, wall)]


class Sampler:
    """A configured sampler for one (graph, k, method).

    With ``tables`` (a :class:`StateTables` covering level k) every query is a
    lookup; otherwise states are handled lazily on the host graph. Both paths
    return identical samples for identical seeds.
    """

    def __init__(self, g: Graph, k: int, method: str, cfg: SamplerConfig | None = None,
                 tables: StateTables | None = None, steps: np.ndarray | None = None):
        if method not in METHODS:
            raise ValueError(f"unknown sampler {method!r}; choose from {', '.join(METHODS)}")
        if not 2 <= k < g.n:
            raise GraphError(f"need 2 <= k < |V| = {g.n}, got k={k}")
        if method == "psrw" and k < 3:
            raise GraphError("psrw needs k >= 3")
        if g.m == 0:
            raise GraphError("graph has no edges")
        if tables is not None and (tables.graph is not g or tables.k < k):
            raise ValueError("tables were built for a different graph or a smaller k")
        self.g, self.k, self.method = g, k, method
        self.cfg = cfg or SamplerConfig()
        self.tables = tables
        self.steps = step_schedule(g, k, method, self.cfg) if steps is None else steps
        e = g.edges()
        self._esrc = np.ascontiguousarray(e[:, 0])
        self._edst = np.ascontiguousarray(e[:, 1])
        deg = g.degrees
        self._ecum = np.cumsum((deg[self._esrc] + deg[self._edst] - 2).astype(np.float64))
        self._ws = None if tables is not None else Workspace(g, k)

    @property
    def redraw(self) -> int:
        r = self.cfg.psrw_redraw_steps
        return int(self.steps[self.k]) if r is None else r

    def _run(self, nsamp, out, rec, totals):
        g, cfg = self.g, self.cfg
        code = METHODS[self.method]
        if self.tables is None:
            ws = self._ws
            K.lazy_batch(code, self.k, nsamp, g.indptr, g.indices, self._esrc, self._edst,
                         self._ecum, self.steps, cfg.rejection_cap, self.redraw,
                         ws.ws, ws.ctr, ws.out_pos, ws.out_w, out, rec, totals, cfg.debug)
        elif code in (K.MCMC, K.PSRW):
            K.table_batch(code, self.k, nsamp, g.indptr, g.indices, self._esrc, self._edst,
                          self._ecum, self.steps, cfg.rejection_cap, self.redraw,
                          *self.tables.arrays(), out, rec, totals)
        else:
            s_off, p_off, _, deg, rem, ptr, nbr, uni, _ = self.tables.arrays()
            table_rss_batch(code, self.k)(nsamp, self.k, self._esrc, self._ecum, self.steps,
                                          cfg.rejection_cap, s_off, p_off, deg, rem, ptr, nbr,
                                          uni, out, rec, totals)

    def sample(self, n: int = 1, rng: RngLike = None, timing: bool = False,
               chunk: int = 65536) -> SampleBatch:
        """Draw ``n`` samples from one seeded random stream.

        ``timing`` records wall time per sample (one kernel call each); the
        random stream, and hence the samples, are the same either way.
        """
        K.seed(_seed_from(rng, self.cfg.seed))
        k = self.k
        table = self.tables is not None
        out = np.empty(n, dtype=np.int64) if table else np.empty((n, k), dtype=np.int64)
        rec = np.zeros((n, 2), dtype=np.int64)
        totals = np.zeros((k + 1, 5), dtype=np.int64)
        wall = None
        if timing:
            wall = np.empty(n, dtype=np.int64)
            for i in range(n):
                t0 = time.perf_counter_ns()
                self._run(1, out[i:i + 1], rec[i:i + 1], totals)
                wall[i] = time.perf_counter_ns() - t0
        else:
            for s in range(0, n, chunk):
                e = min(n, s + chunk)
                self._run(e - s, out[s:e], rec[s:e], totals)
        index = None
        if table:
            index = out
            states = self.tables.levels[k].states
            lut = np.array(states, dtype=np.int64).reshape(len(states), k)
            nodes = lut[out]
        else:
            nodes = out
        return SampleBatch(nodes, rec[:, 0].copy(), rec[:, 1].copy(), totals, wall, index)


def _one(g, k, method, cfg, rng, tables=None) -> SubgraphState:
    return Sampler(g, k, method, cfg, tables).sample(1, rng).states()[0]


def mcmc_sampling(g: Graph, k: int, cfg: SamplerConfig | None = None, rng: RngLike = None,
                  tables: StateTables | None = None) -> SubgraphState:
    return _one(g, k, "mcmc", cfg, rng, tables)


def uniform_sampling(g: Graph, k: int, cfg: SamplerConfig | None = None, rng: RngLike = None,
                     mode: str = "rss", tables: StateTables | None = None) -> SubgraphState:
    if mode not in ("rss", "rss_plus", "rss+"):
        raise ValueError("mode must be 'rss' or 'rss_plus'")
    return _one(g, k, "rss" if mode == "rss" else "rss+", cfg, rng, tables)


def degree_prop_sampling(g: Graph, k: int, cfg: SamplerConfig | None = None,
                         rng: RngLike = None, tables: StateTables | None = None) -> SubgraphState:
    return _one(g, k, "degprop", cfg, rng, tables)


def degree_prop_sampling_plus(g: Graph, k: int, cfg: SamplerConfig | None = None,
                              rng: RngLike = None,
                              tables: StateTables | None = None) -> SubgraphState:
    return _one(g, k, "degprop+", cfg, rng, tables)


def psrw_sampling(g: Graph, k: int, cfg: SamplerConfig | None = None, rng: RngLike = None,
                  tables: StateTables | None = None) -> SubgraphState:
    return _one(g, k, "psrw", cfg, rng, tables)
