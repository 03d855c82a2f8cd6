"""Experiment harnesses: loss, uniformity runs, step-ratio sweeps, timing and motifs."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bounds import (BoundError, BoundInputs, bound_degree_prop, bound_mcmc, bound_psrw,
                     bound_rss_plus)
from .datasets import SignedGraph
from .graph import Graph, GraphError, diameter, max_degree
from .samplers import Sampler, SamplerConfig, step_schedule
from .states import StateTables, SubgraphState, validate_state


def loss(counts, total: int, num_states: int) -> float:
    """Half the L1 distance between empirical and uniform distributions.

    ``counts`` is a mapping state -> tally or a sequence of tallies; states that
    never appear contribute their full ``1 / num_states`` deficit.
    """
    if num_states < 1:
        raise ValueError("num_states must be >= 1")
    if total <= 0:
        raise ValueError("total must be positive")
    vals = np.fromiter(counts.values() if isinstance(counts, Mapping) else counts, dtype=np.float64)
    seen = vals[vals > 0]
    if len(seen) > num_states:
        raise ValueError("more distinct states than num_states")
    u = 1.0 / num_states
    return 0.5 * (np.abs(seen / total - u).sum() + (num_states - len(seen)) * u)


@dataclass
class SampleReport:
    counts: dict[SubgraphState, int]
    total: int
    loss: float
    num_states: int
    sampler: str
    k: int
    epsilon: float
    step_ratio: float
    seed: int | None = None
    wall_time_ns: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["counts"] = [[list(s), c] for s, c in sorted(self.counts.items())]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SampleReport":
        d = dict(d)
        d["counts"] = {tuple(s): int(c) for s, c in d["counts"]}
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SampleReport":
        return cls.from_dict(json.loads(text))

    def csv_rows(self) -> list[list]:
        """One row per state: nodes joined by spaces, count."""
        return [[" ".join(map(str, s)), c] for s, c in sorted(self.counts.items())]

    def recomputed_loss(self) -> float:
        return loss(self.counts, self.total, self.num_states)


def summarize(reports: Sequence[SampleReport]) -> tuple[float, float]:
    """Mean and sample standard deviation of the run losses."""
    vals = np.array([r.loss for r in reports])
    return float(vals.mean()), float(vals.std(ddof=1)) if len(vals) > 1 else 0.0


def run_seeds(seed: int | None, runs: int) -> list[int]:
    """Independent 32-bit seeds for ``runs`` chains, derived from one master seed."""
    ss = np.random.SeedSequence(seed)
    return [int(c.generate_state(1)[0]) for c in ss.spawn(runs)]


def _uniformity_run(args) -> SampleReport:
    g, k, method, cfg, nsamp, tables, timing = args
    s = Sampler(g, k, method, cfg, tables)
    batch = s.sample(nsamp, timing=timing)
    states = tables.states(k)
    tally = np.bincount(batch.index, minlength=len(states))
    counts = {st: int(c) for st, c in zip(states, tally.tolist())}
    wall = batch.wall_ns.tolist() if batch.wall_ns is not None else []
    return SampleReport(counts, nsamp, loss(tally, nsamp, len(states)), len(states), method, k,
                        cfg.epsilon, cfg.step_ratio, cfg.seed, wall)


def _fan_out(fn, jobs_args: list, jobs: int) -> list:
    if jobs <= 1 or len(jobs_args) <= 1:
        return [fn(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, jobs_args))


def uniformity_experiment(g: Graph, k: int, sampler: str, cfg: SamplerConfig, runs: int = 10,
                          samples_per_state: int = 1000, tables: StateTables | None = None,
                          jobs: int = 1, timing: bool = False) -> list[SampleReport]:
    """``runs`` independent runs of ``samples_per_state * |V^(k)|`` samples each.

    Run ``i`` is seeded with ``run_seeds(cfg.seed, runs)[i]``, so the result does
    not depend on ``jobs``.
    """
    if tables is None:
        tables = StateTables(g, k)
    nsamp = samples_per_state * len(tables.states(k))
    args = [(g, k, sampler, cfg.with_(seed=s), nsamp, tables, timing)
            for s in run_seeds(cfg.seed, runs)]
    return _fan_out(_uniformity_run, args, jobs)


@dataclass
class SweepPoint:
    ratio: float
    loss_mean: float
    loss_std: float
    runs: int


def step_ratio_sweep(g: Graph, k: int, sampler: str, cfg: SamplerConfig,
                     ratios: Iterable[float] = (0, 1e-3, 1e-2, 1e-1, 1), runs: int = 1,
                     samples_per_state: int = 1000, tables: StateTables | None = None,
                     jobs: int = 1) -> list[SweepPoint]:
    if tables is None:
        tables = StateTables(g, k)
    out = []
    for r in ratios:
        reps = uniformity_experiment(g, k, sampler, cfg.with_(step_ratio=float(r)), runs,
                                     samples_per_state, tables, jobs)
        mean, std = summarize(reps)
        out.append(SweepPoint(float(r), mean, std, runs))
    return out


# ------------------------------------------------------------------ timing


@dataclass
class BenchReport:
    sampler: str
    k: int
    n: int
    delta: int
    per_sample_ns: float      # measured, or extrapolated when ``estimated``
    estimated: bool
    ops_full: float           # predicted elementary operations per sample
    ops_measured: float       # mean operations per sample in the measured run
    ns_per_op: float
    reps: int
    measure_cap: int          # per-chain step cap of the measured run (0 = uncapped)


def _chain_levels(sampler: str, k: int) -> list[int]:
    if sampler in ("mcmc", "psrw"):
        return [k]
    if sampler in ("degprop", "degprop+"):
        return list(range(3, k + 1))
    return list(range(3, k))


def predicted_ops(sampler: str, k: int, steps: np.ndarray, attempts: Mapping[int, float],
                  redraw: int | None = None) -> float:
    """Expected chain steps plus rejection attempts for one sample.

    ``attempts[j]`` is the mean number of proposals per accepted uniform draw at
    level j (for psrw, per accepted lift). Lazy chains propose on half their steps.
    ``redraw`` None means psrw re-walks the full chain after each rejection.
    """
    a = lambda j: attempts.get(j, 1.0)
    t = lambda j: float(steps[j])
    if sampler == "mcmc":
        return t(k)
    if sampler == "psrw":
        r = t(k) if redraw is None else redraw
        return t(k) + a(k) + (a(k) - 1) * r
    if sampler in ("rss", "degprop"):
        dp = 0.0  # degree-proportional edge draw at level 2 is closed form
        for j in range(3, k + 1):
            u = a(j) * (dp + 1)
            dp = u * (1 + t(j) / 2) + t(j)
        return u if sampler == "rss" else dp
    dpp = 0.0
    for j in range(3, k):
        dpp = (1 + t(j) / 2) * dpp + t(j)
    if sampler == "degprop+":
        return (1 + t(k) / 2) * dpp + t(k)
    return a(k) * (dpp + 1)


def bench_sampling_time(g: Graph, k: int, sampler: str, cfg: SamplerConfig, reps: int = 10,
                        measure_steps: int = 100, delta: int | None = None,
                        diam: int | None = None) -> BenchReport:
    """Wall time per sample, extrapolated when the full chains are too long.

    When any chain of the full schedule exceeds ``measure_steps``, samples are
    drawn with every chain capped so that one sample walks about
    ``measure_steps`` steps in total (the cap is ``measure_steps ** (1/L)`` for
    L nested chain levels). Time per elementary operation (chain step or
    rejection attempt) from that run, times the predicted operation count of
    the full schedule, gives the estimate.
    """
    delta = max_degree(g) if delta is None else delta
    if sampler in ("mcmc", "psrw") and diam is None:
        diam = cfg.diameter if cfg.diameter is not None else diameter(g)
    try:
        full = step_schedule(g, k, sampler, cfg.with_(step_cap=None), delta, diam)
    except BoundError:
        full = None  # more than 2**62 steps
    levels = _chain_levels(sampler, k)
    if full is not None and all(full[j] <= measure_steps for j in levels):
        cap, steps = 0, full
    else:
        cap = max(1, int(math.floor(measure_steps ** (1.0 / max(len(levels), 1)) + 1e-9)))
        steps = step_schedule(g, k, sampler, cfg.with_(step_cap=cap), delta, diam)
    s = Sampler(g, k, sampler, cfg, steps=steps)
    s.sample(1, rng=0)  # compile and warm up outside the clock
    t0 = time.perf_counter_ns()
    batch = s.sample(reps, rng=cfg.seed)
    wall = time.perf_counter_ns() - t0
    tot = batch.totals
    ops = float(tot[:, 1].sum() + tot[:, 2].sum())
    ns_op = wall / max(ops, 1.0)
    att = {j: tot[j, 2] / max(tot[j, 2] - tot[j, 3], 1) for j in range(k + 1) if tot[j, 2] > 0}
    if cap == 0:
        return BenchReport(sampler, k, g.n, delta, wall / reps, False, ops / reps, ops / reps,
                           ns_op, reps, 0)
    log_full = _log_full_ops(g, k, sampler, cfg, delta, diam, att)
    return BenchReport(sampler, k, g.n, delta, math.exp(min(log_full, 700.0)) * ns_op, True,
                       math.exp(min(log_full, 700.0)), ops / reps, ns_op, reps, cap)


def _log_full_ops(g, k, sampler, cfg, delta, diam, attempts) -> float:
    """log of the predicted op count; uses float steps so huge bounds stay finite."""
    steps = np.zeros(k + 2, dtype=np.float64)
    if sampler in ("mcmc", "psrw"):
        b = BoundInputs(k, delta, diam, g.n, cfg.epsilon)
        bd = bound_mcmc(b) if sampler == "mcmc" else bound_psrw(b)
        if cfg.step_ratio == 0:
            return 0.0
        log_t = bd.log_value + math.log(cfg.step_ratio)
        if sampler == "mcmc":
            return log_t
        a = attempts.get(k, 1.0)
        if cfg.psrw_redraw_steps is None:
            return math.log(a) + float(np.logaddexp(log_t, 0.0))
        return float(np.logaddexp(log_t, math.log(predicted_ops("psrw", k, steps, attempts,
                                                                cfg.psrw_redraw_steps))))
    plus = sampler in ("rss+", "degprop+")
    for j in range(3, k + 1):
        b = BoundInputs(j, delta, 1, g.n, cfg.epsilon)
        bd = bound_rss_plus(b) if plus else bound_degree_prop(b)
        steps[j] = math.ceil(bd.value * cfg.step_ratio)
    return math.log(max(predicted_ops(sampler, k, steps, attempts), 1.0))


# ------------------------------------------------------------------ motifs

K3_CLASSES = ("open_triplet", "triangle", "balanced_triangle")
K4_CLASSES = ("line_shaped", "clique", "other")

# (edge count, sorted degrees) -> connected 4-node graph
K4_TYPES = {
    (3, (1, 1, 2, 2)): "path",
    (3, (1, 1, 1, 3)): "star",
    (4, (2, 2, 2, 2)): "cycle",
    (4, (1, 2, 2, 3)): "paw",
    (5, (2, 2, 3, 3)): "diamond",
    (6, (3, 3, 3, 3)): "clique",
}


def _induced(g: Graph, h: SubgraphState) -> list[tuple[int, int]]:
    return [(a, b) for a, b in combinations(h, 2) if g.has_edge(a, b)]


def _checked(g: Graph, h, k: int) -> SubgraphState:
    if len(h) != k:
        raise GraphError(f"expected a {k}-node state, got {len(h)} nodes")
    return tuple(validate_state(g, h).tolist())


def classify_motif_k3(sg: SignedGraph, h) -> tuple[str, bool]:
    """``(shape, balanced)`` for a 3-node state; ``balanced`` is False for open triplets."""
    h = _checked(sg.graph, h, 3)
    edges = _induced(sg.graph, h)
    if len(edges) == 2:
        return "open_triplet", False
    neg = sum(sg.edge_sign(a, b) < 0 for a, b in edges)
    return "triangle", neg % 2 == 0


def motif_type_k4(g: Graph, h) -> str:
    """Isomorphism type of a connected 4-node induced subgraph."""
    h = _checked(g, h, 4)
    edges = _induced(g, h)
    deg = Counter(x for e in edges for x in e)
    return K4_TYPES[(len(edges), tuple(sorted(deg[x] for x in h)))]


def classify_motif_k4(g: Graph, h) -> str:
    t = motif_type_k4(g, h)
    return "line_shaped" if t == "path" else "clique" if t == "clique" else "other"


@dataclass
class MotifTally:
    k: int
    counts: dict[str, int] = field(default_factory=dict)
    types: dict[str, int] = field(default_factory=dict)  # k=4: full isomorphism types

    @property
    def total(self) -> int:
        if self.k == 3:
            return self.counts.get("open_triplet", 0) + self.counts.get("triangle", 0)
        return sum(self.counts.values())

    def ratios(self) -> dict[str, float]:
        t = max(self.total, 1)
        return {c: self.counts.get(c, 0) / t for c in (K3_CLASSES if self.k == 3 else K4_CLASSES)}

    def merge(self, other: "MotifTally") -> "MotifTally":
        c, t = Counter(self.counts), Counter(self.types)
        c.update(other.counts)
        t.update(other.types)
        return MotifTally(self.k, dict(c), dict(t))


def tally_motifs(states: Iterable[SubgraphState], k: int, g: Graph | None = None,
                 sg: SignedGraph | None = None) -> MotifTally:
    counts: Counter = Counter()
    types: Counter = Counter()
    for h in states:
        if k == 3:
            if sg is None:
                raise ValueError("k=3 motifs need a signed graph")
            shape, bal = classify_motif_k3(sg, h)
            counts[shape] += 1
            if bal:
                counts["balanced_triangle"] += 1
        elif k == 4:
            t = motif_type_k4(g if g is not None else sg.graph, h)
            types[t] += 1
            counts["line_shaped" if t == "path" else "clique" if t == "clique" else "other"] += 1
        else:
            raise ValueError("motif classes are defined for k = 3 and k = 4")
    return MotifTally(k, dict(counts), dict(types))


@dataclass
class MotifPoint:
    steps: int
    tally: MotifTally


def motif_frequency_experiment(g: Graph, k: int, sampler: str, cfg: SamplerConfig,
                               num_samples: int, step_schedule_: Iterable[int],
                               sg: SignedGraph | None = None) -> list[MotifPoint]:
    """Motif tallies of ``num_samples`` draws for each chain length in the schedule.

    Every chain of the sampler runs exactly ``steps`` steps at each point.
    """
    out = []
    levels = _chain_levels(sampler, k)
    for s in step_schedule_:
        steps = np.zeros(k + 2, dtype=np.int64)
        steps[levels] = int(s)
        batch = Sampler(g, k, sampler, cfg, steps=steps).sample(num_samples)
        out.append(MotifPoint(int(s), tally_motifs(batch.states(), k, g, sg)))
    return out


def enumerate_motif_ratios(g: Graph, k: int, sg: SignedGraph | None = None) -> dict[str, float]:
    """Exact class ratios over all connected k-subgraphs (the uniform-sampling target)."""
    from .states import connected_subsets
    return tally_motifs(connected_subsets(g, k), k, g, sg).ratios()


def sweep_csv(points: Sequence[SweepPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ratio", "loss_mean", "loss_std", "runs"])
    for p in points:
        w.writerow([repr(p.ratio), repr(p.loss_mean), repr(p.loss_std), p.runs])
    return buf.getvalue()
