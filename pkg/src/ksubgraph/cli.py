"""Batch command line: ``ksub <subcommand> [options]``.

Every output starts with a header line holding the resolved run manifest
(``# manifest {...}`` for CSV, a ``{"manifest": ...}`` line or key for JSON), so
``ksub replay FILE`` can regenerate the file. Exit codes: 0 success, 1 usage
error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import secrets
import sys
from pathlib import Path

from . import __version__
from .bounds import BoundInputs, all_bounds
from .datasets import SignedGraph, generate_ba, karate, load_signed_snap
from .evaluation import (bench_sampling_time, motif_frequency_experiment, step_ratio_sweep,
                         summarize, tally_motifs, uniformity_experiment)
from .graph import Graph, GraphError, diameter, is_connected, load_edge_list, max_degree
from .samplers import METHODS, Sampler, SamplerConfig
from .states import DEFAULT_STATE_CAP, StateTables, enumerate_states

log = logging.getLogger("ksubgraph")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


# ------------------------------------------------------------------ graphs

def load_graph(spec: str) -> tuple[Graph, SignedGraph | None]:
    """Resolve a dataset spec.

    ``karate``, ``ba:N:M[:SEED]`` (graph seed defaults to 0), ``file:PATH`` (edge
    list), ``signed:PATH`` (SOURCE,TARGET,RATING,TIME csv), and the small test
    graphs ``path:N``, ``complete:N``, ``star:LEAVES``.
    """
    kind, _, rest = spec.partition(":")
    if kind == "karate" and not rest:
        return karate(), None
    if kind == "ba":
        parts = rest.split(":")
        if len(parts) not in (2, 3):
            raise UsageError(f"bad graph spec {spec!r}; expected ba:N:M[:SEED]")
        try:
            n, m, *s = map(int, parts)
        except ValueError:
            raise UsageError(f"bad graph spec {spec!r}; N, M and SEED must be integers") from None
        return generate_ba(n, m, s[0] if s else 0), None
    if kind == "file" and rest:
        return load_edge_list(Path(rest).read_text()), None
    if kind == "signed" and rest:
        sg = load_signed_snap(Path(rest).read_text())
        return sg.graph, sg
    if kind in ("path", "complete", "star"):
        try:
            n = int(rest)
        except ValueError:
            raise UsageError(f"bad graph spec {spec!r}") from None
        if n < 1:
            raise UsageError(f"bad graph spec {spec!r}")
        if kind == "path":
            return Graph.from_edges([(i, i + 1) for i in range(n - 1)], n=n), None
        if kind == "complete":
            return Graph.from_edges([(i, j) for i in range(n) for j in range(i + 1, n)], n=n), None
        return Graph.from_edges([(0, i) for i in range(1, n + 1)], n=n + 1), None
    raise UsageError(f"unknown graph spec {spec!r}; use karate, ba:N:M, file:PATH or signed:PATH")


# ------------------------------------------------------------------ output

class Output:
    """Collects one output document and writes it to ``--out`` or stdout."""

    def __init__(self, manifest: dict, fmt: str, dest: str | None = None):
        self.manifest = manifest
        self.fmt = fmt
        self.dest = dest
        self.buf = io.StringIO()
        head = json.dumps(manifest, sort_keys=True)
        if fmt == "csv":
            self.buf.write(f"# manifest {head}\n")
            self.csv = csv.writer(self.buf, lineterminator="\n")
        else:
            self.buf.write(json.dumps({"manifest": manifest}, sort_keys=True) + "\n")

    def row(self, values):
        self.csv.writerow(values)

    def record(self, obj):
        self.buf.write(json.dumps(obj, sort_keys=True) + "\n")

    def close(self):
        text = self.buf.getvalue()
        if self.dest:
            Path(self.dest).write_text(text)
        else:
            sys.stdout.write(text)


def read_manifest(path: str) -> dict:
    first = Path(path).read_text().split("\n", 1)[0]
    if first.startswith("# manifest "):
        return json.loads(first[len("# manifest "):])
    try:
        return json.loads(first)["manifest"]
    except (ValueError, KeyError, TypeError):
        raise UsageError(f"{path} does not start with a manifest header") from None


# ------------------------------------------------------------------ commands

def _config(a) -> SamplerConfig:
    try:
        return SamplerConfig(epsilon=a.eps, seed=a.seed, step_ratio=a.step_ratio,
                             step_cap=a.step_cap, diameter=a.diameter,
                             psrw_redraw_steps=a.psrw_redraw_steps)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _check_k(g: Graph, k: int, method: str):
    if not 2 <= k < g.n:
        raise UsageError(f"--k must satisfy 2 <= k < |V| = {g.n}")
    if method == "psrw" and k < 3:
        raise UsageError("psrw needs --k >= 3")
    if not is_connected(g):
        log.warning("graph is disconnected; the bounds assume a connected graph")


def cmd_sample(a, manifest) -> None:
    cfg = _config(a)
    g, _ = load_graph(a.graph)
    _check_k(g, a.k, a.method)
    tables = StateTables(g, a.k, a.cap) if a.cache_states else None
    batch = Sampler(g, a.k, a.method, cfg, tables).sample(a.n, timing=not a.no_timing)
    labels = g.labels
    out = Output(manifest, a.format, a.dest)
    if a.format == "csv":
        out.row(["nodes", "steps", "rejections", "wall_ns"])
    for r in batch.records():
        r["nodes"] = labels[r["nodes"]].tolist()
        if a.format == "csv":
            out.row([" ".join(map(str, r["nodes"])), r["steps"], r["rejections"], r["wall_ns"]])
        else:
            out.record(r)
    out.close()


def cmd_enumerate(a, manifest) -> None:
    g, _ = load_graph(a.graph)
    if not 1 <= a.k < g.n:
        raise UsageError(f"--k must satisfy 1 <= k < |V| = {g.n}")
    sg = enumerate_states(g, a.k, a.cap)
    try:
        diam = sg.diameter()
    except GraphError:
        diam = None
    print(f"states {sg.num_states}\nedges {sg.num_edges}\ndiameter "
          f"{diam if diam is not None else 'inf'}", file=sys.stdout if a.dest else sys.stderr)
    out = Output(manifest, "json", a.dest)
    out.record({"k": sg.k, "states": [list(s) for s in sg.states],
                "edges": [list(e) for e in sg.edges()], "num_states": sg.num_states,
                "num_edges": sg.num_edges, "diameter": diam})
    out.close()


def cmd_uniformity(a, manifest) -> None:
    cfg = _config(a)
    g, _ = load_graph(a.graph)
    _check_k(g, a.k, a.method)
    tables = StateTables(g, a.k, a.cap)
    out = Output(manifest, a.format, a.dest)
    if a.ratios:
        pts = step_ratio_sweep(g, a.k, a.method, cfg, a.ratios, a.runs, a.samples_per_state,
                               tables, a.jobs)
        if a.format == "csv":
            out.row(["ratio", "loss_mean", "loss_std", "runs"])
        for p in pts:
            if a.format == "csv":
                out.row([repr(p.ratio), repr(p.loss_mean), repr(p.loss_std), p.runs])
            else:
                out.record({"ratio": p.ratio, "loss_mean": p.loss_mean, "loss_std": p.loss_std,
                            "runs": p.runs})
        out.close()
        return
    reps = uniformity_experiment(g, a.k, a.method, cfg, a.runs, a.samples_per_state, tables,
                                 a.jobs)
    mean, std = summarize(reps)
    if a.format == "csv":
        if a.per_state:
            out.row(["run", "state", "count"])
            for i, r in enumerate(reps):
                for s, c in r.csv_rows():
                    out.row([i, s, c])
        else:
            out.row(["run", "seed", "loss", "total", "num_states"])
            for i, r in enumerate(reps):
                out.row([i, r.seed, repr(r.loss), r.total, r.num_states])
    else:
        for i, r in enumerate(reps):
            rec = {"run": i, "seed": r.seed, "loss": r.loss, "total": r.total,
                   "num_states": r.num_states}
            if a.per_state:
                rec["counts"] = r.to_dict()["counts"]
            out.record(rec)
        out.record({"summary": {"loss_mean": mean, "loss_std": std, "runs": len(reps)}})
    print(f"loss {mean:.5f} +- {std:.5f} over {len(reps)} runs", file=sys.stderr)
    out.close()


def cmd_bench(a, manifest) -> None:
    cfg = _config(a)
    g, _ = load_graph(a.graph)
    methods = a.method.split(",")
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}")
        _check_k(g, a.k, m)
    delta = max_degree(g)
    diam = a.diameter if a.diameter is not None else (
        diameter(g) if any(m in ("mcmc", "psrw") for m in methods) else None)
    out = Output(manifest, a.format, a.dest)
    cols = ["sampler", "k", "n", "delta", "per_sample_ns", "estimated", "ops_full",
            "ops_measured", "ns_per_op", "reps", "measure_cap"]
    if a.format == "csv":
        out.row(cols)
    for m in methods:
        r = bench_sampling_time(g, a.k, m, cfg, a.reps, a.measure_steps, delta, diam)
        vals = [r.sampler, r.k, r.n, r.delta, r.per_sample_ns, r.estimated, r.ops_full,
                r.ops_measured, r.ns_per_op, r.reps, r.measure_cap]
        if a.format == "csv":
            out.row(vals)
        else:
            out.record(dict(zip(cols, vals)))
    out.close()


def cmd_motifs(a, manifest) -> None:
    cfg = _config(a)
    g, sg = load_graph(a.graph)
    if a.k not in (3, 4):
        raise UsageError("motifs are defined for --k 3 and --k 4")
    if a.k == 3 and sg is None:
        raise UsageError("--k 3 motifs need a signed graph (--graph signed:PATH)")
    _check_k(g, a.k, a.method)
    out = Output(manifest, a.format, a.dest)
    if a.steps:
        pts = motif_frequency_experiment(g, a.k, a.method, cfg, a.n, a.steps, sg)
        rows = [(p.steps, p.tally) for p in pts]
    else:
        batch = Sampler(g, a.k, a.method, cfg).sample(a.n)
        rows = [(None, tally_motifs(batch.states(), a.k, g, sg))]
    if a.format == "csv":
        out.row(["steps", "class", "count", "ratio"])
    for steps, t in rows:
        ratios = t.ratios()
        items = sorted(set(t.counts) | set(ratios))
        if a.format == "csv":
            for c in items:
                out.row(["" if steps is None else steps, c, t.counts.get(c, 0),
                         repr(ratios.get(c, t.counts.get(c, 0) / max(t.total, 1)))])
            for c, n in sorted(t.types.items()):
                out.row(["" if steps is None else steps, f"type:{c}", n, repr(n / t.total)])
        else:
            out.record({"steps": steps, "total": t.total, "counts": t.counts, "ratios": ratios,
                        "types": t.types})
    if sg is not None and sg.zero_pairs:
        log.warning("%d projected pairs carry only zero ratings", len(sg.zero_pairs))
    out.close()


def cmd_bounds(a, manifest) -> None:
    if a.graph:
        g, _ = load_graph(a.graph)
        delta = a.delta if a.delta is not None else max_degree(g)
        diam = a.diam if a.diam is not None else (a.diameter or diameter(g))
        n = a.n if a.n is not None else g.n
    else:
        if None in (a.delta, a.diam, a.n):
            raise UsageError("bounds needs --graph or all of --delta, --diam, --n")
        delta, diam, n = a.delta, a.diam, a.n
    b = BoundInputs(a.k, delta, diam, n, a.eps)
    res = all_bounds(b)
    if a.format == "table":
        print(f"k={b.k} delta={b.delta} diam={b.diam} n={b.n} eps={b.epsilon}")
        for name, bd in res.items():
            print(f"{name:6s} {bd.value:>16.6g}  ln={bd.log_value:.6f}"
                  f"{'  (overflow)' if bd.overflow else ''}")
        return
    out = Output(manifest, "csv" if a.format == "csv" else "json", a.dest)
    if a.format == "csv":
        out.row(["bound", "value", "log_value", "ceil", "overflow"])
        for name, bd in res.items():
            out.row([name, repr(bd.value), repr(bd.log_value), bd.ceil, bd.overflow])
    else:
        out.record({name: {"value": bd.value, "log_value": bd.log_value, "ceil": bd.ceil,
                           "overflow": bd.overflow} for name, bd in res.items()})
    out.close()


COMMANDS = {"sample": cmd_sample, "enumerate": cmd_enumerate, "uniformity": cmd_uniformity,
            "bench": cmd_bench, "motifs": cmd_motifs, "bounds": cmd_bounds}


# ------------------------------------------------------------------ parser

def _ratio_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ksub", description="Uniform sampling of connected k-node induced subgraphs.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, method=True, default_method="rss+", formats=("json", "csv")):
        sp.add_argument("--graph", default="karate",
                        help="karate | ba:N:M[:SEED] | file:PATH | signed:PATH | path:N | "
                             "complete:N | star:LEAVES")
        sp.add_argument("--k", type=int, default=3)
        if method:
            sp.add_argument("--method", default=default_method,
                            help=f"one of {', '.join(METHODS)}")
            sp.add_argument("--eps", type=float, default=0.05)
            sp.add_argument("--seed", type=int, default=None,
                            help="master seed; drawn at random and recorded when omitted")
            sp.add_argument("--step-ratio", type=float, default=1.0)
            sp.add_argument("--step-cap", type=int, default=None)
            sp.add_argument("--diameter", type=int, default=None,
                            help="diameter override (any value >= the true diameter)")
            sp.add_argument("--psrw-redraw-steps", type=int, default=None,
                            help="walk steps after a rejected lift (default: full chain)")
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=formats, default=formats[0])

    s = sub.add_parser("sample", help="draw samples as JSON lines or CSV")
    common(s)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--cache-states", action="store_true",
                   help="materialize the state graphs up to k in memory (small graphs only)")
    s.add_argument("--cap", type=int, default=DEFAULT_STATE_CAP)
    s.add_argument("--no-timing", action="store_true",
                   help="write wall_ns=0 so that output is byte-identical across runs")

    s = sub.add_parser("enumerate", help="materialize the k-state graph")
    common(s, method=False, formats=("json",))
    s.add_argument("--cap", type=int, default=DEFAULT_STATE_CAP)

    s = sub.add_parser("uniformity", help="loss against the uniform distribution")
    common(s, default_method="rss")
    s.add_argument("--runs", type=int, default=10)
    s.add_argument("--samples-per-state", type=int, default=1000)
    s.add_argument("--ratios", type=_ratio_list, default=None,
                   help="comma-separated step ratios: run a sweep instead")
    s.add_argument("--per-state", action="store_true", help="emit per-state tallies")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--cap", type=int, default=DEFAULT_STATE_CAP)

    s = sub.add_parser("bench", help="time per sample, measured or estimated")
    common(s, default_method="mcmc,psrw,rss,rss+")
    s.add_argument("--reps", type=int, default=10)
    s.add_argument("--measure-steps", type=int, default=100)

    s = sub.add_parser("motifs", help="motif class ratios of sampled subgraphs")
    common(s)
    s.add_argument("--n", type=int, default=10000)
    s.add_argument("--steps", type=_int_list, default=None,
                   help="comma-separated chain lengths: tally at each instead of the bound")

    s = sub.add_parser("bounds", help="mixing-time bounds")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--delta", type=int, default=None)
    s.add_argument("--diam", type=int, default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--graph", default=None, help="derive delta, diam and n from a dataset")
    s.add_argument("--diameter", type=int, default=None, help=argparse.SUPPRESS)
    s.add_argument("--out", default=None)
    s.add_argument("--format", choices=("json", "csv", "table"), default="json")

    s = sub.add_parser("replay", help="regenerate an output file from its manifest header")
    s.add_argument("file")
    s.add_argument("--out", default=None, help="write here instead of the recorded path")
    return p


_NOT_ECHOED = {"verbose", "dest"}


def _validate(a):
    if getattr(a, "method", None) is not None and a.command != "bench" and a.method not in METHODS:
        raise UsageError(f"unknown method {a.method!r}; choose from {', '.join(METHODS)}")
    for name in ("n", "runs", "reps", "jobs", "samples_per_state", "measure_steps", "cap"):
        v = getattr(a, name, None)
        if v is not None and v < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be >= 1")
    if getattr(a, "ratios", None):
        if any(not 0 <= r <= 1 for r in a.ratios):
            raise UsageError("--ratios must lie in [0, 1]")
    if getattr(a, "steps", None):
        if any(s < 0 for s in a.steps):
            raise UsageError("--steps must be nonnegative")
    if hasattr(a, "step_ratio"):
        _config(a)


def _run(argv) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if a.command == "replay":
        m = read_manifest(a.file)
        if m.get("command") not in COMMANDS:
            raise UsageError(f"{a.file}: manifest names no known subcommand")
        dest = a.out if a.out is not None else m.get("out")
        a = argparse.Namespace(verbose=False, dest=dest, **m)
    else:
        a.dest = a.out
        if hasattr(a, "seed") and a.seed is None:
            a.seed = secrets.randbits(32)
        a.version = __version__
    _validate(a)
    manifest = {k: v for k, v in sorted(vars(a).items()) if k not in _NOT_ECHOED}
    COMMANDS[a.command](a, manifest)
    return 0


def main(argv=None) -> int:
    try:
        return _run(argv)
    except SystemExit as e:  # argparse: usage errors, --help, --version
        return e.code if isinstance(e.code, int) else 1
    except UsageError as e:
        print(f"ksub: error: {e}", file=sys.stderr)
        return 1
    except (GraphError, ValueError, OSError, RuntimeError) as e:
        print(f"ksub: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
