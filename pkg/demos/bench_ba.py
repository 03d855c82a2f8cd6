#!/usr/bin/env python3
"""Time per sample on Barabasi-Albert graphs.

Full-length chains at these sizes would take hours or years per sample, so the
benchmark times a capped run and extrapolates with the predicted number of
chain steps (``estimated`` is True in that case).
"""

from ksubgraph import SamplerConfig, generate_ba
from ksubgraph.evaluation import bench_sampling_time

if __name__ == "__main__":
    cfg = SamplerConfig(seed=3)
    for n in (100, 1000, 10_000):
        g = generate_ba(n, 2, seed=0)
        for k in (3, 4):
            cells = []
            for m in ("mcmc", "psrw", "rss", "rss+"):
                r = bench_sampling_time(g, k, m, cfg, reps=20)
                cells.append(f"{m} {r.per_sample_ns / 1e9:9.2e}s{'*' if r.estimated else ' '}")
            print(f"n={n:<6} k={k}  " + "  ".join(cells))
    print("* extrapolated from a capped run")
