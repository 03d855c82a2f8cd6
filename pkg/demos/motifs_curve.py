#!/usr/bin/env python3
"""Motif ratios of 4-node subgraphs as the chains get longer.

With zero-length chains RSS+ degenerates into a biased edge-growing sampler.
A few dozen steps per level already bring the line-shaped share close to the
exact value from full enumeration.
"""

from ksubgraph import SamplerConfig, generate_ba
from ksubgraph.evaluation import enumerate_motif_ratios, motif_frequency_experiment

if __name__ == "__main__":
    g = generate_ba(300, 2, seed=0)
    exact = enumerate_motif_ratios(g, 4)
    print("exact     " + "  ".join(f"{c} {v:.3f}" for c, v in exact.items()))
    pts = motif_frequency_experiment(g, 4, "rss+", SamplerConfig(seed=5), 20_000, [0, 3, 10, 30])
    for p in pts:
        r = p.tally.ratios()
        print(f"steps={p.steps:<3} " + "  ".join(f"{c} {v:.3f}" for c, v in r.items()))
