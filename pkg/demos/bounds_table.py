#!/usr/bin/env python3
"""Mixing-time bounds of the four samplers as the graph grows.

The MCMC and PSRW bounds grow with the number of nodes, while the recursive
samplers only depend on the maximum degree. Columns are log10 of the number
of steps each bound asks for.
"""

import math

from ksubgraph import BoundInputs, all_bounds

if __name__ == "__main__":
    print(f"{'k':>2} {'delta':>6} {'n':>9}  " + "  ".join(f"{m:>6}" for m in
                                                      ("mcmc", "psrw", "rss", "rss+")))
    for k in (3, 4, 6):
        for delta, n in ((10, 100), (100, 10_000), (1000, 1_000_000)):
            b = all_bounds(BoundInputs(k, delta, diam=6, n=n))
            row = "  ".join(f"{b[m].log_value / math.log(10):6.1f}"
                            for m in ("mcmc", "psrw", "rss", "rss+"))
            print(f"{k:>2} {delta:>6} {n:>9}  {row}")
