"""Non-recursive table kernels for the RSS family.

numba pays a steep price for recursive calls, so for the table backend each
level gets its own compiled function that calls the level below by name. The
random draws and counters follow the lazy kernels in ``_kernels`` exactly, so
both backends return identical samples for identical seeds.
"""

from functools import lru_cache

import numpy as np
from numba import njit

from ._kernels import DEGPROP, RSS, RSS_PLUS, _weighted_edge


@njit
def _unif2(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats):
    stats[2, 0] += 1
    return int(np.random.random() * len(esrc))


@njit
def _dp2(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats):
    stats[2, 0] += 1
    return _weighted_edge(ecum)


def _make_unif(j, sub):
    @njit
    def unif(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats):
        stats[j, 0] += 1
        for _ in range(cap):
            stats[j, 2] += 1
            v = sub(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats)
            d = deg[s_off[j - 1] + v]
            if d == 0:
                raise ValueError("drew a state without neighbours; is the graph connected?")
            r = int(np.random.random() * d)
            h = uni[ptr[p_off[j - 1] + v] + r]
            m = rem[s_off[j] + h]
            if np.random.random() < 2.0 / (m * (m - 1)):
                return h
            stats[j, 3] += 1
        raise ValueError("rejection cap exceeded")
    return unif


def _make_dp(j, unif):
    @njit
    def dp(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats):
        stats[j, 0] += 1
        nsteps = steps[j]
        vc = unif(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats)
        dc = deg[s_off[j] + vc]
        for _ in range(nsteps):
            if np.random.random() < 0.5:
                stats[j, 4] += 1
                vn = unif(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats)
                dn = deg[s_off[j] + vn]
                if dc == 0 or np.random.random() < dn / dc:
                    vc = vn
                    dc = dn
        stats[j, 1] += nsteps
        return vc
    return dp


def _make_dpp(j, sub):
    @njit
    def lift(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats):
        v = sub(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats)
        d = deg[s_off[j - 1] + v]
        if d == 0:
            raise ValueError("drew a state without neighbours; is the graph connected?")
        r = int(np.random.random() * d)
        return uni[ptr[p_off[j - 1] + v] + r]

    @njit
    def dpp(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats):
        stats[j, 0] += 1
        nsteps = steps[j]
        hc = lift(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats)
        dc = deg[s_off[j] + hc]
        mc = rem[s_off[j] + hc]
        fc = dc * 2.0 / (mc * (mc - 1))
        for _ in range(nsteps):
            if np.random.random() < 0.5:
                continue
            stats[j, 4] += 1
            hn = lift(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats)
            dn = deg[s_off[j] + hn]
            mn = rem[s_off[j] + hn]
            fn = dn * 2.0 / (mn * (mn - 1))
            if fc == 0 or np.random.random() < fn / fc:
                hc = hn
                fc = fn
        stats[j, 1] += nsteps
        return hc
    return dpp


def _make_batch(top):
    @njit
    def batch(nsamp, k, esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, out, rec,
              totals):
        stats = np.zeros((k + 1, 5), dtype=np.int64)
        for i in range(nsamp):
            stats[:, :] = 0
            out[i] = top(esrc, ecum, steps, cap, s_off, p_off, deg, rem, ptr, nbr, uni, stats)
            rec[i, 0] = stats[:, 1].sum()
            rec[i, 1] = stats[:, 3].sum()
            totals += stats
    return batch


@lru_cache(maxsize=None)
def _level(kind: str, j: int):
    if j == 2:
        return _unif2 if kind in ("unif", "unif+") else _dp2
    if kind == "unif":
        return _make_unif(j, _level("dp", j - 1))
    if kind == "unif+":
        return _make_unif(j, _level("dp+", j - 1))
    if kind == "dp":
        return _make_dp(j, _level("unif", j))
    return _make_dpp(j, _level("dp+", j - 1))


_TOP = {RSS: "unif", RSS_PLUS: "unif+", DEGPROP: "dp"}


@lru_cache(maxsize=None)
def table_rss_batch(method: int, k: int):
    """Compiled batch sampler for one RSS-family method and subgraph size."""
    return _make_batch(_level(_TOP.get(method, "dp+"), k))
