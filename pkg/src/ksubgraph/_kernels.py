"""Numba kernels shared by the samplers.

Two backends run the same algorithms:

* lazy: states are sorted node arrays; neighbours, degrees and removable counts
  are computed on demand from the host graph's CSR arrays.
* table: states are row indices into materialized state graphs (one per
  level 2..k), so every query is an array lookup.

Both backends enumerate a state's neighbours in the same canonical order
(position of the dropped node ascending, then added node ascending) and draw
random numbers in the same sequence, so for identical seeds they return
identical samples.

Functions on the recursive call path are compiled without ``cache=True``:
reloading cached recursive numba functions crashes the interpreter. The table
backend of the RSS family avoids recursion altogether (see ``_levels``).

Per-level counters are kept in ``stats[level, :]``:
``[calls, chain_steps, attempts, rejections, proposals]``; proposals are the
non-lazy chain steps.
"""

import numpy as np
from numba import njit

MCMC, PSRW, RSS, RSS_PLUS, DEGPROP, DEGPROP_PLUS = 0, 1, 2, 3, 4, 5

# recursion kinds
_UNIF, _UNIF_P, _DP, _DPP = 0, 1, 2, 3


@njit(cache=True)
def seed(s):
    np.random.seed(s)


@njit(cache=True)
def _has_edge(indptr, indices, a, b):
    lo = indptr[a]
    hi = indptr[a + 1]
    while lo < hi:
        mid = (lo + hi) >> 1
        x = indices[mid]
        if x < b:
            lo = mid + 1
        elif x > b:
            hi = mid
        else:
            return True
    return False


@njit(cache=True)
def _rank(indptr, indices, a, b):
    # number of neighbours of a smaller than b
    lo = indptr[a]
    hi = indptr[a + 1]
    while lo < hi:
        mid = (lo + hi) >> 1
        if indices[mid] < b:
            lo = mid + 1
        else:
            hi = mid
    return lo - indptr[a]


@njit(cache=True)
def _local_adj(indptr, indices, h, k):
    adjm = np.zeros(k, dtype=np.int64)
    one = np.int64(1)
    for i in range(k):
        for j in range(i + 1, k):
            if _has_edge(indptr, indices, h[i], h[j]):
                adjm[i] |= one << j
                adjm[j] |= one << i
    return adjm


@njit(cache=True)
def _component(adjm, k, mask, start):
    comp = np.int64(1) << start
    changed = True
    while changed:
        changed = False
        for i in range(k):
            if (comp >> i) & 1:
                nxt = comp | (adjm[i] & mask)
                if nxt != comp:
                    comp = nxt
                    changed = True
    return comp


@njit(cache=True)
def _lowest_bit(x):
    i = 0
    while not (x >> i) & 1:
        i += 1
    return i


@njit(cache=True)
def connected(indptr, indices, h, k):
    if k <= 1:
        return True
    adjm = _local_adj(indptr, indices, h, k)
    full = (np.int64(1) << k) - 1
    return _component(adjm, k, full, 0) == full


@njit(cache=True)
def removable(indptr, indices, h, k):
    """Number of positions whose removal leaves ``h`` connected."""
    adjm = _local_adj(indptr, indices, h, k)
    full = (np.int64(1) << k) - 1
    cnt = 0
    for u in range(k):
        mask = full & ~(np.int64(1) << u)
        if mask == 0:
            continue
        if _component(adjm, k, mask, _lowest_bit(mask)) == mask:
            cnt += 1
    return cnt


@njit(cache=True)
def neighbors(indptr, indices, h, k, ws, ctr, out_pos, out_w, want):
    """Count (and optionally list) the state-graph neighbours of ``h``.

    A neighbour drops ``h[u]`` and adds ``w``; ``w`` qualifies when it touches
    every component of ``h`` minus ``h[u]``. ``ws`` rows are stamp arrays over
    host nodes: in-state mark, per-component seen mark, hit epoch, hit count.
    """
    adjm = _local_adj(indptr, indices, h, k)
    comps = np.empty(k, dtype=np.int64)
    ctr[0] += 1
    in_stamp = ctr[0]
    for x in range(k):
        ws[0, h[x]] = in_stamp
    full = (np.int64(1) << k) - 1
    count = 0
    for u in range(k):
        mask = full & ~(np.int64(1) << u)
        ncomp = 0
        rest = mask
        while rest:
            c = _component(adjm, k, mask, _lowest_bit(rest))
            comps[ncomp] = c
            ncomp += 1
            rest &= ~c
        ctr[0] += 1
        epoch = ctr[0]
        gstart = count
        for ci in range(ncomp):
            ctr[0] += 1
            stamp = ctr[0]
            c = comps[ci]
            for x in range(k):
                if not (c >> x) & 1:
                    continue
                a = h[x]
                for p in range(indptr[a], indptr[a + 1]):
                    w = indices[p]
                    if ws[0, w] == in_stamp or ws[1, w] == stamp:
                        continue
                    ws[1, w] = stamp
                    if ws[2, w] != epoch:
                        ws[2, w] = epoch
                        ws[3, w] = 0
                    ws[3, w] += 1
                    if ws[3, w] == ncomp:
                        if want:
                            out_pos[count] = u
                            out_w[count] = w
                        count += 1
        if want and count - gstart > 1:
            out_w[gstart:count].sort()
    return count


@njit(cache=True)
def state_degree(indptr, indices, h, k, ws, ctr, out_pos, out_w):
    if k == 2:
        a = h[0]
        b = h[1]
        return (indptr[a + 1] - indptr[a]) + (indptr[b + 1] - indptr[b]) - 2
    return neighbors(indptr, indices, h, k, ws, ctr, out_pos, out_w, False)


@njit(cache=True)
def _nth_neighbor(indptr, indices, h, k, r, listed, ws, ctr, out_pos, out_w):
    """(dropped position, added node) of the r-th neighbour in canonical order."""
    if k == 2:
        a = h[0]
        b = h[1]
        db = indptr[b + 1] - indptr[b]
        if r < db - 1:
            pa = _rank(indptr, indices, b, a)
            return 0, indices[indptr[b] + (r if r < pa else r + 1)]
        r -= db - 1
        pb = _rank(indptr, indices, a, b)
        return 1, indices[indptr[a] + (r if r < pb else r + 1)]
    if not listed:
        neighbors(indptr, indices, h, k, ws, ctr, out_pos, out_w, True)
    return out_pos[r], out_w[r]


@njit(cache=True)
def _swap(h, k, pos, w):
    out = np.empty(k, dtype=np.int64)
    j = 0
    placed = False
    for i in range(k):
        if i == pos:
            continue
        if not placed and w < h[i]:
            out[j] = w
            j += 1
            placed = True
        out[j] = h[i]
        j += 1
    if not placed:
        out[j] = w
    return out


@njit(cache=True)
def _insert(h, k, w):
    out = np.empty(k + 1, dtype=np.int64)
    j = 0
    placed = False
    for i in range(k):
        if not placed and w < h[i]:
            out[j] = w
            j += 1
            placed = True
        out[j] = h[i]
        j += 1
    if not placed:
        out[j] = w
    return out


@njit(cache=True)
def _weighted_edge(ecum):
    x = np.random.random() * ecum[-1]
    lo = 0
    hi = len(ecum)
    while lo < hi:
        mid = (lo + hi) >> 1
        if ecum[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True)
def start_state(k, indptr, indices, esrc, edst):
    """Greedy BFS expansion from a uniformly drawn edge until k nodes."""
    e = int(np.random.random() * len(esrc))
    nodes = np.empty(k, dtype=np.int64)
    nodes[0] = esrc[e]
    nodes[1] = edst[e]
    cnt = 2
    head = 0
    while cnt < k and head < cnt:
        x = nodes[head]
        head += 1
        for p in range(indptr[x], indptr[x + 1]):
            w = indices[p]
            dup = False
            for i in range(cnt):
                if nodes[i] == w:
                    dup = True
                    break
            if not dup:
                nodes[cnt] = w
                cnt += 1
                if cnt == k:
                    break
    if cnt < k:
        raise ValueError("start edge lies in a component with fewer than k nodes")
    nodes.sort()
    return nodes


# ---------------------------------------------------------------- lazy backend


@njit(cache=True)
def _check(indptr, indices, h, k):
    if len(h) != k or not connected(indptr, indices, h, k):
        raise AssertionError("chain left the state space")


@njit
def _lazy_draw(kind, j, indptr, indices, esrc, edst, ecum, steps, cap, ws, ctr,
               out_pos, out_w, stats, dbg):
    if j == 2:
        stats[2, 0] += 1
        if kind == _UNIF or kind == _UNIF_P:
            e = int(np.random.random() * len(esrc))
        else:
            e = _weighted_edge(ecum)
        h = np.empty(2, dtype=np.int64)
        h[0] = esrc[e]
        h[1] = edst[e]
        return h

    if kind == _UNIF or kind == _UNIF_P:
        sub = _DP if kind == _UNIF else _DPP
        stats[j, 0] += 1
        for _ in range(cap):
            stats[j, 2] += 1
            v = _lazy_draw(sub, j - 1, indptr, indices, esrc, edst, ecum, steps, cap, ws, ctr,
                           out_pos, out_w, stats, dbg)
            d = state_degree(indptr, indices, v, j - 1, ws, ctr, out_pos, out_w)
            if d == 0:
                raise ValueError("drew a state without neighbours; is the graph connected?")
            r = int(np.random.random() * d)
            pos, w = _nth_neighbor(indptr, indices, v, j - 1, r, False, ws, ctr, out_pos, out_w)
            h = _insert(v, j - 1, w)
            m = removable(indptr, indices, h, j)
            if np.random.random() < 2.0 / (m * (m - 1)):
                if dbg:
                    _check(indptr, indices, h, j)
                return h
            stats[j, 3] += 1
        raise ValueError("rejection cap exceeded")

    stats[j, 0] += 1
    nsteps = steps[j]
    if kind == _DP:
        vc = _lazy_draw(_UNIF, j, indptr, indices, esrc, edst, ecum, steps, cap, ws, ctr,
                        out_pos, out_w, stats, dbg)
        dc = state_degree(indptr, indices, vc, j, ws, ctr, out_pos, out_w)
        for _ in range(nsteps):
            if np.random.random() < 0.5:
                stats[j, 4] += 1
                vn = _lazy_draw(_UNIF, j, indptr, indices, esrc, edst, ecum, steps, cap, ws, ctr,
                                out_pos, out_w, stats, dbg)
                dn = state_degree(indptr, indices, vn, j, ws, ctr, out_pos, out_w)
                if dc == 0 or np.random.random() < dn / dc:
                    vc = vn
                    dc = dn
        stats[j, 1] += nsteps
        return vc

    # _DPP
    v = _lazy_draw(_DPP, j - 1, indptr, indices, esrc, edst, ecum, steps, cap, ws, ctr,
                   out_pos, out_w, stats, dbg)
    d = state_degree(indptr, indices, v, j - 1, ws, ctr, out_pos, out_w)
    if d == 0:
        raise ValueError("drew a state without neighbours; is the graph connected?")
    r = int(np.random.random() * d)
    pos, w = _nth_neighbor(indptr, indices, v, j - 1, r, False, ws, ctr, out_pos, out_w)
    hc = _insert(v, j - 1, w)
    dc = state_degree(indptr, indices, hc, j, ws, ctr, out_pos, out_w)
    mc = removable(indptr, indices, hc, j)
    fc = dc * 2.0 / (mc * (mc - 1))
    for _ in range(nsteps):
        if np.random.random() < 0.5:
            continue
        stats[j, 4] += 1
        v = _lazy_draw(_DPP, j - 1, indptr, indices, esrc, edst, ecum, steps, cap, ws, ctr,
                       out_pos, out_w, stats, dbg)
        d = state_degree(indptr, indices, v, j - 1, ws, ctr, out_pos, out_w)
        if d == 0:
            raise ValueError("drew a state without neighbours; is the graph connected?")
        r = int(np.random.random() * d)
        pos, w = _nth_neighbor(indptr, indices, v, j - 1, r, False, ws, ctr, out_pos, out_w)
        hn = _insert(v, j - 1, w)
        dn = state_degree(indptr, indices, hn, j, ws, ctr, out_pos, out_w)
        mn = removable(indptr, indices, hn, j)
        fn = dn * 2.0 / (mn * (mn - 1))
        if fc == 0 or np.random.random() < fn / fc:
            hc = hn
            fc = fn
    stats[j, 1] += nsteps
    return hc


@njit
def _lazy_mcmc(k, indptr, indices, esrc, edst, steps, ws, ctr, out_pos, out_w, stats, dbg):
    stats[k, 0] += 1
    vc = start_state(k, indptr, indices, esrc, edst)
    dc = state_degree(indptr, indices, vc, k, ws, ctr, out_pos, out_w)
    listed = False
    nsteps = steps[k]
    for _ in range(nsteps):
        if np.random.random() < 0.5:
            stats[k, 4] += 1
            if dc == 0:
                continue
            r = int(np.random.random() * dc)
            pos, w = _nth_neighbor(indptr, indices, vc, k, r, listed, ws, ctr, out_pos, out_w)
            listed = True
            vn = _swap(vc, k, pos, w)
            dn = state_degree(indptr, indices, vn, k, ws, ctr, out_pos, out_w)
            if np.random.random() < dc / dn:
                vc = vn
                dc = dn
                listed = False
                if dbg:
                    _check(indptr, indices, vc, k)
    stats[k, 1] += nsteps
    return vc


@njit(cache=True)
def _lazy_walk(x, kk, nsteps, indptr, indices, ws, ctr, out_pos, out_w, dbg):
    dx = state_degree(indptr, indices, x, kk, ws, ctr, out_pos, out_w)
    moves = 0
    for _ in range(nsteps):
        if np.random.random() < 0.5:
            moves += 1
            if dx == 0:
                raise ValueError("state graph has an isolated state")
            r = int(np.random.random() * dx)
            pos, w = _nth_neighbor(indptr, indices, x, kk, r, False, ws, ctr, out_pos, out_w)
            x = _swap(x, kk, pos, w)
            dx = state_degree(indptr, indices, x, kk, ws, ctr, out_pos, out_w)
            if dbg:
                _check(indptr, indices, x, kk)
    return x, dx, moves


@njit
def _lazy_psrw(k, indptr, indices, esrc, edst, steps, cap, redraw, ws, ctr, out_pos, out_w,
               stats, dbg):
    stats[k, 0] += 1
    x = start_state(k - 1, indptr, indices, esrc, edst)
    x, dx, moves = _lazy_walk(x, k - 1, steps[k], indptr, indices, ws, ctr, out_pos, out_w, dbg)
    stats[k, 1] += steps[k]
    stats[k, 4] += moves
    for _ in range(cap):
        stats[k, 2] += 1
        if dx == 0:
            raise ValueError("state graph has an isolated state")
        r = int(np.random.random() * dx)
        pos, w = _nth_neighbor(indptr, indices, x, k - 1, r, False, ws, ctr, out_pos, out_w)
        h = _insert(x, k - 1, w)
        m = removable(indptr, indices, h, k)
        if np.random.random() < 2.0 / (m * (m - 1)):
            return h
        stats[k, 3] += 1
        x, dx, moves = _lazy_walk(x, k - 1, redraw, indptr, indices, ws, ctr, out_pos, out_w, dbg)
        stats[k, 1] += redraw
        stats[k, 4] += moves
    raise ValueError("rejection cap exceeded")


@njit
def lazy_batch(method, k, nsamp, indptr, indices, esrc, edst, ecum, steps, cap, redraw,
               ws, ctr, out_pos, out_w, out, rec, totals, dbg):
    """Draw ``nsamp`` samples into ``out[i, :k]``; ``rec[i] = (steps, rejections)``."""
    stats = np.zeros((k + 1, 5), dtype=np.int64)
    for i in range(nsamp):
        stats[:, :] = 0
        if method == MCMC:
            h = _lazy_mcmc(k, indptr, indices, esrc, edst, steps, ws, ctr, out_pos, out_w,
                           stats, dbg)
        elif method == PSRW:
            h = _lazy_psrw(k, indptr, indices, esrc, edst, steps, cap, redraw, ws, ctr,
                           out_pos, out_w, stats, dbg)
        else:
            if method == RSS:
                kind = _UNIF
            elif method == RSS_PLUS:
                kind = _UNIF_P
            elif method == DEGPROP:
                kind = _DP
            else:
                kind = _DPP
            h = _lazy_draw(kind, k, indptr, indices, esrc, edst, ecum, steps, cap, ws, ctr,
                           out_pos, out_w, stats, dbg)
        out[i, :] = h
        rec[i, 0] = stats[:, 1].sum()
        rec[i, 1] = stats[:, 3].sum()
        totals += stats


# --------------------------------------------------------------- table backend
#
# Level j occupies: deg/rem[s_off[j] : s_off[j] + n_j], ptr[p_off[j] : p_off[j] + n_j + 1]
# (absolute offsets into nbr/uni), nodes[n_off[j] : n_off[j] + j * n_j] row-major.
# nbr[slot] is a level-j index; uni[slot] is the level-(j+1) index of the union.


@njit(cache=True)
def _find_row(nodes, off, stride, nrows, key):
    lo = 0
    hi = nrows
    while lo < hi:
        mid = (lo + hi) >> 1
        base = off + mid * stride
        cmp = 0
        for t in range(stride):
            a = nodes[base + t]
            if a != key[t]:
                cmp = -1 if a < key[t] else 1
                break
        if cmp == 0:
            return mid
        if cmp < 0:
            lo = mid + 1
        else:
            hi = mid
    raise ValueError("state missing from table")


@njit(cache=True)
def _table_walk(x, kk, nsteps, s_off, p_off, deg, ptr, nbr):
    moves = 0
    for _ in range(nsteps):
        if np.random.random() < 0.5:
            moves += 1
            dx = deg[s_off[kk] + x]
            if dx == 0:
                raise ValueError("state graph has an isolated state")
            r = int(np.random.random() * dx)
            x = nbr[ptr[p_off[kk] + x] + r]
    return x, moves


@njit(cache=True)
def table_batch(method, k, nsamp, indptr, indices, esrc, edst, ecum, steps, cap, redraw,
                s_off, p_off, n_off, deg, rem, ptr, nbr, uni, nodes, out, rec, totals):
    """Table-backend twin of ``lazy_batch`` for mcmc and psrw; ``out[i]`` is a level-k
    state index. The RSS family has its own per-level kernels in ``_levels``."""
    stats = np.zeros((k + 1, 5), dtype=np.int64)
    for i in range(nsamp):
        stats[:, :] = 0
        if method == MCMC:
            stats[k, 0] += 1
            start = start_state(k, indptr, indices, esrc, edst)
            vc = _find_row(nodes, n_off[k], k, s_off[k + 1] - s_off[k], start)
            dc = deg[s_off[k] + vc]
            for _ in range(steps[k]):
                if np.random.random() < 0.5:
                    stats[k, 4] += 1
                    if dc == 0:
                        continue
                    r = int(np.random.random() * dc)
                    vn = nbr[ptr[p_off[k] + vc] + r]
                    dn = deg[s_off[k] + vn]
                    if np.random.random() < dc / dn:
                        vc = vn
                        dc = dn
            stats[k, 1] += steps[k]
            h = vc
        elif method == PSRW:
            stats[k, 0] += 1
            kk = k - 1
            start = start_state(kk, indptr, indices, esrc, edst)
            x = _find_row(nodes, n_off[kk], kk, s_off[kk + 1] - s_off[kk], start)
            x, moves = _table_walk(x, kk, steps[k], s_off, p_off, deg, ptr, nbr)
            stats[k, 1] += steps[k]
            stats[k, 4] += moves
            h = -1
            for _ in range(cap):
                stats[k, 2] += 1
                dx = deg[s_off[kk] + x]
                if dx == 0:
                    raise ValueError("state graph has an isolated state")
                r = int(np.random.random() * dx)
                cand = uni[ptr[p_off[kk] + x] + r]
                m = rem[s_off[k] + cand]
                if np.random.random() < 2.0 / (m * (m - 1)):
                    h = cand
                    break
                stats[k, 3] += 1
                x, moves = _table_walk(x, kk, redraw, s_off, p_off, deg, ptr, nbr)
                stats[k, 1] += redraw
                stats[k, 4] += moves
            if h < 0:
                raise ValueError("rejection cap exceeded")
        else:
            raise ValueError("RSS-family table sampling lives in _levels")
        out[i] = h
        rec[i, 0] = stats[:, 1].sum()
        rec[i, 1] = stats[:, 3].sum()
        totals += stats
