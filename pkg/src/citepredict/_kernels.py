"""Compiled per-source graph kernels.

The functions here release the GIL so callers can fan chunks of sources out
over a thread pool. A chunk's result depends only on its source range and
lane count, never on scheduling.
"""

import numpy as np
from numba import njit

# de Bruijn lookup for the index of the lowest set bit of a uint64
_DEBRUIJN = 0x03F79D71B4CB0A89
_DB_TABLE = np.zeros(64, dtype=np.int64)
for _i in range(64):
    _DB_TABLE[(((1 << _i) * _DEBRUIJN) & 0xFFFFFFFFFFFFFFFF) >> 58] = _i


@njit(cache=True, nogil=True)
def brandes_chunk(indptr, indices, start, stop, lanes):
    """Brandes dependency accumulation for sources ``start..stop-1``.

    Up to ``lanes`` (<= 64) sources share one level-synchronous BFS; a
    uint64 bitmask per node records which sources have reached it, so each
    adjacency row is scanned once per level rather than once per source.
    Shortest paths count hops.

    Returns the summed dependencies of every node over this source range
    (each unordered pair is seen from both endpoints, so callers halve the
    total), plus per-source distance sums and reached-node counts (source
    included).
    """
    db = _DB_TABLE
    mult = np.uint64(_DEBRUIJN)
    shift = np.uint64(58)
    one = np.uint64(1)
    zero = np.uint64(0)
    n = indptr.shape[0] - 1
    nsrc = stop - start
    bc = np.zeros(n)
    dist_sum = np.zeros(nsrc)
    reached = np.ones(nsrc, dtype=np.int64)
    sigma = np.zeros((n, lanes))
    delta = np.zeros((n, lanes))
    visited = np.zeros(n, dtype=np.uint64)
    nxt = np.zeros(n, dtype=np.uint64)
    prevmask = np.zeros(n, dtype=np.uint64)
    coeff = np.zeros(lanes)
    cap = 4 * n + 16
    ent_node = np.empty(cap, dtype=np.int64)
    ent_mask = np.empty(cap, dtype=np.uint64)
    lvl_ptr = np.empty(n + 2, dtype=np.int64)
    for b0 in range(start, stop, lanes):
        nl = min(b0 + lanes, stop) - b0
        ne = 0
        for b in range(nl):
            s = b0 + b
            bit = one << np.uint64(b)
            visited[s] |= bit
            sigma[s, b] = 1.0
            ent_node[ne] = s
            ent_mask[ne] = bit
            ne += 1
        lvl_ptr[0] = 0
        lvl_ptr[1] = ne
        nlev = 1
        # forward: path counts level by level
        while lvl_ptr[nlev - 1] < lvl_ptr[nlev]:
            for t in range(lvl_ptr[nlev - 1], lvl_ptr[nlev]):
                v = ent_node[t]
                fm = ent_mask[t]
                for k in range(indptr[v], indptr[v + 1]):
                    w = indices[k]
                    new = fm & ~visited[w]
                    if new != zero:
                        visited[w] |= new
                        if nxt[w] == zero:
                            if ne >= cap:
                                cap *= 2
                                grown_n = np.empty(cap, dtype=np.int64)
                                grown_m = np.empty(cap, dtype=np.uint64)
                                grown_n[:ne] = ent_node[:ne]
                                grown_m[:ne] = ent_mask[:ne]
                                ent_node = grown_n
                                ent_mask = grown_m
                            ent_node[ne] = w
                            ne += 1
                        nxt[w] |= new
                    add = fm & nxt[w]
                    while add != zero:
                        low = add & (~add + one)
                        b = db[(low * mult) >> shift]
                        sigma[w, b] += sigma[v, b]
                        add ^= low
            for t in range(lvl_ptr[nlev], ne):
                w = ent_node[t]
                ent_mask[t] = nxt[w]
                nxt[w] = zero
            nlev += 1
            lvl_ptr[nlev] = ne
        # backward: dependencies from the deepest level up
        for d in range(nlev - 2, 0, -1):
            for t in range(lvl_ptr[d - 1], lvl_ptr[d]):
                prevmask[ent_node[t]] = ent_mask[t]
            for t in range(lvl_ptr[d], lvl_ptr[d + 1]):
                w = ent_node[t]
                wm = ent_mask[t]
                m = wm
                while m != zero:
                    low = m & (~m + one)
                    b = db[(low * mult) >> shift]
                    coeff[b] = (1.0 + delta[w, b]) / sigma[w, b]
                    bc[w] += delta[w, b]
                    dist_sum[b0 + b - start] += d
                    reached[b0 + b - start] += 1
                    m ^= low
                for k in range(indptr[w], indptr[w + 1]):
                    v = indices[k]
                    pm = wm & prevmask[v]
                    while pm != zero:
                        low = pm & (~pm + one)
                        b = db[(low * mult) >> shift]
                        delta[v, b] += sigma[v, b] * coeff[b]
                        pm ^= low
            for t in range(lvl_ptr[d - 1], lvl_ptr[d]):
                prevmask[ent_node[t]] = zero
        for t in range(ne):
            w = ent_node[t]
            visited[w] = zero
            for b in range(lanes):
                sigma[w, b] = 0.0
                delta[w, b] = 0.0
    return bc, dist_sum, reached


@njit(cache=True, nogil=True)
def constraint_chunk(indptr, indices, weights, strength, start, stop):
    """Burt constraint for egos ``start..stop-1``; isolates get 1.0."""
    n = indptr.shape[0] - 1
    out = np.empty(stop - start, dtype=np.float64)
    p_ego = np.zeros(n, dtype=np.float64)
    for i in range(start, stop):
        a, b = indptr[i], indptr[i + 1]
        if a == b:
            out[i - start] = 1.0
            continue
        si = strength[i]
        for k in range(a, b):
            p_ego[indices[k]] = weights[k] / si
        c = 0.0
        for k in range(a, b):
            j = indices[k]
            indirect = 0.0
            for kk in range(indptr[j], indptr[j + 1]):
                q = indices[kk]
                if q != i and p_ego[q] > 0.0:
                    indirect += p_ego[q] * weights[kk] / strength[q]
            term = p_ego[j] + indirect
            c += term * term
        out[i - start] = c
        for k in range(a, b):
            p_ego[indices[k]] = 0.0
    return out
