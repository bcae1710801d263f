"""Compiled inner loops.

Arrays are feature-major: shape (features, samples), C-contiguous, so each
pairwise pass walks two contiguous rows. Every reduction is a plain
sequential loop (no fastmath, no parallel reductions), which keeps results
bitwise reproducible however callers split rows across threads.
"""

import math

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def center_rows(x):
    """Return (centered copy, population variances) of a feature-major array."""
    m, n = x.shape
    out = np.empty((m, n))
    var = np.empty(m)
    for j in range(m):
        s = 0.0
        for i in range(n):
            s += x[j, i]
        mu = s / n
        ss = 0.0
        for i in range(n):
            d = x[j, i] - mu
            out[j, i] = d
            ss += d * d
        var[j] = ss / n
    return out, var


@njit(**_JIT)
def covariance(a, b):
    n = a.shape[0]
    s = 0.0
    for i in range(n):
        s += a[i] * b[i]
    return s / n


@njit(**_JIT)
def correlation(vj, vk, cov):
    r = cov / math.sqrt(vj * vk)
    if r > 1.0:
        return 1.0
    if r < -1.0:
        return -1.0
    return r


@njit(**_JIT)
def mici(vj, vk, rho):
    s = vj + vk
    rad = s * s - 4.0 * vj * vk * (1.0 - rho * rho)
    if rad < 0.0:
        rad = 0.0
    out = s - math.sqrt(rad)
    return out if out > 0.0 else 0.0


@njit(**_JIT)
def cont_dissim(vj, vk, cov):
    d = 0.5 * mici(vj, vk, correlation(vj, vk, cov))
    return d if d < 1.0 else 1.0


@njit(**_JIT)
def fill_cont_rows(xc, var, rows, out):
    m = xc.shape[0]
    for j in rows:
        out[j, j] = 0.0
        for k in range(j + 1, m):
            d = cont_dissim(var[j], var[k], covariance(xc[j], xc[k]))
            out[j, k] = d
            out[k, j] = d


@njit(**_JIT)
def entropy_counts(counts, n):
    h = 0.0
    for c in counts.ravel():
        if c > 0:
            p = c / n
            h -= p * math.log2(p)
    return h


@njit(**_JIT)
def entropy(codes, v):
    counts = np.zeros(v, dtype=np.int64)
    for c in codes:
        counts[c] += 1
    return entropy_counts(counts, codes.shape[0])


@njit(**_JIT)
def joint_entropy(a, va, b, vb):
    table = np.zeros((va, vb), dtype=np.int64)
    for i in range(a.shape[0]):
        table[a[i], b[i]] += 1
    return entropy_counts(table, a.shape[0])


@njit(**_JIT)
def gain(a, va, ha, b, vb, hb):
    g = ha + hb - joint_entropy(a, va, b, vb)
    return g if g > 0.0 else 0.0


@njit(**_JIT)
def su(a, va, ha, b, vb, hb):
    denom = ha + hb
    if denom == 0.0:
        return 0.0
    s = 2.0 * gain(a, va, ha, b, vb, hb) / denom
    return s if s < 1.0 else 1.0


@njit(**_JIT)
def fill_disc_rows(codes, card, ent, rows, out):
    m = codes.shape[0]
    for j in rows:
        out[j, j] = 0.0
        for k in range(j + 1, m):
            d = 1.0 - su(codes[j], card[j], ent[j], codes[k], card[k], ent[k])
            out[j, k] = d
            out[k, j] = d


@njit(**_JIT)
def relevance_rows(codes, card, labels, n_classes, out):
    hy = entropy(labels, n_classes)
    for j in range(codes.shape[0]):
        hf = entropy(codes[j], card[j])
        out[j] = gain(labels, n_classes, hy, codes[j], card[j], hf)


@njit(**_JIT)
def density_rows(dist, scale, rows, out):
    m = dist.shape[1]
    for j in rows:
        s = 0.0
        for k in range(m):
            s += math.exp(-scale * dist[j, k])
        out[j] = s


@njit(**_JIT)
def equal_frequency_codes(x, order, bins, out):
    """Bin codes per row given each row's ascending ``order``.

    A value's raw bin is ``below * b // n`` where ``below`` counts strictly
    smaller samples and ``b = min(bins, distinct)``; raw bins are then
    renumbered consecutively.
    """
    m, n = x.shape
    for j in range(m):
        o = order[j]
        distinct = 1
        for i in range(1, n):
            if x[j, o[i]] != x[j, o[i - 1]]:
                distinct += 1
        b = bins if bins < distinct else distinct
        below = 0
        prev = -1
        code = -1
        for i in range(n):
            if i > 0 and x[j, o[i]] != x[j, o[i - 1]]:
                below = i
            raw = below * b // n
            if raw != prev:
                code += 1
                prev = raw
            out[j, o[i]] = code


@njit(**_JIT)
def dense_rank_codes(x, order, out, card):
    """Consecutive codes 0..v-1 by ascending value, per row."""
    m, n = x.shape
    for j in range(m):
        o = order[j]
        code = 0
        out[j, o[0]] = 0
        for i in range(1, n):
            if x[j, o[i]] != x[j, o[i - 1]]:
                code += 1
            out[j, o[i]] = code
        card[j] = code + 1


@njit(**_JIT)
def fps_centers(d, dens, beta, factor):
    m = d.shape[0]
    working = dens.copy()
    chosen = np.zeros(m, dtype=np.bool_)
    covered = np.zeros(m, dtype=np.bool_)
    centers = np.empty(m, dtype=np.int64)
    nc = 0
    left = m
    while left > 0:
        c = -1
        for j in range(m):
            if not chosen[j] and (c < 0 or working[j] > working[c]):
                c = j
        centers[nc] = c
        nc += 1
        chosen[c] = True
        for j in range(m):
            if j == c or d[c, j] < beta:
                if not covered[j]:
                    covered[j] = True
                    left -= 1
                working[j] *= factor
    return centers[:nc]


@njit(**_JIT)
def merge_clusters(d, dens, owner, centers):
    """Fixed-point merge of overlapping clusters.

    ``owner[j]`` is the slot of feature j's cluster and ``centers[s]`` that
    slot's center (-1 once absorbed). Overlapping pairs are taken in
    (lower center, higher center) order, restarting after each merge.
    """
    m = d.shape[0]
    k = centers.shape[0]
    radius = np.zeros(k)
    for j in range(m):
        s = owner[j]
        r = d[centers[s], j]
        if r > radius[s]:
            radius[s] = r
    while True:
        alive = np.array([s for s in range(k) if centers[s] >= 0], dtype=np.int64)
        alive = alive[np.argsort(centers[alive], kind="mergesort")]
        a = -1
        b = -1
        for p in range(alive.shape[0]):
            sp = alive[p]
            for q in range(p + 1, alive.shape[0]):
                sq = alive[q]
                if d[centers[sp], centers[sq]] < radius[sp] + radius[sq]:
                    a = sp
                    b = sq
                    break
            if a >= 0:
                break
        if a < 0:
            return radius
        c = -1
        for j in range(m):
            if owner[j] == b:
                owner[j] = a
            if owner[j] == a and (c < 0 or dens[j] > dens[c]):
                c = j
        centers[a] = c
        centers[b] = -1
        r = 0.0
        for j in range(m):
            if owner[j] == a and d[c, j] > r:
                r = d[c, j]
        radius[a] = r
        radius[b] = 0.0


@njit(**_JIT)
def small_int_codes(x, out, card):
    """Dense codes by counting when every row holds integers in a narrow range.

    Returns False (leaving ``out`` partly written) as soon as a row does not
    qualify; callers then fall back to sorting.
    """
    m, n = x.shape
    for j in range(m):
        lo = x[j, 0]
        hi = x[j, 0]
        for i in range(n):
            v = x[j, i]
            if v != math.floor(v):
                return False
            if v < lo:
                lo = v
            elif v > hi:
                hi = v
        span = hi - lo + 1.0
        if span > n or span > 65536.0:
            return False
        base = int(lo)
        remap = np.full(int(span), -1, dtype=np.int64)
        for i in range(n):
            remap[int(x[j, i]) - base] = 1
        code = 0
        for t in range(remap.shape[0]):
            if remap[t] >= 0:
                remap[t] = code
                code += 1
        for i in range(n):
            out[j, i] = remap[int(x[j, i]) - base]
        card[j] = code
    return True
