"""Compiled dynamic program behind ``sieve``.

Every quantity is a truncated generating tensor T[k', l', i] over GF(2^64):
k' = nodes, l' = leaves, i = labelled elements, truncated at (K, L, R).

For a directed slot s = (b -> c):
    S[s]  subtrees rooted at c whose parent maps to b (c never re-enters b),
    F[s]  contribution of such a child to b: leaf term plus edge-weighted S[s].
For each vertex b with neighbours c_0 < ... < c_{d-1}:
    pre(b, j) = base_b * prod_{j' < j} (1 + F[b -> c_j'])
    suf(b, j) = prod_{j' >= j} (1 + F[b -> c_j'])
so S[c_j -> b] = pre(b, j) * suf(b, j + 1).  Levels are filled in
increasing k'; level k' of S only needs F below k'.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .field import clmul, gmul, reduce128


@njit(nogil=True, inline="always")
def _conv_acc(a, b, lo, hi, ka, kb, lmax, rmax):
    # a tensor level with k' nodes has at most k' leaves and 2k' labels
    la = min(lmax, ka)
    lb = min(lmax, kb)
    ia = min(rmax, 2 * ka)
    ib = min(rmax, 2 * kb)
    for l1 in range(la + 1):
        for i1 in range(ia + 1):
            x = a[l1, i1]
            if x == 0:
                continue
            for l2 in range(min(lb, lmax - l1) + 1):
                for i2 in range(min(ib, rmax - i1) + 1):
                    y = b[l2, i2]
                    if y != 0:
                        plo, phi = clmul(x, y)
                        lo[l1 + l2, i1 + i2] ^= plo
                        hi[l1 + l2, i1 + i2] ^= phi


@njit(nogil=True, inline="always")
def _flush(dst, lo, hi, lmax, rmax):
    for l in range(lmax + 1):
        for i in range(rmax + 1):
            dst[l, i] = reduce128(lo[l, i], hi[l, i])
            lo[l, i] = 0
            hi[l, i] = 0


@njit(nogil=True)
def dp_kernel(indptr, nbr, eid, rev, inv1, xe, sv, se, z, nw, K, L, R,
              S, F, pre, suf, lo, hi, out):
    """Fill out[0..R] with P_i^X for the label sums (sv, se).

    pre and suf are indexed by indptr[b] + b + j, j = 0..deg(b).
    """
    n = indptr.shape[0] - 1
    nslots = nbr.shape[0]
    zero = np.uint64(0)
    one = np.uint64(1)

    for s in range(nslots):
        for kk in range(K + 1):
            for l in range(L + 1):
                for i in range(R + 1):
                    S[s, kk, l, i] = zero
                    F[s, kk, l, i] = zero
    for p in range(pre.shape[0]):
        for kk in range(K + 1):
            for l in range(L + 1):
                for i in range(R + 1):
                    pre[p, kk, l, i] = zero
                    suf[p, kk, l, i] = zero
        suf[p, 0, 0, 0] = one
    for b in range(n):
        p0 = indptr[b] + b
        pre[p0, 1, 0, inv1[b]] = nw[b]

    for lev in range(1, K + 1):
        # prefix products at this level (F below lev only)
        for b in range(n):
            base = indptr[b] + b
            d = indptr[b + 1] - indptr[b]
            for j in range(1, d + 1):
                s = indptr[b] + j - 1
                src = pre[base + j - 1]
                for l in range(L + 1):
                    for i in range(R + 1):
                        lo[l, i] = src[lev, l, i]
                for k2 in range(1, lev):
                    _conv_acc(src[lev - k2], F[s, k2], lo, hi, lev - k2, k2, L, R)
                _flush(pre[base + j, lev], lo, hi, L, R)
        # the root step reads only pre at level K and F below K
        if lev == K:
            break
        # subtree of b seen from each neighbour c_j
        for b in range(n):
            base = indptr[b] + b
            d = indptr[b + 1] - indptr[b]
            for j in range(d):
                s = indptr[b] + j
                for k1 in range(1, lev + 1):
                    _conv_acc(pre[base + j, k1], suf[base + j + 1, lev - k1], lo, hi, k1, lev - k1, L, R)
                _flush(S[rev[s], lev], lo, hi, L, R)
        # child factors
        for b in range(n):
            for s in range(indptr[b], indptr[b + 1]):
                c = nbr[s]
                e = eid[s]
                both2 = inv1[b] == 0 and inv1[c] == 0
                sh = 1 if both2 else 0
                if lev == 1:
                    f1 = gmul(xe[e], sv[c])
                    if both2:
                        f1 = gmul(f1, se[e])
                    f1 = gmul(f1, nw[c])
                    if 1 + sh <= R and L >= 1:
                        F[s, 1, 1, 1 + sh] = f1
                else:
                    if both2:
                        f0 = gmul(xe[e], se[e])
                    elif inv1[c]:
                        f0 = gmul(xe[e], sv[c])
                    else:
                        f0 = xe[e]
                    src = S[s, lev]
                    for l in range(1, L + 1):
                        for i in range(sh, R + 1):
                            v = src[l, i - sh]
                            F[s, lev, l, i] = gmul(f0, v) if v != 0 else zero
        # suffix products, right to left; S at level K is never needed
        if lev >= K - 1:
            continue
        for b in range(n):
            base = indptr[b] + b
            d = indptr[b + 1] - indptr[b]
            for j in range(d - 1, -1, -1):
                s = indptr[b] + j
                nxt = suf[base + j + 1]
                for l in range(L + 1):
                    for i in range(R + 1):
                        lo[l, i] = nxt[lev, l, i]
                for k2 in range(1, lev + 1):
                    _conv_acc(F[s, k2], nxt[lev - k2], lo, hi, k2, lev - k2, L, R)
                _flush(suf[base + j, lev], lo, hi, L, R)

    # roots with at least two children
    for i in range(R + 1):
        out[i] = zero
    for v in range(n):
        base = indptr[v] + v
        d = indptr[v + 1] - indptr[v]
        full = pre[base + d, K]
        sh = inv1[v]
        zf = gmul(z[v], sv[v]) if inv1[v] else z[v]
        for i in range(R + 1):
            a = full[L, i]
            if i >= sh:
                one_child = zero
                for s in range(indptr[v], indptr[v + 1]):
                    one_child ^= F[s, K - 1, L, i - sh]
                a ^= gmul(nw[v], one_child)
            if a != 0:
                out[i] ^= gmul(zf, a)


@njit(nogil=True)
def all_subsets_kernel(indptr, nbr, eid, rev, inv1, xe, yv, ye, z, nw, K, L, R, nlabels,
                       S, F, pre, suf, lo, hi, out, per_subset):
    """out[i] = sum of P_i^X over nonempty X of {0..i-1}, Gray-code order over all 2^nlabels.

    Bijective labelings onto [i] are exactly the surjective ones, so only
    subsets of the first i labels enter P_i.  When per_subset has 2^nlabels rows, row X (bitmask) receives P^X.
    Returns the number of subsets visited.
    """
    n = yv.shape[0]
    m = ye.shape[0]
    sv = np.zeros(n, dtype=np.uint64)
    se = np.zeros(m, dtype=np.uint64)
    cur = np.zeros(R + 1, dtype=np.uint64)
    for i in range(R + 1):
        out[i] = 0
    keep = per_subset.shape[0] == (1 << nlabels)
    visited = 0
    total = 1 << nlabels
    for step in range(1, total):
        t = 0
        while not (step >> t) & 1:
            t += 1
        for v in range(n):
            sv[v] ^= yv[v, t]
        for e in range(m):
            se[e] ^= ye[e, t]
        mask = step ^ (step >> 1)
        dp_kernel(indptr, nbr, eid, rev, inv1, xe, sv, se, z, nw, K, L, R,
                  S, F, pre, suf, lo, hi, cur)
        for i in range(R + 1):
            if (mask >> i) == 0:
                out[i] ^= cur[i]
            if keep:
                per_subset[mask, i] = cur[i]
        visited += 1
    return visited
