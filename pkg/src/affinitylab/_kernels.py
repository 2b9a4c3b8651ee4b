"""Compiled inner loops.

All kernels work on point indices plus a coordinate table ``coords`` (q^n x n)
and the field's add/sub/mul/inv tables, so they only handle q <= 256.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# -- incremental affine rank -------------------------------------------------


@njit(cache=True)
def _reduce_push(rows, pivs, rank, d, n, sub_t, mul_t, inv_t):
    """Reduce d against the current rows; append it if independent.

    Returns the new rank.  Rows are kept normalized at their pivot and every
    row is zero at the pivots of earlier rows.
    """
    for i in range(rank):
        c = d[pivs[i]]
        if c != 0:
            for j in range(n):
                if rows[i, j] != 0:
                    d[j] = sub_t[d[j], mul_t[c, rows[i, j]]]
    lead = -1
    for j in range(n):
        if d[j] != 0:
            lead = j
            break
    if lead < 0:
        return rank
    inv = inv_t[d[lead]]
    for j in range(n):
        rows[rank, j] = mul_t[inv, d[j]]
    pivs[rank] = lead
    return rank + 1


@njit(cache=True)
def image_is_flat(pts, images, coords, k, n, sub_t, mul_t, inv_t, rows, pivs, d):
    """True iff images[pts] spans an affine space of dimension <= k.

    Callers pass q^k distinct points, so "<= k" means "is a k-flat".
    rows (k+1 x n), pivs (k+1), d (n) are scratch buffers.
    """
    base = coords[images[pts[0]]]
    rank = 0
    for t in range(1, pts.shape[0]):
        y = coords[images[pts[t]]]
        for j in range(n):
            d[j] = sub_t[y[j], base[j]]
        rank = _reduce_push(rows, pivs, rank, d, n, sub_t, mul_t, inv_t)
        if rank > k:
            return False
    return True


@njit(cache=True)
def image_is_flat_q2k2(pts, images):
    return (images[pts[0]] ^ images[pts[1]] ^ images[pts[2]] ^ images[pts[3]]) == 0


# -- table-based delta updates --------------------------------------------------


@njit(cache=True)
def _flat_ok(fid, points, images, coords, k, n, q, sub_t, mul_t, inv_t, rows, pivs, d):
    if q == 2 and k == 2:
        return image_is_flat_q2k2(points[fid], images)
    return image_is_flat(points[fid], images, coords, k, n, sub_t, mul_t, inv_t, rows, pivs, d)


@njit(cache=True)
def _retest(ids, skip, images, status, points, coords, k, n, q, sub_t, mul_t, inv_t,
            rows, pivs, d):
    """Re-test every flat in ids that is not in skip (both sorted). Returns affinity change."""
    delta = 0
    j = 0
    for t in range(ids.shape[0]):
        fid = ids[t]
        while j < skip.shape[0] and skip[j] < fid:
            j += 1
        if j < skip.shape[0] and skip[j] == fid:
            continue
        ok = _flat_ok(fid, points, images, coords, k, n, q, sub_t, mul_t, inv_t, rows, pivs, d)
        new = 1 if ok else 0
        if new != status[fid]:
            delta += new - status[fid]
            status[fid] = new
    return delta


@njit(cache=True)
def swap_delta(u, v, images, status, by_point, points, coords, k, n, q,
               sub_t, mul_t, inv_t, rows, pivs, d):
    """Swap images[u], images[v] and update status; returns the affinity change.

    Only flats containing exactly one of u, v can change: a flat containing
    both has the same image set before and after.
    """
    tmp = images[u]
    images[u] = images[v]
    images[v] = tmp
    bu = by_point[u]
    bv = by_point[v]
    delta = _retest(bu, bv, images, status, points, coords, k, n, q, sub_t, mul_t, inv_t,
                    rows, pivs, d)
    delta += _retest(bv, bu, images, status, points, coords, k, n, q, sub_t, mul_t, inv_t,
                     rows, pivs, d)
    return delta


@njit(cache=True, nogil=True)
def walk(images, status, affinity, by_point, points, coords, k, n, q, sub_t, mul_t, inv_t,
         draws, nsteps, restart_every, three_cycles, start_images, start_status, start_aff,
         walk_state, seen):
    """Random walk of transpositions (and optional 3-cycles) with restarts.

    Each step consumes draws[4*s : 4*s+4].  walk_state holds
    (steps_in_walk, walk_length, next_start).  Stops early right after a step
    that reaches a value not yet in ``seen``.  Returns (steps_done, affinity, new_value_flag).
    """
    N = images.shape[0]
    rows = np.zeros((k + 2, n), dtype=np.int64)
    pivs = np.zeros(k + 2, dtype=np.int64)
    d = np.zeros(n, dtype=np.int64)
    for s in range(nsteps):
        a = draws[4 * s]
        b = draws[4 * s + 1]
        c = draws[4 * s + 2]
        e = draws[4 * s + 3]
        if walk_state[0] >= walk_state[1] and walk_state[1] > 0:
            j = walk_state[2]
            images[:] = start_images[j]
            status[:] = start_status[j]
            affinity = start_aff[j]
            walk_state[2] = (j + 1) % start_images.shape[0]
            walk_state[0] = 0
        if walk_state[0] == 0:
            walk_state[1] = 1 + int(e * restart_every)
        u = int(a * N)
        w = int(b * (N - 1))
        if w >= u:
            w += 1
        affinity += swap_delta(u, w, images, status, by_point, points, coords, k, n, q,
                               sub_t, mul_t, inv_t, rows, pivs, d)
        if three_cycles and c < 0.5 and N > 2:
            x = int(2.0 * c * (N - 2))
            lo = min(u, w)
            hi = max(u, w)
            if x >= lo:
                x += 1
            if x >= hi:
                x += 1
            affinity += swap_delta(u, x, images, status, by_point, points, coords, k, n, q,
                                   sub_t, mul_t, inv_t, rows, pivs, d)
        walk_state[0] += 1
        if not seen[affinity]:
            return s + 1, affinity, True
    return nsteps, affinity, False


@njit(cache=True)
def table_status(images, points, coords, k, n, q, sub_t, mul_t, inv_t):
    N = points.shape[0]
    status = np.zeros(N, dtype=np.uint8)
    rows = np.zeros((k + 2, n), dtype=np.int64)
    pivs = np.zeros(k + 2, dtype=np.int64)
    d = np.zeros(n, dtype=np.int64)
    for fid in range(N):
        if _flat_ok(fid, points, images, coords, k, n, q, sub_t, mul_t, inv_t, rows, pivs, d):
            status[fid] = 1
    return status


# -- streaming enumeration without a table ---------------------------------------


@njit(cache=True)
def _coset_id(x, B, pivots, free_cols, k, n, q, sub_t, mul_t, tmp):
    for j in range(n):
        tmp[j] = x[j]
    for i in range(k):
        c = tmp[pivots[i]]
        if c != 0:
            for j in range(n):
                if B[i, j] != 0:
                    tmp[j] = sub_t[tmp[j], mul_t[c, B[i, j]]]
    cid = 0
    for t in range(n - k):
        cid = cid * q + tmp[free_cols[t]]
    return cid


@njit(cache=True)
def _coset_test(rep, first, nfirst, images, coords, weights, mulB, k, n, q, add_t, sub_t,
                mul_t, inv_t, rows, pivs, d, x, cvec):
    """Decide whether images of the coset rep + span(B) form a k-flat.

    ``first`` lists image points known to lie in the image set; they are fed to
    the rank test before the frame and the full point sweep, which makes
    non-flats fail fast.
    """
    rank = 0
    have_base = False
    base = np.empty(n, dtype=np.int64)
    total = q ** k
    # phase 0: given image points, phase 1: frame, phase 2: every point
    for phase in range(3):
        if phase == 0:
            cnt = nfirst
        elif phase == 1:
            cnt = k + 1
        else:
            cnt = total
        for t in range(cnt):
            if phase == 0:
                y = first[t]
            else:
                if phase == 1:
                    for i in range(k):
                        cvec[i] = 0
                    if t > 0:
                        cvec[t - 1] = 1
                else:
                    r = t
                    for i in range(k - 1, -1, -1):
                        cvec[i] = r % q
                        r //= q
                for j in range(n):
                    x[j] = rep[j]
                for i in range(k):
                    if cvec[i] != 0:
                        for j in range(n):
                            x[j] = add_t[x[j], mulB[i, cvec[i], j]]
                idx = 0
                for j in range(n):
                    idx += x[j] * weights[j]
                y = images[idx]
            if not have_base:
                for j in range(n):
                    base[j] = coords[y, j]
                have_base = True
                continue
            for j in range(n):
                d[j] = sub_t[coords[y, j], base[j]]
            rank = _reduce_push(rows, pivs, rank, d, n, sub_t, mul_t, inv_t)
            if rank > k:
                return False
    return True


@njit(cache=True, nogil=True)
def stream_count(images, support, coords, weights, pivot_sets, k, n, q,
                 add_t, sub_t, mul_t, inv_t):
    """k-affinity by enumerating every subspace and coset, with no flat table.

    Points outside ``support`` are fixed by the permutation, so a coset that
    misses the support maps to itself.  A coset X meeting the support maps to
    itself as well when f(X & support) lies inside X; every other coset gets a
    full rank test.
    """
    ns = support.shape[0]
    ncos = q ** (n - k)
    # classifying support points costs ~2 coset-id reductions each; a dense
    # sweep costs at least k+2 rank steps per coset
    sparse = 2 * ns <= ncos * (k + 2)
    B = np.zeros((k, n), dtype=np.int64)
    mulB = np.zeros((k, q, n), dtype=np.int64)
    free_cols = np.zeros(n - k, dtype=np.int64)
    rows = np.zeros((k + 2, n), dtype=np.int64)
    pivs = np.zeros(k + 2, dtype=np.int64)
    d = np.zeros(n, dtype=np.int64)
    x = np.zeros(n, dtype=np.int64)
    tmp = np.zeros(n, dtype=np.int64)
    rep = np.zeros(n, dtype=np.int64)
    cvec = np.zeros(max(k, 1), dtype=np.int64)
    cs = np.zeros(ns, dtype=np.int64)
    ci = np.zeros(ns, dtype=np.int64)
    touched = np.zeros(ns, dtype=np.int64)
    first = np.zeros(ns, dtype=np.int64)
    # slots (row, col) that carry free entries, per pivot set
    slot_r = np.zeros(k * n, dtype=np.int64)
    slot_c = np.zeros(k * n, dtype=np.int64)
    digits = np.zeros(k * n, dtype=np.int64)
    count = 0
    for ps in range(pivot_sets.shape[0]):
        piv = pivot_sets[ps]
        is_piv = np.zeros(n, dtype=np.bool_)
        for i in range(k):
            is_piv[piv[i]] = True
        t = 0
        for j in range(n):
            if not is_piv[j]:
                free_cols[t] = j
                t += 1
        nslot = 0
        for i in range(k):
            for j in range(piv[i] + 1, n):
                if not is_piv[j]:
                    slot_r[nslot] = i
                    slot_c[nslot] = j
                    nslot += 1
        nsub = q ** nslot
        for s in range(nslot):
            digits[s] = 0
        for sub in range(nsub):
            if sub > 0:
                # odometer step, last slot fastest
                p = nslot - 1
                while True:
                    digits[p] += 1
                    if digits[p] < q:
                        break
                    digits[p] = 0
                    p -= 1
            for i in range(k):
                for j in range(n):
                    B[i, j] = 0
                B[i, piv[i]] = 1
            for s in range(nslot):
                B[slot_r[s], slot_c[s]] = digits[s]
            for i in range(k):
                for c in range(q):
                    for j in range(n):
                        mulB[i, c, j] = mul_t[c, B[i, j]]
            if sparse:
                for a in range(ns):
                    cs[a] = _coset_id(coords[support[a]], B, piv, free_cols, k, n, q,
                                      sub_t, mul_t, tmp)
                    ci[a] = _coset_id(coords[images[support[a]]], B, piv, free_cols, k, n, q,
                                      sub_t, mul_t, tmp)
                nt = 0
                for a in range(ns):
                    dup = False
                    for b in range(nt):
                        if touched[b] == cs[a]:
                            dup = True
                            break
                    if not dup:
                        touched[nt] = cs[a]
                        nt += 1
                count += ncos - nt
                for b in range(nt):
                    cid = touched[b]
                    nf = 0
                    inside = True
                    for a in range(ns):
                        if cs[a] == cid:
                            first[nf] = images[support[a]]
                            nf += 1
                            if ci[a] != cid:
                                inside = False
                    if inside:
                        count += 1
                        continue
                    r = cid
                    for j in range(n):
                        rep[j] = 0
                    for tt in range(n - k - 1, -1, -1):
                        rep[free_cols[tt]] = r % q
                        r //= q
                    if _coset_test(rep, first, nf, images, coords, weights, mulB, k, n, q,
                                   add_t, sub_t, mul_t, inv_t, rows, pivs, d, x, cvec):
                        count += 1
            else:
                for cid in range(ncos):
                    r = cid
                    for j in range(n):
                        rep[j] = 0
                    for tt in range(n - k - 1, -1, -1):
                        rep[free_cols[tt]] = r % q
                        r //= q
                    if _coset_test(rep, first, 0, images, coords, weights, mulB, k, n, q,
                                   add_t, sub_t, mul_t, inv_t, rows, pivs, d, x, cvec):
                        count += 1
    return count


# -- q = 2 special routes ------------------------------------------------------------


@njit(cache=True, nogil=True)
def diff_count_q2k2(images, n):
    """Twenty-four times the 2-affinity of a permutation of F_2^n.

    A 2-flat {x, x+a, x+b, x+a+b} maps to a flat iff the four images XOR to 0;
    counting (x, a, b) with a, b, a+b nonzero gives each flat 24 times.  For
    fixed a the count is sum_v c_{a,v}^2 - 2^(n+1), c_{a,v} = #{x : D_a f(x) = v}.
    """
    N = 1 << n
    cnt = np.zeros(N, dtype=np.int64)
    total = 0
    for a in range(1, N):
        for x in range(N):
            cnt[images[x] ^ images[x ^ a]] += 1
        s = 0
        for v in range(N):
            s += cnt[v] * cnt[v]
            cnt[v] = 0
        total += s - 2 * N
    return total


@njit(cache=True, nogil=True)
def hyperplane_flags_q2(images, n, coords, sub_t, mul_t, inv_t):
    """flags[a] = 1 iff f maps the hyperplane {x : <a,x> = 0} onto an (n-1)-flat."""
    N = 1 << n
    flags = np.zeros(N, dtype=np.uint8)
    flags[0] = 1
    rows = np.zeros((n + 1, n), dtype=np.int64)
    pivs = np.zeros(n + 1, dtype=np.int64)
    d = np.zeros(n, dtype=np.int64)
    pts = np.zeros(N // 2, dtype=np.int64)
    for a in range(1, N):
        m = 0
        for x in range(N):
            # parity of popcount(a & x)
            y = a & x
            par = 0
            while y:
                par ^= 1
                y &= y - 1
            if par == 0:
                pts[m] = x
                m += 1
        if image_is_flat(pts, images, coords, n - 1, n, sub_t, mul_t, inv_t, rows, pivs, d):
            flags[a] = 1
    return flags


@njit(cache=True, nogil=True)
def autocorrelation_sq_sum(truth, n):
    """sum_a (sum_x (-1)^(g(x+a)+g(x)))^2 by direct O(4^n) evaluation."""
    N = 1 << n
    total = 0
    for a in range(N):
        s = 0
        for x in range(N):
            s += 1 - 2 * (truth[x] ^ truth[x ^ a])
        total += s * s
    return total
