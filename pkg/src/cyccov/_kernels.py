"""Bitmask kernels: nowhere-zero Z2xZ2 flow search, cycle-space enumeration and
the exact cycle-cover branch and bound.

Each kernel has a numba implementation and a pure Python/numpy fallback with the
same contract.  Set ``CYCCOV_NO_NUMBA=1`` to force the fallback (the numba path
is also skipped automatically when numba is missing or masks exceed 63 bits).
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_ENABLED = numba is not None and os.environ.get("CYCCOV_NO_NUMBA", "0") not in ("1", "true", "yes")
MAX_BITS = 63


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# ---------------------------------------------------------------- numba side


@_njit
def _parity64(x):
    x ^= x >> np.uint64(32)
    x ^= x >> np.uint64(16)
    x ^= x >> np.uint64(8)
    x ^= x >> np.uint64(4)
    x ^= x >> np.uint64(2)
    x ^= x >> np.uint64(1)
    return x & np.uint64(1)


@_njit
def _nz4_search_nb(level_ptr, level_masks, k, max_solutions):
    out_x = np.zeros(max_solutions, dtype=np.uint64)
    out_y = np.zeros(max_solutions, dtype=np.uint64)
    found = 0
    choice = np.zeros(k, dtype=np.int64)
    xs = np.zeros(k + 1, dtype=np.uint64)
    ys = np.zeros(k + 1, dtype=np.uint64)
    one = np.uint64(1)
    level = 0
    while level >= 0:
        choice[level] += 1
        if choice[level] > 3:
            choice[level] = 0
            level -= 1
            continue
        c = choice[level]
        bit = one << np.uint64(level)
        x = xs[level]
        y = ys[level]
        if c & 2:
            x |= bit
        if c & 1:
            y |= bit
        ok = True
        for j in range(level_ptr[level], level_ptr[level + 1]):
            msk = level_masks[j]
            if _parity64(x & msk) == 0 and _parity64(y & msk) == 0:
                ok = False
                break
        if not ok:
            continue
        if level == k - 1:
            out_x[found] = x
            out_y[found] = y
            found += 1
            if found >= max_solutions:
                break
            continue
        xs[level + 1] = x
        ys[level + 1] = y
        level += 1
    return out_x, out_y, found


@_njit
def _even_masks_nb(basis):
    d = basis.shape[0]
    out = np.zeros(1 << d, dtype=np.uint64)
    cur = np.uint64(0)
    for i in range(1, 1 << d):
        # Gray code: flip the basis vector at the lowest set bit of i
        j = 0
        while not (i >> j) & 1:
            j += 1
        cur ^= basis[j]
        out[i ^ (i >> 1)] = cur
    return out


@_njit
def _last_member_bound_nb(mask, pair_min, nbits):
    """A single member covering ``mask`` holds every pair of its groups."""
    most = 0
    one = np.uint64(1)
    for a in range(nbits):
        if (mask >> np.uint64(a)) & one:
            for b in range(a, nbits):
                if (mask >> np.uint64(b)) & one and pair_min[a, b] > most:
                    most = pair_min[a, b]
    return most


@_njit
def _lower_bound_nb(mask, group_weights, group_min):
    """Cost still needed to cover ``mask``: its own weight, and at least the
    cheapest candidate through each of its groups."""
    total = 0
    most = 0
    b = 0
    one = np.uint64(1)
    while mask:
        if mask & one:
            total += group_weights[b]
            if group_min[b] > most:
                most = group_min[b]
        mask >>= one
        b += 1
    return max(total, most)


@_njit
def _cover_bnb_nb(piv_ptr, piv_idx, cand_masks, cand_weights, group_weights, group_min, pair_min, full,
                  max_members, best_init):
    best = best_init
    covered = np.zeros(max_members + 1, dtype=np.uint64)
    cur = np.zeros(max_members + 1, dtype=np.int64)
    pos = np.zeros(max_members + 1, dtype=np.int64)
    pivot = np.zeros(max_members + 1, dtype=np.int64)
    chosen = np.zeros(max_members + 1, dtype=np.int64)
    one = np.uint64(1)
    depth = 0
    # set up the root frame
    U = full
    b = 0
    while not (U >> np.uint64(b)) & one:
        b += 1
    pivot[0] = b
    pos[0] = piv_ptr[b]
    while depth >= 0:
        U = full & ~covered[depth]
        p = pivot[depth]
        if pos[depth] >= piv_ptr[p + 1]:
            depth -= 1
            continue
        j = piv_idx[pos[depth]]
        pos[depth] += 1
        w = cand_weights[j]
        if cur[depth] + w >= best:
            pos[depth] = piv_ptr[p + 1]
            continue
        # canonical order: a member holding an earlier pivot must come after that pivot's member
        dup = False
        for i in range(depth):
            if j < chosen[i] and (cand_masks[j] >> np.uint64(pivot[i])) & one:
                dup = True
                break
        if dup:
            continue
        chosen[depth] = j
        nU = U & ~cand_masks[j]
        tot = cur[depth] + w
        if nU == 0:
            best = tot
            continue
        if depth + 1 >= max_members:
            continue
        if tot + _lower_bound_nb(nU, group_weights, group_min) >= best:
            continue
        if depth + 2 == max_members and tot + _last_member_bound_nb(nU, pair_min, len(group_weights)) >= best:
            continue
        depth += 1
        covered[depth] = covered[depth - 1] | cand_masks[j]
        cur[depth] = tot
        b = 0
        while not (nU >> np.uint64(b)) & one:
            b += 1
        pivot[depth] = b
        pos[depth] = piv_ptr[b]
    return best


@_njit
def _label_bnb_nb(lvl_ptr, g_sig, g_w, rest_w, order, nvars, k, best_init):
    best = best_init
    x = np.zeros(nvars + 1, dtype=np.int64)
    pos = np.zeros(nvars + 1, dtype=np.int64)
    cost = np.zeros(nvars + 1, dtype=np.int64)
    used = np.zeros(nvars + 1, dtype=np.int64)
    nvals = order.shape[0]
    level = 0
    while level >= 0:
        if pos[level] >= nvals:
            pos[level] = 0
            level -= 1
            continue
        v = order[pos[level]]
        pos[level] += 1
        u = used[level]
        hi = v >> u
        if hi & (hi + 1):
            continue  # members are numbered in order of first use
        x[level] = v
        c = cost[level]
        ok = True
        for t in range(lvl_ptr[level], lvl_ptr[level + 1]):
            sig = g_sig[t]
            lab = 0
            i = 0
            while sig:
                if sig & 1:
                    lab ^= x[i]
                sig >>= 1
                i += 1
            if lab == 0:
                ok = False
                break
            pc = 0
            while lab:
                lab &= lab - 1
                pc += 1
            c += g_w[t] * pc
        if not ok or c + rest_w[level] >= best:
            continue
        if level == nvars - 1:
            best = c
            continue
        nu = u
        while nu < k and (v >> nu) & 1:
            nu += 1
        cost[level + 1] = c
        used[level + 1] = nu
        level += 1
    return best


# ------------------------------------------------------------- fallback side


def _nz4_search_py(level_masks_py, k, max_solutions):
    sols = []
    choice = [0] * k
    xs = [0] * (k + 1)
    ys = [0] * (k + 1)
    level = 0
    while level >= 0:
        choice[level] += 1
        if choice[level] > 3:
            choice[level] = 0
            level -= 1
            continue
        c = choice[level]
        bit = 1 << level
        x = xs[level] | (bit if c & 2 else 0)
        y = ys[level] | (bit if c & 1 else 0)
        if any(not ((x & m).bit_count() & 1 or (y & m).bit_count() & 1) for m in level_masks_py[level]):
            continue
        if level == k - 1:
            sols.append((x, y))
            if len(sols) >= max_solutions:
                break
            continue
        xs[level + 1], ys[level + 1] = x, y
        level += 1
    return sols


def _even_masks_np(basis):
    out = np.zeros(1, dtype=np.uint64)
    for b in basis:
        out = np.concatenate([out, out ^ np.uint64(b)])
    return out


def _even_masks_pyint(basis):
    out = [0]
    for b in basis:
        out += [x ^ b for x in out]
    return out


def _cover_bnb_py(pivot_lists, cand_masks, cand_weights, group_weights, group_min, pair_min, full, max_members,
                  best_init):
    best = best_init

    def lower_bound(mask):
        total, most, b = 0, 0, 0
        while mask:
            if mask & 1:
                total += group_weights[b]
                most = max(most, group_min[b])
            mask >>= 1
            b += 1
        return max(total, most)

    path = []  # (pivot, chosen candidate) per level

    def rec(U, cur, depth):
        nonlocal best
        p = (U & -U).bit_length() - 1
        for j in pivot_lists[p]:
            w = cand_weights[j]
            if cur + w >= best:
                break
            # canonical order: a member holding an earlier pivot must come after that pivot's member
            if any(j < ji and cand_masks[j] >> pi & 1 for pi, ji in path):
                continue
            nU = U & ~cand_masks[j]
            if nU == 0:
                best = cur + w
                continue
            if depth + 1 >= max_members or cur + w + lower_bound(nU) >= best:
                continue
            if depth + 2 == max_members:
                bits = [b for b in range(len(group_weights)) if nU >> b & 1]
                if cur + w + max(pair_min[a][b] for i, a in enumerate(bits) for b in bits[i:]) >= best:
                    continue
            path.append((p, j))
            rec(nU, cur + w, depth + 1)
            path.pop()

    if full:
        rec(full, 0, 0)
    else:
        best = min(best, 0)
    return best


def _label_bnb_py(levels, rest_w, order, nvars, k, best_init):
    best = best_init
    x = [0] * nvars

    def rec(level, cost, used):
        nonlocal best
        for v in order:
            hi = v >> used
            if hi & (hi + 1):
                continue  # members are numbered in order of first use
            x[level] = v
            c = cost
            for sig, w in levels[level]:
                lab, i = 0, 0
                while sig:
                    if sig & 1:
                        lab ^= x[i]
                    sig >>= 1
                    i += 1
                if not lab:
                    break
                c += w * lab.bit_count()
            else:
                if c + rest_w[level] >= best:
                    continue
                if level == nvars - 1:
                    best = c
                    continue
                nu = used
                while nu < k and v >> nu & 1:
                    nu += 1
                rec(level + 1, c, nu)

    if nvars:
        rec(0, 0, 0)
    return best


# ------------------------------------------------------------------ dispatch


def nz4_search(level_masks, k, max_solutions=1, use_numba=None):
    """Enumerate pairs ``(x, y)`` of cotree bitmasks giving nowhere-zero flows.

    ``level_masks[i]`` lists the cotree masks of the tree edges whose constraint
    becomes decidable once cotree indices ``0..i`` are assigned.  Cotree index
    ``i`` takes value ``2*x_i + y_i`` which is never zero; a tree edge with mask
    ``M`` takes value ``2*par(x & M) + par(y & M)``, which must be nonzero.
    """
    use_numba = NUMBA_ENABLED if use_numba is None else (use_numba and numba is not None)
    if k == 0:
        return [(0, 0)] if max_solutions > 0 else []
    if use_numba and k <= MAX_BITS:
        ptr = np.zeros(k + 1, dtype=np.int64)
        flat = []
        for i in range(k):
            lm = level_masks[i]
            flat.extend(lm)
            ptr[i + 1] = len(flat)
        flat_arr = np.array(flat, dtype=np.uint64) if flat else np.zeros(0, dtype=np.uint64)
        xs, ys, found = _nz4_search_nb(ptr, flat_arr, k, max_solutions)
        return [(int(xs[i]), int(ys[i])) for i in range(found)]
    return _nz4_search_py([list(lm) for lm in level_masks], k, max_solutions)


def even_masks(basis, use_numba=None):
    """All ``2**len(basis)`` XOR combinations of ``basis`` (Python ints)."""
    use_numba = NUMBA_ENABLED if use_numba is None else (use_numba and numba is not None)
    wide = any(b >> MAX_BITS for b in basis)
    if wide:
        return _even_masks_pyint(list(basis))
    arr = np.array(basis, dtype=np.uint64) if len(basis) else np.zeros(0, dtype=np.uint64)
    if use_numba:
        return [int(x) for x in _even_masks_nb(arr)]
    return [int(x) for x in _even_masks_np(arr)]


def cover_bnb(cand_masks, cand_weights, group_weights, full, max_members, best_init, use_numba=None):
    """Minimum total weight of at most ``max_members`` candidate masks whose union is ``full``.

    Candidates must be sorted by weight.  Returns ``best_init`` when nothing
    beats it.
    """
    use_numba = NUMBA_ENABLED if use_numba is None else (use_numba and numba is not None)
    nbits = len(group_weights)
    pivot_lists = [[] for _ in range(nbits)]
    for j, msk in enumerate(cand_masks):
        b = 0
        mm = msk
        while mm:
            if mm & 1:
                pivot_lists[b].append(j)
            mm >>= 1
            b += 1
    # candidates are sorted by weight, so the head of each pivot list is the cheapest through that group
    big = sum(int(w) for w in cand_weights) + 1
    group_min = [cand_weights[lst[0]] if lst else big for lst in pivot_lists]
    # pair_min[a][b]: cheapest candidate holding groups a and b (the list order is by weight)
    pair_min = [[big] * nbits for _ in range(nbits)]
    for a in range(nbits):
        for j in pivot_lists[a]:
            mm = cand_masks[j] >> a
            b = a
            while mm:
                if mm & 1 and pair_min[a][b] == big:
                    pair_min[a][b] = cand_weights[j]
                mm >>= 1
                b += 1
    if use_numba and nbits <= MAX_BITS and full:
        ptr = np.zeros(nbits + 1, dtype=np.int64)
        for b in range(nbits):
            ptr[b + 1] = ptr[b] + len(pivot_lists[b])
        idx = np.array([j for lst in pivot_lists for j in lst], dtype=np.int64)
        return int(_cover_bnb_nb(ptr, idx, np.array(cand_masks, dtype=np.uint64),
                                 np.array(cand_weights, dtype=np.int64),
                                 np.array(group_weights, dtype=np.int64),
                                 np.array(group_min, dtype=np.int64),
                                 np.array(pair_min, dtype=np.int64).reshape(nbits, nbits),
                                 np.uint64(full), max_members, best_init))
    return _cover_bnb_py(pivot_lists, list(cand_masks), list(cand_weights), list(group_weights), group_min,
                         pair_min, full, max_members, best_init)


def label_bnb(groups, nvars, k, best_init, use_numba=None):
    """Minimum of ``sum_g w_g * popcount(label_g)`` over nowhere-zero labellings.

    ``groups`` is a list of ``(sig, w)``: the label of a group is the XOR of the
    values ``x_i`` (each in ``0 .. 2**k - 1``) of the variables ``i`` in the
    bitmask ``sig``, and must be nonzero.  With the variables the coefficients
    of a cycle-space basis, coordinate ``j`` of the labels is the ``j``-th even
    subgraph of a ``k``-member cover and the objective is the cover length.
    Returns ``best_init`` when nothing beats it.
    """
    use_numba = NUMBA_ENABLED if use_numba is None else (use_numba and numba is not None)
    if nvars == 0:
        return 0 if not groups else best_init
    levels = [[] for _ in range(nvars)]
    for sig, w in groups:
        if not sig:
            return best_init  # an edge no even subgraph contains (a bridge)
        levels[sig.bit_length() - 1].append((sig, w))
    total = [sum(w for _, w in lv) for lv in levels]
    rest_w = [sum(total[i + 1:]) for i in range(nvars)]
    # cheap labels first: singletons before pairs, zero last (it only defers coverage)
    order = sorted(range(1 << k), key=lambda v: (v.bit_count() if v else k + 1, v))
    if use_numba and nvars <= MAX_BITS:
        ptr = np.zeros(nvars + 1, dtype=np.int64)
        for i in range(nvars):
            ptr[i + 1] = ptr[i] + len(levels[i])
        flat = [g for lv in levels for g in lv]
        return int(_label_bnb_nb(ptr, np.array([g[0] for g in flat], dtype=np.int64),
                                 np.array([g[1] for g in flat], dtype=np.int64),
                                 np.array(rest_w, dtype=np.int64), np.array(order, dtype=np.int64),
                                 nvars, k, best_init))
    return _label_bnb_py(levels, rest_w, order, nvars, k, best_init)
