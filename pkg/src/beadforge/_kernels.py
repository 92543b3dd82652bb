"""Hot Monte Carlo inner loops.

Every kernel is a plain Python function over numpy arrays plus a numpy
``Generator`` and is JIT-compiled with numba at import time. Setting the
environment variable ``BEADFORGE_NO_NUMBA=1`` (or running without numba
installed) selects the uncompiled path instead. Both paths consume the
generator draw-by-draw in the same order, so results are bit-for-bit
identical either way; ``beadforge bench`` compares the two.

Kernels draw only uniforms (plus ``beta``/``gamma`` where numba supports the
Generator method directly); all other distribution sampling lives outside.
"""

from __future__ import annotations

import os

import numpy as np

NUMBA_ENV_FLAG = "BEADFORGE_NO_NUMBA"

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

_disabled = os.environ.get(NUMBA_ENV_FLAG, "").strip().lower() in ("1", "true", "yes")
USING_NUMBA = _numba is not None and not _disabled


def _jit(fn):
    if USING_NUMBA:
        return _numba.njit(cache=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# leaf kernels (self-contained; these are the ones `beadforge bench` times)
# ---------------------------------------------------------------------------


def _crp_ordered_py(alpha, theta, n, gen, sizes, order, cust):
    """Ordered two-parameter CRP with ``n`` customers.

    sizes[t] = customers at the table with birth index t (0-based);
    order[j] = birth index of the j-th table in left-to-right spinal order;
    cust[m]  = birth index of customer m's table.
    Returns the number of tables k.

    Seating uses a size-biased proposal (uniform customer) thinned by
    (size - alpha)/size, so a step costs O(1) instead of an O(k) scan.
    Placement of a new table is a single uniform draw over the k+1
    weighted slots.
    """
    sizes[0] = 1
    order[0] = 0
    cust[0] = 0
    k = 1
    for m in range(1, n):
        u = gen.random() * (m + theta)
        if u < m - k * alpha:
            while True:
                j = int(gen.random() * m)
                if j >= m:
                    j = m - 1
                t = cust[j]
                if gen.random() * sizes[t] < sizes[t] - alpha:
                    break
            sizes[t] += 1
            cust[m] = t
        else:
            u2 = gen.random() * (k * alpha + theta)
            if u2 < theta:
                slot = k
            else:
                slot = int((u2 - theta) / alpha)
                if slot >= k:
                    slot = k - 1
            for j in range(k, slot, -1):
                order[j] = order[j - 1]
            order[slot] = k
            sizes[k] = 1
            cust[m] = k
            k += 1
    return k


def _coin_walk_py(masses, start, alpha, theta, gen):
    """First-success walk over ``masses[start:]``; returns the selected index.

    Atom i is examined left to right and selected with probability
    p(u) = (1-u)*theta / ((1-u)*theta + u*alpha) where u is the fraction of
    the remaining mass lying strictly after atom i. The last atom has u = 0,
    p = 1, so the walk always terminates; the explicit fall-through guards
    against floating-point underflow of the running remainder.
    """
    last = len(masses) - 1
    rem = 0.0
    for i in range(start, last + 1):
        rem += masses[i]
    for i in range(start, last):
        if rem <= 0.0:
            return i
        w = masses[i] / rem
        if w > 1.0:
            w = 1.0
        p = w * theta / (w * theta + (1.0 - w) * alpha)
        if gen.random() < p:
            return i
        rem -= masses[i]
    return last


def _merge_cuts_py(masses, offsets, alpha, thetas, gen, out_str, out_atom):
    """Randomised cut sequence merging k strings of beads into one.

    ``masses`` holds the atom masses of all strings back to back;
    ``offsets[i]:offsets[i+1]`` is string i. Repeatedly: select a string with
    probability proportional to its remaining mass, then run the
    (alpha, thetas[i]) first-success walk on its remainder; the selected atom
    becomes the next cut and the prefix through it is consumed. A string with
    no atoms left leaves the pool; the loop ends when all atoms are consumed.
    Returns the number of cuts written to out_str/out_atom.
    """
    k = len(offsets) - 1
    heads = np.empty(k, dtype=np.int64)
    rem = np.empty(k, dtype=np.float64)
    total = 0.0
    for i in range(k):
        heads[i] = offsets[i]
        s = 0.0
        for j in range(offsets[i], offsets[i + 1]):
            s += masses[j]
        rem[i] = s
        total += s
    nc = 0
    while True:
        alive = 0
        for i in range(k):
            if heads[i] < offsets[i + 1]:
                alive += 1
        if alive == 0:
            break
        sel = -1
        if total > 0.0:
            x = gen.random() * total
            acc = 0.0
            for i in range(k):
                if heads[i] < offsets[i + 1]:
                    acc += rem[i]
                    if x < acc:
                        sel = i
                        break
        if sel < 0:
            for i in range(k):
                if heads[i] < offsets[i + 1]:
                    sel = i
                    break
        # (alpha, thetas[sel]) walk on the remainder of string sel
        th = thetas[sel]
        last = offsets[sel + 1] - 1
        r = rem[sel]
        pick = last
        for j in range(heads[sel], last):
            if r <= 0.0:
                pick = j
                break
            w = masses[j] / r
            if w > 1.0:
                w = 1.0
            p = w * th / (w * th + (1.0 - w) * alpha)
            if gen.random() < p:
                pick = j
                break
            r -= masses[j]
        out_str[nc] = sel
        out_atom[nc] = pick
        nc += 1
        seg = 0.0
        for j in range(heads[sel], pick + 1):
            seg += masses[j]
        rem[sel] -= seg
        total -= seg
        heads[sel] = pick + 1
        if heads[sel] >= offsets[sel + 1]:
            total -= rem[sel]
            rem[sel] = 0.0
    return nc


def _grow_tree_py(alpha, theta, n, gen, parent, child0, child1, nleaves, minlabel, label):
    """Binary (alpha, theta) tree growth with n leaves; returns vertex count.

    Vertex 0 is the root (single child); leaf for label L sits at vertex
    2L - 1. Arrays must have length >= 2n. Each insertion walks down from the
    top branch point: weight alpha on the current root edge, (m - alpha) on
    the subtree without the smallest label, (s - m - 1 + theta) on the one
    with it, recursing until an edge or a single-leaf subtree is hit.
    """
    parent[0] = -1
    child0[0] = 1
    child1[0] = -1
    label[0] = 0
    nleaves[0] = 1
    minlabel[0] = 1
    parent[1] = 0
    child0[1] = -1
    child1[1] = -1
    label[1] = 1
    nleaves[1] = 1
    minlabel[1] = 1
    nv = 2
    for lbl in range(2, n + 1):
        u = 0
        v = child0[0]
        if lbl > 2:
            while label[v] == 0:
                c0 = child0[v]
                c1 = child1[v]
                if minlabel[c0] < minlabel[c1]:
                    sp = c0
                    nsp = c1
                else:
                    sp = c1
                    nsp = c0
                w_non = nleaves[nsp] - alpha
                w_sp = nleaves[sp] - 1.0 + theta
                r = gen.random() * (alpha + w_non + w_sp)
                if r < alpha:
                    break
                nleaves[v] += 1
                u = v
                if r < alpha + w_non:
                    v = nsp
                else:
                    v = sp
        b = nv
        leaf = nv + 1
        nv += 2
        if child0[u] == v:
            child0[u] = b
        else:
            child1[u] = b
        parent[b] = u
        child0[b] = v
        child1[b] = leaf
        label[b] = 0
        nleaves[b] = nleaves[v] + 1
        minlabel[b] = minlabel[v]
        parent[v] = b
        parent[leaf] = b
        child0[leaf] = -1
        child1[leaf] = -1
        label[leaf] = lbl
        nleaves[leaf] = 1
        minlabel[leaf] = lbl
    return nv


crp_ordered = _jit(_crp_ordered_py)
coin_walk = _jit(_coin_walk_py)
merge_cuts = _jit(_merge_cuts_py)
grow_tree = _jit(_grow_tree_py)

# leaf kernels exposed to the benchmark (python originals kept alongside)
LEAF_KERNELS = {
    "crp_ordered": _crp_ordered_py,
    "coin_walk": _coin_walk_py,
    "merge_cuts": _merge_cuts_py,
    "grow_tree": _grow_tree_py,
}


# ---------------------------------------------------------------------------
# replicate batches (composed from the kernels above)
# ---------------------------------------------------------------------------


def _crp_coseat_reps_py(alpha, theta, reps, gen):
    """Number of replicates (out of reps) where customers 1 and 2 co-seat."""
    sizes = np.empty(2, dtype=np.int64)
    order = np.empty(2, dtype=np.int64)
    cust = np.empty(2, dtype=np.int64)
    hits = 0
    for _ in range(reps):
        k = crp_ordered(alpha, theta, 2, gen, sizes, order, cust)
        if k == 1:
            hits += 1
    return hits


def _crp_k_reps_py(alpha, theta, n, reps, gen, out_k):
    sizes = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    cust = np.empty(n, dtype=np.int64)
    for r in range(reps):
        out_k[r] = crp_ordered(alpha, theta, n, gen, sizes, order, cust)


def _crp_ranked_reps_py(alpha, theta, n, reps, gen, out):
    """Top-3 ranked atom masses of a fresh (alpha, theta) bead string per rep."""
    sizes = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    cust = np.empty(n, dtype=np.int64)
    for r in range(reps):
        k = crp_ordered(alpha, theta, n, gen, sizes, order, cust)
        t1 = 0
        t2 = 0
        t3 = 0
        for j in range(k):
            s = sizes[j]
            if s > t1:
                t3 = t2
                t2 = t1
                t1 = s
            elif s > t2:
                t3 = t2
                t2 = s
            elif s > t3:
                t3 = s
        out[r, 0] = t1 / n
        out[r, 1] = t2 / n
        out[r, 2] = t3 / n


def _crp_first_part_reps_py(alpha, theta, n, reps, gen, out):
    sizes = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    cust = np.empty(n, dtype=np.int64)
    for r in range(reps):
        crp_ordered(alpha, theta, n, gen, sizes, order, cust)
        out[r] = sizes[order[0]]


def _crp_table1_frac_reps_py(alpha, theta, n, reps, gen, out):
    """Occupancy fraction of the first-born table at step n."""
    sizes = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    cust = np.empty(n, dtype=np.int64)
    for r in range(reps):
        crp_ordered(alpha, theta, n, gen, sizes, order, cust)
        out[r] = sizes[0] / n


def _crp_match_reps_py(alpha, theta, n, reps, gen, out):
    """Sum of squared atom masses (two-draw coincidence probability) per rep."""
    sizes = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    cust = np.empty(n, dtype=np.int64)
    for r in range(reps):
        k = crp_ordered(alpha, theta, n, gen, sizes, order, cust)
        s = 0.0
        for j in range(k):
            m = sizes[j] / n
            s += m * m
        out[r] = s


def _crp_split_reps_py(alpha, theta, n, reps, gen, out):
    """(before, atom, after) mass split from the first-success walk, per rep."""
    sizes = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    cust = np.empty(n, dtype=np.int64)
    masses = np.empty(n, dtype=np.float64)
    for r in range(reps):
        k = crp_ordered(alpha, theta, n, gen, sizes, order, cust)
        for j in range(k):
            masses[j] = sizes[order[j]] / n
        idx = coin_walk(masses[:k], 0, alpha, theta, gen)
        before = 0.0
        for j in range(idx):
            before += masses[j]
        after = 0.0
        for j in range(idx + 1, k):
            after += masses[j]
        out[r, 0] = before
        out[r, 1] = masses[idx]
        out[r, 2] = after


def _stick_beads_ranked_reps_py(alpha, theta, n_sticks, crp_n, reps, gen, out, out_resid):
    """Stick-breaking bead construction: top-2 atom masses and residual mass.

    Sticks follow Beta(1, theta) stick breaking; each stick is shattered by an
    independent (alpha, 0) bead string of resolution crp_n.
    """
    sizes = np.empty(crp_n, dtype=np.int64)
    order = np.empty(crp_n, dtype=np.int64)
    cust = np.empty(crp_n, dtype=np.int64)
    for r in range(reps):
        v = 0.0
        t1 = 0.0
        t2 = 0.0
        for _ in range(n_sticks):
            y = gen.beta(1.0, theta)
            stick = (1.0 - v) * y
            v += stick
            k = crp_ordered(alpha, 0.0, crp_n, gen, sizes, order, cust)
            for j in range(k):
                m = stick * sizes[j] / crp_n
                if m > t1:
                    t2 = t1
                    t1 = m
                elif m > t2:
                    t2 = m
        out[r, 0] = t1
        out[r, 1] = t2
        out_resid[r] = 1.0 - v


def _merge_headline_reps_py(alpha, thetas, crp_n, reps, gen, out_first, out_top, out_match):
    """Merge k rescaled bead strings under a Dirichlet mass split, per rep.

    Records the mass of the first consumed segment, the two largest output
    atom masses and the coincidence functional (sum of squared atom masses).
    """
    k = len(thetas)
    sizes = np.empty(crp_n, dtype=np.int64)
    order = np.empty(crp_n, dtype=np.int64)
    cust = np.empty(crp_n, dtype=np.int64)
    masses = np.empty(k * crp_n, dtype=np.float64)
    offsets = np.empty(k + 1, dtype=np.int64)
    w = np.empty(k, dtype=np.float64)
    cut_s = np.empty(k * crp_n, dtype=np.int64)
    cut_a = np.empty(k * crp_n, dtype=np.int64)
    for r in range(reps):
        tot = 0.0
        for i in range(k):
            g = gen.gamma(thetas[i])
            w[i] = g
            tot += g
        for i in range(k):
            w[i] /= tot
        offsets[0] = 0
        pos = 0
        for i in range(k):
            kt = crp_ordered(alpha, thetas[i], crp_n, gen, sizes, order, cust)
            for j in range(kt):
                masses[pos] = w[i] * sizes[order[j]] / crp_n
                pos += 1
            offsets[i + 1] = pos
        nc = merge_cuts(masses[:pos], offsets, alpha, thetas, gen, cut_s, cut_a)
        s0 = cut_s[0]
        first = 0.0
        for j in range(offsets[s0], cut_a[0] + 1):
            first += masses[j]
        t1 = 0.0
        t2 = 0.0
        match = 0.0
        for j in range(pos):
            m = masses[j]
            match += m * m
            if m > t1:
                t2 = t1
                t1 = m
            elif m > t2:
                t2 = m
        out_first[r] = first
        out_top[r, 0] = t1
        out_top[r, 1] = t2
        out_match[r] = match


def _grow_first_part_reps_py(alpha, theta, n, reps, gen, out):
    """Size of the first table off the spine (next to the root) per grown tree."""
    parent = np.empty(2 * n, dtype=np.int64)
    c0 = np.empty(2 * n, dtype=np.int64)
    c1 = np.empty(2 * n, dtype=np.int64)
    nl = np.empty(2 * n, dtype=np.int64)
    ml = np.empty(2 * n, dtype=np.int64)
    lab = np.empty(2 * n, dtype=np.int64)
    for r in range(reps):
        grow_tree(alpha, theta, n, gen, parent, c0, c1, nl, ml, lab)
        top = c0[0]
        if ml[c0[top]] < ml[c1[top]]:
            out[r] = nl[c1[top]]
        else:
            out[r] = nl[c0[top]]


crp_coseat_reps = _jit(_crp_coseat_reps_py)
crp_k_reps = _jit(_crp_k_reps_py)
crp_ranked_reps = _jit(_crp_ranked_reps_py)
crp_first_part_reps = _jit(_crp_first_part_reps_py)
crp_table1_frac_reps = _jit(_crp_table1_frac_reps_py)
crp_match_reps = _jit(_crp_match_reps_py)
crp_split_reps = _jit(_crp_split_reps_py)
stick_beads_ranked_reps = _jit(_stick_beads_ranked_reps_py)
merge_headline_reps = _jit(_merge_headline_reps_py)
grow_first_part_reps = _jit(_grow_first_part_reps_py)

BATCH_KERNELS = {
    "crp_coseat_reps": _crp_coseat_reps_py,
    "crp_k_reps": _crp_k_reps_py,
    "crp_ranked_reps": _crp_ranked_reps_py,
    "crp_first_part_reps": _crp_first_part_reps_py,
    "crp_table1_frac_reps": _crp_table1_frac_reps_py,
    "crp_match_reps": _crp_match_reps_py,
    "crp_split_reps": _crp_split_reps_py,
    "stick_beads_ranked_reps": _stick_beads_ranked_reps_py,
    "merge_headline_reps": _merge_headline_reps_py,
    "grow_first_part_reps": _grow_first_part_reps_py,
}


def jit_leaf_kernel(name):
    """Compile (or fetch) the numba build of a leaf kernel, if numba exists."""
    if _numba is None:
        return None
    fn = LEAF_KERNELS[name]
    if USING_NUMBA:
        return globals()[name]
    return _numba.njit(cache=True)(fn)
