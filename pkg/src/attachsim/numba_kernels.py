"""Compiled hot loops for the graph processes and their online observers.

Everything here mirrors the pure-Python implementations bit for bit: the
same xoshiro256++ stream, the same rejection sampling, the same Fenwick-tree
prefix search over exactly scaled integer weights. The Python side is the
readable contract; these kernels run million-step processes in well under a
second.

Weight scaling: with delta = num/den, every weight is multiplied by
S = den*m so that all masses are integers:

    existing vertex x:  S*deg(x) + m*num
    self (loop) entry:  S*(deg(t+1) + 1) + i*num          (sub-step i)
    total mass:         S*(2*m*t + 2*i - 1) + (m*t + i)*num

The Fenwick tree stores plain degrees; the delta contribution is linear in
the vertex index and is folded in during the descent, so one tree serves
every delta. All arithmetic stays below 2**62 (validated at config time),
hence int64 is exact.

Loops are drawn first as ``u >= mass_of_existing_vertices`` so that the
integer sampler and the exact rational probability vector order the outcome
space identically (vertices 1..t, then self).
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

U0 = np.uint64(0)
U17 = np.uint64(17)
U23 = np.uint64(23)
U45 = np.uint64(45)
U64 = np.uint64(64)


@njit(uint64(uint64, uint64), cache=True, nogil=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (U64 - k))


@njit(cache=True, nogil=True, inline="always")
def _next_u64(s):
    """xoshiro256++ step on a 4-word uint64 state array (in place)."""
    s0, s1, s2, s3 = s[0], s[1], s[2], s[3]
    result = _rotl(s0 + s3, U23) + s0
    t = s1 << U17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, U45)
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return result


@njit(cache=True, nogil=True, inline="always")
def _randbelow(s, n):
    """Uniform uint64 in [0, n), rejection sampled (n >= 1)."""
    threshold = (U0 - n) % n
    while True:
        x = _next_u64(s)
        if x >= threshold:
            return x % n


@njit(cache=True, nogil=True, inline="always")
def _fenwick_add(tree, cap, i, v):
    while i <= cap:
        tree[i] += v
        i += i & (-i)


@njit(cache=True, nogil=True, inline="always")
def _fenwick_search(tree, top_bit, limit, scale, lin, u):
    """Smallest k in [1, limit] with scale*prefdeg(k) + k*lin > u.

    ``lin`` may be negative (delta < 0), so the descent must never step past
    ``limit``: beyond it the stored degrees are zero and the combined prefix
    would no longer be monotone.
    """
    pos = 0
    acc = 0  # scale*prefdeg(pos) + pos*lin
    bit = top_bit
    while bit:
        npos = pos + bit
        if npos <= limit:
            cand = acc + scale * tree[npos] + bit * lin
            if cand <= u:
                pos = npos
                acc = cand
        bit >>= 1
    return pos + 1


@njit(cache=True, nogil=True)
def pam_stream(m, num, den, only_v1_loops, t_max, rng_state):
    """Run the preferential attachment process from t=1 to t=t_max.

    Vertex 1 starts with m loops (degree 2m). Each later vertex t+1 spends
    its m edges one at a time; edge i picks an existing vertex x with weight
    deg(x)+delta or loops back with weight deg(t+1)+1+i*delta/m (the loop
    branch is disabled when only_v1_loops is set, rescaling mass onto [t]).

    Returns (targets, is_loop, degrees): flat arrays of the m*(t_max-1)
    ordered selections and the final per-vertex degrees (1-indexed).
    """
    scale = den * m
    lin = m * num
    n_sel = (t_max - 1) * m
    targets = np.empty(n_sel, np.int64)
    is_loop = np.zeros(n_sel, np.uint8)
    deg = np.zeros(t_max + 1, np.int64)
    tree = np.zeros(t_max + 1, np.int64)
    top_bit = 1
    while top_bit * 2 <= t_max:
        top_bit *= 2

    deg[1] = 2 * m
    _fenwick_add(tree, t_max, 1, 2 * m)
    sumdeg = 2 * m  # total degree over completed vertices [t], mid-step aware

    k = 0
    for t in range(1, t_max):
        dnew = 0  # degree accrued so far by vertex t+1
        for i in range(1, m + 1):
            mass_old = scale * sumdeg + t * lin
            if only_v1_loops:
                total = mass_old
            else:
                total = scale * (2 * m * t + 2 * i - 1) + (m * t + i) * num
            u = np.int64(_randbelow(rng_state, np.uint64(total)))
            if (not only_v1_loops) and u >= mass_old:
                targets[k] = t + 1
                is_loop[k] = 1
                dnew += 2
            else:
                v = _fenwick_search(tree, top_bit, t, scale, lin, u)
                targets[k] = v
                _fenwick_add(tree, t_max, v, 1)
                deg[v] += 1
                sumdeg += 1
                dnew += 1
            k += 1
        deg[t + 1] = dnew
        _fenwick_add(tree, t_max, t + 1, dnew)
        sumdeg += dnew
    return targets, is_loop, deg


@njit(cache=True, nogil=True)
def uam_stream(m, t_max, rng_state):
    """Run the uniform attachment process: vertex t+1 picks m uniform
    targets in [t] with repetition, never looping.

    Returns (targets, degrees); vertex 1 starts with degree 0.
    """
    n_sel = (t_max - 1) * m
    targets = np.empty(n_sel, np.int64)
    deg = np.zeros(t_max + 1, np.int64)
    k = 0
    for t in range(1, t_max):
        for _ in range(m):
            v = 1 + np.int64(_randbelow(rng_state, np.uint64(t)))
            targets[k] = v
            deg[v] += 1
            k += 1
        deg[t + 1] = m
    return targets, deg


@njit(cache=True, nogil=True)
def sample_frozen_counts(deg, t, sumdeg, dnew, m, num, den, i, only_v1_loops,
                         n_draws, rng_state):
    """Draw the sub-step-i selection n_draws times from a frozen mid-step
    state without committing, tallying hits per vertex (index 0 = self).

    Used to validate the integer sampler against the exact rational law.
    """
    counts = np.zeros(t + 2, np.int64)
    scale = den * m
    lin = m * num
    tree = np.zeros(t + 1, np.int64)
    for v in range(1, t + 1):
        _fenwick_add(tree, t, v, deg[v])
    top_bit = 1
    while top_bit * 2 <= t:
        top_bit *= 2
    mass_old = scale * sumdeg + t * lin
    if only_v1_loops:
        total = mass_old
    else:
        total = mass_old + scale * (dnew + 1) + i * num
    for _ in range(n_draws):
        u = np.int64(_randbelow(rng_state, np.uint64(total)))
        if (not only_v1_loops) and u >= mass_old:
            counts[0] += 1
        else:
            counts[_fenwick_search(tree, top_bit, t, scale, lin, u)] += 1
    return counts


@njit(cache=True, nogil=True)
def frozen_step_hit_counts(deg, member, t, m, num, den, n_draws, rng_state):
    """Replay the restricted-loops step (all m edges into [t]) n_draws times
    from a frozen state, tallying how many edges hit flagged vertices
    (with multiplicity). Returns counts over the hit total a in {0..m}.

    Validates the simulated one-step law against its closed form.
    """
    scale = den * m
    lin = m * num
    counts = np.zeros(m + 1, np.int64)
    base_tree = np.zeros(t + 1, np.int64)
    for v in range(1, t + 1):
        _fenwick_add(base_tree, t, v, deg[v])
    top_bit = 1
    while top_bit * 2 <= t:
        top_bit *= 2
    sumdeg0 = 0
    for v in range(1, t + 1):
        sumdeg0 += deg[v]
    tree = np.zeros(t + 1, np.int64)
    for _ in range(n_draws):
        tree[:] = base_tree
        sumdeg = sumdeg0
        hits = 0
        for _i in range(m):
            total = scale * sumdeg + t * lin
            u = np.int64(_randbelow(rng_state, np.uint64(total)))
            v = _fenwick_search(tree, top_bit, t, scale, lin, u)
            if member[v]:
                hits += 1
            _fenwick_add(tree, t, v, 1)
            sumdeg += 1
        counts[hits] += 1
    return counts


@njit(cache=True, nogil=True)
def descendant_scan(targets, is_loop, m, t_max, root, init_y, sched, out_x, out_y):
    """Replay a selection stream, tracking the descendant tree of ``root``.

    A vertex joins when at least one of its non-loop selections hits a
    current member; its contribution to the members' total degree is its own
    final step degree plus one per member-hitting selection. Records (X, Y)
    at each scheduled time; returns (X, Y, root_loops) at t_max, where
    root_loops is the loop count of the root's own step (-1 if root == 1).
    """
    member = np.zeros(t_max + 1, np.uint8)
    x_count = 0
    y_total = 0
    root_loops = -1
    if root == 1:
        member[1] = 1
        x_count = 1
        y_total = init_y
    si = 0
    n_sched = sched.shape[0]
    while si < n_sched and sched[si] <= 1:  # snapshots of the initial state
        out_x[si] = x_count
        out_y[si] = y_total
        si += 1
    k = 0
    for v in range(2, t_max + 1):
        if v == root:
            loops = 0
            for _ in range(m):
                if is_loop[k]:
                    loops += 1
                k += 1
            member[root] = 1
            x_count = 1
            y_total = m + loops
            root_loops = loops
        elif v > root:
            hits = 0
            loops = 0
            for _ in range(m):
                if is_loop[k]:
                    loops += 1
                elif member[targets[k]]:
                    hits += 1
                k += 1
            if hits > 0:
                member[v] = 1
                x_count += 1
                y_total += hits + m + loops
        else:
            k += m
        while si < n_sched and sched[si] == v:
            out_x[si] = x_count
            out_y[si] = y_total
            si += 1
    return x_count, y_total, root_loops


@njit(cache=True, nogil=True)
def matching_scan(targets, is_loop, m, t_max, pick_oldest, sched, out_unmatched):
    """Replay a stream through the greedy online matching.

    The arriving vertex pairs with the youngest currently-unmatched non-loop
    target (oldest under pick_oldest). Records the unmatched count X at
    scheduled times; returns (X, matched_pairs) at t_max.
    """
    unmatched = np.zeros(t_max + 1, np.uint8)
    unmatched[1] = 1
    x_count = 1
    pairs = 0
    si = 0
    n_sched = sched.shape[0]
    while si < n_sched and sched[si] <= 1:
        out_unmatched[si] = x_count
        si += 1
    k = 0
    for v in range(2, t_max + 1):
        chosen = 0
        for _ in range(m):
            tgt = targets[k]
            if (not is_loop[k]) and unmatched[tgt]:
                if chosen == 0:
                    chosen = tgt
                elif pick_oldest:
                    if tgt < chosen:
                        chosen = tgt
                elif tgt > chosen:
                    chosen = tgt
            k += 1
        if chosen:
            unmatched[chosen] = 0
            x_count -= 1
            pairs += 1
        else:
            unmatched[v] = 1
            x_count += 1
        while si < n_sched and sched[si] == v:
            out_unmatched[si] = x_count
            si += 1
    return x_count, pairs


@njit(cache=True, nogil=True)
def independent_scan(targets, is_loop, m, t_max, sched, out_i, out_z):
    """Replay a stream through the greedy online independent set.

    The arriving vertex joins when none of its selections (loops aside) hit
    a current insider; Z accumulates insider hits with multiplicity.
    Records (|I|, Z) at scheduled times; returns them at t_max.
    """
    insider = np.zeros(t_max + 1, np.uint8)
    insider[1] = 1
    i_count = 1
    z_total = 0
    si = 0
    n_sched = sched.shape[0]
    while si < n_sched and sched[si] <= 1:
        out_i[si] = i_count
        out_z[si] = z_total
        si += 1
    k = 0
    for v in range(2, t_max + 1):
        hits = 0
        for _ in range(m):
            if (not is_loop[k]) and insider[targets[k]]:
                hits += 1
            k += 1
        z_total += hits
        if hits == 0:
            insider[v] = 1
            i_count += 1
        while si < n_sched and sched[si] == v:
            out_i[si] = i_count
            out_z[si] = z_total
            si += 1
    return i_count, z_total


@njit(cache=True, nogil=True)
def descendant_flags(targets, is_loop, m, t_max, root):
    """Membership array of the descendant tree of ``root`` at t_max."""
    member = np.zeros(t_max + 1, np.uint8)
    if root >= 1:
        member[root] = 1
    k = 0
    for v in range(2, t_max + 1):
        if v > root:
            joined = False
            for _ in range(m):
                if (not is_loop[k]) and member[targets[k]]:
                    joined = True
                k += 1
            if joined:
                member[v] = 1
        else:
            k += m
    return member


def warm_up():
    """Trigger JIT compilation of every kernel with tiny inputs."""
    state = np.array([1, 2, 3, 4], dtype=np.uint64)
    sched = np.array([3], dtype=np.int64)
    out_a = np.zeros(1, np.int64)
    out_b = np.zeros(1, np.int64)
    tgt, lp, deg = pam_stream(2, 1, 2, False, 3, state.copy())
    pam_stream(1, -1, 1, True, 3, state.copy())
    descendant_scan(tgt, lp, 2, 3, 1, 4, sched, out_a, out_b)
    matching_scan(tgt, lp, 2, 3, False, sched, out_a)
    independent_scan(tgt, lp, 2, 3, sched, out_a, out_b)
    descendant_flags(tgt, lp, 2, 3, 1)
    sample_frozen_counts(deg, 3, deg[1:4].sum(), 0, 2, 1, 2, 1, False, 10,
                         state.copy())
    frozen_step_hit_counts(deg, np.ones(4, np.uint8), 3, 2, 1, 2, 10,
                           state.copy())
    tgt_u, _ = uam_stream(2, 3, state.copy())
    descendant_scan(tgt_u, np.zeros_like(tgt_u, dtype=np.uint8), 2, 3, 2, 0,
                    sched, out_a, out_b)
