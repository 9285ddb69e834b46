"""Block-collapsing coupling between the m=1 and general-m processes.

Running the m=1 process with shift delta/m for m*t steps and merging each
consecutive block of m vertices into one produces, in law, the m-edge
process with shift delta. Edges (including loops and multiplicities) are
retained in creation order so the collapse is a pure relabeling
v_a -> w_ceil(a/m).

Two checks are exposed:

* ``transition_equivalence_check``: the fine process's probability of hitting
  a given block equals the coarse one-edge probability computed from the
  block's aggregate degree - an exact rational identity, checked on
  simulated prefixes (the returned difference must be 0).
* ``descendant_coupling_check``: pathwise, the coarse descendant tree of
  root r contains at least 1/m times the vertices of the fine descendant
  tree of root m*r.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .process import Model, ProcessConfig, advance_step, init_process
from . import numba_kernels as nk
from .rng import seed_state


@dataclass(frozen=True)
class RetainedGraph:
    """Full multigraph record: ``edges[k] = (creator, target)`` in creation
    order, loops as (v, v). The m-edge process on t vertices has m*t edges
    (vertex 1's initial loops included)."""

    n: int
    m: int
    edges: tuple[tuple[int, int], ...]

    def degrees(self) -> list[int]:
        deg = [0] * (self.n + 1)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


@dataclass(frozen=True)
class CoupledRun:
    fine: RetainedGraph
    coarse: RetainedGraph
    m: int
    delta: Fraction
    seed: int


def run_fine_process(m: int, delta, t: int, seed: int) -> RetainedGraph:
    """The m=1, shift delta/m process run to m*t vertices, edges retained."""
    delta = Fraction(delta)
    fine_n = m * t
    rng_state = np.array(seed_state(seed), dtype=np.uint64)
    fine_delta = delta / m
    targets, is_loop, _ = nk.pam_stream(
        1, fine_delta.numerator, fine_delta.denominator, False, fine_n,
        rng_state)
    edges = [(1, 1)]
    for a in range(2, fine_n + 1):
        k = a - 2
        edges.append((a, a if is_loop[k] else int(targets[k])))
    return RetainedGraph(fine_n, 1, tuple(edges))


def collapse(fine: RetainedGraph, m: int) -> RetainedGraph:
    """Merge vertex blocks {m(b-1)+1..mb} into b; edges map endpointwise."""
    if fine.n % m != 0:
        raise ValueError(
            f"vertex count {fine.n} is not divisible by block size {m}")
    edges = tuple(((u + m - 1) // m, (v + m - 1) // m) for u, v in fine.edges)
    return RetainedGraph(fine.n // m, fine.m * m, edges)


def coupled_run(m: int, delta, t: int, seed: int) -> CoupledRun:
    fine = run_fine_process(m, delta, t, seed)
    return CoupledRun(fine, collapse(fine, m), m, Fraction(delta), seed)


def descendant_count(graph: RetainedGraph, root: int,
                     t: int | None = None) -> int:
    """Size of the descendant tree of ``root`` among the first t vertices
    (all of them by default): a vertex joins by selecting (non-loop) a
    current member. Edges are grouped m per creator."""
    last = graph.n if t is None else min(t, graph.n)
    if root > last:
        return 0
    member = bytearray(graph.n + 1)
    member[root] = 1
    count = 1
    mm = graph.m
    for v in range(2, last + 1):
        if v <= root:
            continue
        base = (v - 1) * mm  # edges of creator v start here
        for k in range(base, base + mm):
            u = graph.edges[k][1]
            if u != v and member[u]:
                member[v] = 1
                count += 1
                break
    return count


def descendant_coupling_check(run: CoupledRun, r: int,
                              t: int | None = None) -> bool:
    """Pathwise X_coarse(t, r) >= X_fine(m*t, m*r) / m (at the final time
    by default)."""
    coarse_t = run.coarse.n if t is None else t
    x_coarse = descendant_count(run.coarse, r, coarse_t)
    x_fine = descendant_count(run.fine, run.m * r, run.m * coarse_t)
    return run.m * x_coarse >= x_fine


def transition_equivalence_check(fine_degrees, m: int, delta, t: int, i: int,
                               x: int) -> Fraction:
    """Exact difference between the fine-process mass of block x and the
    coarse one-edge probability at sub-step i of coarse step t -> t+1.

    ``fine_degrees[y]`` is the degree of fine vertex y just before fine
    vertex m*t+i places its edge (only y <= m*t+i-1 is read). ``x`` in
    [1, t] addresses an existing block; x == t+1 addresses the loop branch.
    Returns fine_prob - coarse_prob, which must be 0.
    """
    delta = Fraction(delta)
    fine_delta = delta / m
    fine_t = m * t + i - 1  # completed fine vertices
    fine_den = (2 + fine_delta) * fine_t + 1 + fine_delta
    coarse_den = (2 * m + delta) * t + 2 * i - 1 + i * delta / m

    if x == t + 1:
        partial = list(range(m * t + 1, m * t + i))  # earlier in-block fine vertices
        block_deg = sum(fine_degrees[y] for y in partial)
        fine_mass = (1 + fine_delta) + sum(
            fine_degrees[y] + fine_delta for y in partial)
        coarse_num = block_deg + 1 + i * delta / m
    elif 1 <= x <= t:
        block = range(m * (x - 1) + 1, m * x + 1)
        block_deg = sum(fine_degrees[y] for y in block)
        fine_mass = sum(fine_degrees[y] + fine_delta for y in block)
        coarse_num = block_deg + delta
    else:
        raise ValueError(f"block index must be in [1, t+1], got {x}")
    return fine_mass / fine_den - coarse_num / coarse_den


def transition_equivalence_suite(m: int, delta, t_max: int, prefixes: int,
                                 seed: int) -> list[str]:
    """Run ``prefixes`` independent fine prefixes to m*t_max vertices and
    check every (t, i, block) probability pair; returns failure strings."""
    delta = Fraction(delta)
    failures = []
    for p in range(prefixes):
        trial_seed = seed + p
        cfg = ProcessConfig(Model.PAM, 1, delta / m, t_max=m * t_max)
        state = init_process(cfg, trial_seed)
        while state.t < m * t_max:
            fine_t = state.t  # arriving fine vertex is fine_t + 1
            t, i = fine_t // m, fine_t % m + 1
            if t >= 1:
                for x in range(1, t + 2):
                    gap = transition_equivalence_check(
                        state.degrees, m, delta, t, i, x)
                    if gap != 0:
                        failures.append(
                            f"transition gap {gap} at seed={trial_seed} "
                            f"t={t} i={i} block={x}")
            advance_step(state)
    return failures


def descendant_coupling_suite(m: int, delta, t: int, r: int, trials: int,
                              seed: int) -> list[str]:
    """Check the pathwise descendant inequality over independent runs."""
    failures = []
    for k in range(trials):
        run = coupled_run(m, delta, t, seed + k)
        if not descendant_coupling_check(run, r):
            xc = descendant_count(run.coarse, r)
            xf = descendant_count(run.fine, m * r)
            failures.append(
                f"descendant inequality failed at seed={seed + k}: "
                f"m*X_coarse={m * xc} < X_fine={xf}")
    return failures
