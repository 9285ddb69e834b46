"""Step-by-step generators for the two age-biased graph processes.

Two models over growing vertex sets [t]:

* PAM (preferential attachment, additive shift delta): vertex 1 starts with
  m loops. Vertex t+1 spends m edges one at a time; just before its i-th
  edge, an existing vertex x is selected with probability

      (deg(x) + delta) / D_i,        D_i = (2m+delta)*t + 2i-1 + i*delta/m,

  and the edge loops back on t+1 itself with probability
  (deg(t+1) + 1 + i*delta/m) / D_i, where deg(t+1) counts the edges already
  placed this step (a loop adds 2). Requires delta >= -m. The
  ``ONLY_AT_VERTEX_ONE`` loops variant removes the self entry and
  renormalizes the same vertex weights over [t].

* UAM (uniform attachment): vertex t+1 selects m targets independently and
  uniformly from [t], repetitions allowed, no loops.

Selections are resolved by drawing one uniform integer below the exactly
scaled total mass and prefix-searching a Fenwick tree of degrees (see
``numba_kernels`` for the scaling scheme), so the realized law equals the
rational probability vector exactly, with no floating-point drift. Runs are
reproducible from (config, seed) alone.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .rng import Xoshiro256PP

MAX_SCALED_MASS = 1 << 62  # int64 headroom for the compiled kernels


class Model(enum.Enum):
    PAM = "pam"
    UAM = "uam"


class LoopsVariant(enum.Enum):
    ALLOWED = "allowed"
    ONLY_AT_VERTEX_ONE = "only_at_vertex_one"


class Selection(NamedTuple):
    target: int
    is_loop: bool


@dataclass(frozen=True)
class StepOutcome:
    """The ordered selections made by one arriving vertex."""

    new_vertex: int
    selections: tuple[Selection, ...]


@dataclass(frozen=True)
class ProcessConfig:
    model: Model
    m: int
    delta: Fraction = Fraction(0)
    loops_variant: LoopsVariant = LoopsVariant.ALLOWED
    t_max: int = 1000

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if self.t_max < 1:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if not isinstance(self.delta, Fraction):
            object.__setattr__(self, "delta", Fraction(self.delta))
        if self.model is Model.PAM:
            if self.delta < -self.m:
                raise ValueError(
                    f"delta below -m: delta={self.delta}, m={self.m}; "
                    "attachment weights would be negative"
                )
            self._check_int64_headroom()

    def _check_int64_headroom(self):
        num, den = self.delta.numerator, self.delta.denominator
        m, t = self.m, self.t_max
        worst = den * m * (2 * m * t + 2 * m) + (m * t + m) * abs(num)
        if worst >= MAX_SCALED_MASS:
            raise ValueError(
                "scaled sampling weights would overflow 64-bit integers for "
                f"m={m}, delta={self.delta}, t_max={t}"
            )

    @property
    def delta_num(self) -> int:
        return self.delta.numerator

    @property
    def delta_den(self) -> int:
        return self.delta.denominator


class Fenwick:
    """Fenwick tree over integer degrees with a combined-weight search.

    ``search_scaled`` finds the smallest k <= limit whose combined prefix
    scale*prefdeg(k) + k*lin exceeds u; the linear term carries the delta
    contribution so the tree itself never changes with delta.
    """

    __slots__ = ("_tree", "_cap", "_top_bit")

    def __init__(self, capacity: int):
        self._tree = [0] * (capacity + 1)
        self._cap = capacity
        bit = 1
        while bit * 2 <= capacity:
            bit *= 2
        self._top_bit = bit

    def add(self, i: int, v: int) -> None:
        cap = self._cap
        tree = self._tree
        while i <= cap:
            tree[i] += v
            i += i & (-i)

    def prefix(self, i: int) -> int:
        s = 0
        tree = self._tree
        while i > 0:
            s += tree[i]
            i -= i & (-i)
        return s

    def search_scaled(self, scale: int, lin: int, u: int, limit: int) -> int:
        pos = 0
        acc = 0
        bit = self._top_bit
        tree = self._tree
        while bit:
            npos = pos + bit
            if npos <= limit:
                cand = acc + scale * tree[npos] + bit * lin
                if cand <= u:
                    pos = npos
                    acc = cand
            bit >>= 1
        return pos + 1


@dataclass
class ProcessState:
    """Mutable state of a running process; owned by a single run."""

    config: ProcessConfig
    rng: Xoshiro256PP
    t: int
    degrees: list[int]  # degrees[0] unused; degrees[x] for vertex x
    sumdeg: int  # total degree over [t]
    fenwick: Fenwick | None
    seed: int

    @property
    def total_degree(self) -> int:
        return self.sumdeg

    def degree(self, x: int) -> int:
        return self.degrees[x]


def init_process(config: ProcessConfig, seed: int) -> ProcessState:
    """Fresh state at t=1: PAM starts with m loops on vertex 1 (degree 2m),
    UAM with an isolated vertex 1 (edges appear when vertex 2 attaches)."""
    rng = Xoshiro256PP(seed)
    if config.model is Model.PAM:
        fen = Fenwick(config.t_max)
        fen.add(1, 2 * config.m)
        return ProcessState(config, rng, 1, [0, 2 * config.m], 2 * config.m,
                            fen, seed)
    return ProcessState(config, rng, 1, [0, 0], 0, None, seed)


def attachment_distribution(
    state: ProcessState,
    i: int = 1,
    partial: Sequence[Selection] = (),
) -> list[Fraction]:
    """Exact selection law for sub-step i, given this step's earlier
    selections in ``partial`` (i = len(partial) + 1 must hold).

    Returns t+1 probabilities: entry x-1 for vertex x in [t], the last entry
    for the self loop (identically 0 for UAM and the restricted-loops
    variant). Entries are Fractions summing to exactly 1.
    """
    cfg = state.config
    t = state.t
    if cfg.model is Model.UAM:
        return [Fraction(1, t)] * t + [Fraction(0)]
    m = cfg.m
    if not 1 <= i <= m:
        raise ValueError(f"sub-step index must be in [1, {m}], got {i}")
    if len(partial) != i - 1:
        raise ValueError(
            f"sub-step {i} requires {i - 1} prior selections, got {len(partial)}"
        )
    num, den = cfg.delta_num, cfg.delta_den
    scale = den * m
    lin = m * num

    deg = list(state.degrees)
    sumdeg = state.sumdeg
    dnew = 0
    for sel in partial:
        if sel.is_loop:
            dnew += 2
        else:
            deg[sel.target] += 1
            sumdeg += 1
            dnew += 1

    mass_old = scale * sumdeg + t * lin
    if cfg.loops_variant is LoopsVariant.ONLY_AT_VERTEX_ONE:
        total = mass_old
        self_mass = 0
    else:
        self_mass = scale * (dnew + 1) + i * num
        total = mass_old + self_mass
    probs = [Fraction(scale * deg[x] + lin, total) for x in range(1, t + 1)]
    probs.append(Fraction(self_mass, total))
    return probs


def advance_step(state: ProcessState) -> StepOutcome:
    """Draw the m selections of vertex t+1, applying each to the degree
    state immediately (so sub-step i sees the first i-1 updates), then
    promote t+1 to a completed vertex."""
    cfg = state.config
    t = state.t
    m = cfg.m
    selections: list[Selection] = []

    if cfg.model is Model.UAM:
        for _ in range(m):
            v = 1 + state.rng.randbelow(t)
            selections.append(Selection(v, False))
            state.degrees[v] += 1
        state.degrees.append(m)
        state.sumdeg += 2 * m
        state.t = t + 1
        return StepOutcome(t + 1, tuple(selections))

    num, den = cfg.delta_num, cfg.delta_den
    scale = den * m
    lin = m * num
    only_v1 = cfg.loops_variant is LoopsVariant.ONLY_AT_VERTEX_ONE
    fen = state.fenwick
    dnew = 0
    for i in range(1, m + 1):
        mass_old = scale * state.sumdeg + t * lin
        if only_v1:
            total = mass_old
        else:
            total = scale * (2 * m * t + 2 * i - 1) + (m * t + i) * num
        u = state.rng.randbelow(total)
        if (not only_v1) and u >= mass_old:
            selections.append(Selection(t + 1, True))
            dnew += 2
        else:
            v = fen.search_scaled(scale, lin, u, t)
            selections.append(Selection(v, False))
            fen.add(v, 1)
            state.degrees[v] += 1
            state.sumdeg += 1
            dnew += 1
    state.degrees.append(dnew)
    fen.add(t + 1, dnew)
    state.sumdeg += dnew
    state.t = t + 1
    return StepOutcome(t + 1, tuple(selections))


def run(
    state: ProcessState,
    t_max: int,
    observers: Iterable = (),
    snapshots=None,
):
    """Advance the process until t == t_max, feeding every StepOutcome to
    each observer (and to the snapshot recorder, when given). Deterministic
    in (config, seed, t_max)."""
    if t_max > state.config.t_max:
        raise ValueError(
            f"t_max={t_max} exceeds configured capacity {state.config.t_max}"
        )
    observers = list(observers)
    while state.t < t_max:
        outcome = advance_step(state)
        for obs in observers:
            obs.update(outcome)
        if snapshots is not None:
            snapshots.maybe_record(state.t, observers)
    return state
