"""Online trackers fed by a running process, one StepOutcome at a time.

Three trackers, each maintaining a per-vertex flag plus O(1) counters:

* DescendantObserver: the subtree of vertices with a decreasing selection
  path to a fixed root. X = member count, Y = total degree of members.
* MatchingObserver: greedy online matching (pair the arriving vertex with
  an unmatched non-loop target if one exists). X = unmatched count.
* IndependentSetObserver: greedy online independent set (join when no
  selection hits an insider). Tracks |I| and the cumulative insider hits Z.

Loops never confer descendant membership, never match, and count neither as
insider nor outsider selections; multiplicities always count.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .process import Model, ProcessConfig, StepOutcome


class RootStep(enum.Enum):
    """How the root vertex spent its own step (m=1 diagnostics)."""

    LOOP = 0
    ATTACHED = -1


class DescendantObserver:
    """Tracks the size X and total member degree Y of the descendant tree
    rooted at ``root``.

    The arriving vertex joins when any non-loop selection hits a member; it
    then contributes its own step degree plus one per member hit. Attach
    before the root's own step arrives (or at t=1 for root 1, which starts
    as {1} with Y = 2m for PAM, 0 for UAM).
    """

    def __init__(self, config: ProcessConfig, root: int):
        if root < 1:
            raise ValueError(f"root must be >= 1, got {root}")
        self.config = config
        self.root = root
        self.member = bytearray(config.t_max + 1)
        self.t = 1
        self.X = 0
        self.Y = 0
        self.root_step: RootStep | None = None
        self.root_loops: int | None = None
        if root == 1:
            self.member[1] = 1
            self.X = 1
            self.Y = 2 * config.m if config.model is Model.PAM else 0
            if config.model is Model.PAM:
                self.root_step = RootStep.LOOP
                self.root_loops = config.m

    def update(self, outcome: StepOutcome) -> None:
        v = outcome.new_vertex
        self.t = v
        if v < self.root:
            return
        if v == self.root:
            loops = sum(1 for s in outcome.selections if s.is_loop)
            self.member[v] = 1
            self.X = 1
            self.Y = self.config.m + loops
            self.root_loops = loops
            self.root_step = RootStep.LOOP if loops else RootStep.ATTACHED
            return
        hits = 0
        loops = 0
        for sel in outcome.selections:
            if sel.is_loop:
                loops += 1
            elif self.member[sel.target]:
                hits += 1
        if hits > 0:
            self.member[v] = 1
            self.X += 1
            self.Y += hits + self.config.m + loops

    @property
    def p_x(self) -> float:
        return self.X / self.t

    @property
    def p_y(self) -> float:
        return self.Y / (2 * self.config.m * self.t)

    @property
    def p_combined(self) -> float:
        """(2m*p_y + delta*p_x) / (2m + delta), the drift coordinate."""
        m, d = self.config.m, self.config.delta
        return float((2 * m * Fraction(self.Y, 2 * m * self.t)
                      + d * Fraction(self.X, self.t)) / (2 * m + d))

    def metrics(self) -> dict[str, float]:
        out = {"p_x": self.p_x, "p_y": self.p_y}
        if self.config.model is Model.PAM:
            out["p"] = self.p_combined
        return out


class MatchingObserver:
    """Greedy online matching: the arriving vertex pairs with its youngest
    unmatched non-loop target, if any, else stays unmatched.

    X + 2*pairs == t always. pick_oldest=True selects the opposite
    tie-break; the partner sets differ and on a fixed stream the counts may
    too (only the count's law is tie-break independent, and only under
    uniform attachment), so one rule is pinned for determinism.
    """

    def __init__(self, config: ProcessConfig, pick_oldest: bool = False):
        self.config = config
        self.unmatched = bytearray(config.t_max + 1)
        self.unmatched[1] = 1
        self.t = 1
        self.X = 1
        self.pairs = 0
        self.pick_oldest = pick_oldest
        self.partners: dict[int, int] = {}

    def update(self, outcome: StepOutcome) -> None:
        v = outcome.new_vertex
        self.t = v
        chosen = 0
        for sel in outcome.selections:
            if sel.is_loop or not self.unmatched[sel.target]:
                continue
            if chosen == 0:
                chosen = sel.target
            elif self.pick_oldest:
                chosen = min(chosen, sel.target)
            else:
                chosen = max(chosen, sel.target)
        if chosen:
            self.unmatched[chosen] = 0
            self.X -= 1
            self.pairs += 1
            self.partners[v] = chosen
        else:
            self.unmatched[v] = 1
            self.X += 1

    @property
    def x_frac(self) -> float:
        return self.X / self.t

    @property
    def matched_frac(self) -> float:
        return 2 * self.pairs / self.t

    def metrics(self) -> dict[str, float]:
        return {"x": self.x_frac, "matched_frac": self.matched_frac}


class IndependentSetObserver:
    """Greedy online independent set, seeded with I(1) = {1}.

    U = insider hits (with multiplicity) by the arriving vertex; Z is their
    running total; the vertex joins exactly when U == 0. Loops are neither
    insider nor outsider selections, so a joining vertex may carry loops.
    """

    def __init__(self, config: ProcessConfig):
        self.config = config
        self.insider = bytearray(config.t_max + 1)
        self.insider[1] = 1
        self.t = 1
        self.I = 1
        self.Z = 0
        self.last_U = 0

    def update(self, outcome: StepOutcome) -> None:
        v = outcome.new_vertex
        self.t = v
        hits = 0
        for sel in outcome.selections:
            if not sel.is_loop and self.insider[sel.target]:
                hits += 1
        self.last_U = hits
        self.Z += hits
        if hits == 0:
            self.insider[v] = 1
            self.I += 1

    @property
    def i_frac(self) -> float:
        return self.I / self.t

    @property
    def z_frac(self) -> float:
        return self.Z / (self.config.m * self.t)

    @property
    def w_frac(self) -> float:
        """i*(m+delta)/(2m+delta) + z*m/(2m+delta), the drift coordinate."""
        m, d = self.config.m, self.config.delta
        i = Fraction(self.I, self.t)
        z = Fraction(self.Z, m * self.t)
        return float((i * (m + d) + z * m) / (2 * m + d))

    def metrics(self) -> dict[str, float]:
        return {"i": self.i_frac, "z": self.z_frac, "w": self.w_frac}


@dataclass
class SnapshotSeries:
    """Time-indexed (t, metric, value) recordings on a fixed schedule."""

    schedule: tuple[int, ...]
    rows: list[tuple[int, str, float]] = field(default_factory=list)

    def __post_init__(self):
        sched = tuple(self.schedule)
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("snapshot schedule must be strictly increasing")
        self.schedule = sched
        self._sched_set = frozenset(sched)

    def maybe_record(self, t: int, observers) -> None:
        if t in self._sched_set:
            record_snapshot(self, t, observers)


def record_snapshot(series: SnapshotSeries, t: int, observers) -> SnapshotSeries:
    """Append every observer's metrics at time t to the series."""
    for obs in observers:
        for name, value in obs.metrics().items():
            series.rows.append((t, name, value))
    return series


def geometric_schedule(t_max: int, ratio: float = 1.2, t_min: int = 1) -> tuple[int, ...]:
    """Log-spaced snapshot times ceil(ratio**k), deduplicated, ending at t_max."""
    times = set()
    x = 1.0
    while x < t_max:
        t = math.ceil(x)
        if t_min <= t <= t_max:
            times.add(t)
        x *= ratio
    times.add(t_max)
    return tuple(sorted(times))
