"""Exact rational-arithmetic checks of the process's one-step identities.

Everything here runs over ``fractions.Fraction`` (arbitrary precision,
canonical form), so each check is an equality of rationals, not a tolerance
test. Covered identities, for the m=1 descendant count X with root-step
offset gamma (0 if the root looped, -1 if it attached):

* the rising-factorial martingale step: with beta = (1+delta)/(2+delta) and
  Z = X + gamma/(2+delta), jumping Z -> Z+1 with probability Z/(t+beta)
  multiplies E[rising(Z, ell)] by exactly (t+beta+ell)/(t+beta);
* the Stirling-number identity behind it:
  ell*s(ell,i) = sum_k s(ell,k)*C(k, i-1);
* the loop-free one-step law P_m(a) of the descendant degree increment for
  general m, its 2**m-sequence enumeration oracle, its falling-factorial
  moments, and the exact expected increments of (X, Y);
* the probability that an arriving vertex places no loops.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

RationalLike = Fraction | int

STIRLING_CAP = 20


def rising_factorial(z: RationalLike, ell: int) -> Fraction:
    """z*(z+1)*...*(z+ell-1); empty product for ell = 0."""
    if ell < 0:
        raise ValueError(f"order must be >= 0, got {ell}")
    out = Fraction(1)
    z = Fraction(z)
    for j in range(ell):
        out *= z + j
    return out


def falling_factorial(x: RationalLike, ell: int) -> Fraction:
    """x*(x-1)*...*(x-ell+1); empty product for ell = 0."""
    if ell < 0:
        raise ValueError(f"order must be >= 0, got {ell}")
    out = Fraction(1)
    x = Fraction(x)
    for j in range(ell):
        out *= x - j
    return out


class StirlingTable:
    """Signless first-kind Stirling numbers s(ell, k) up to ell_max,
    via s(ell+1, k) = s(ell, k-1) + ell*s(ell, k)."""

    def __init__(self, ell_max: int = STIRLING_CAP):
        if ell_max < 0 or ell_max > STIRLING_CAP:
            raise ValueError(f"ell_max must be in [0, {STIRLING_CAP}]")
        self.ell_max = ell_max
        rows = [[1]]
        for ell in range(ell_max):
            prev = rows[ell]
            row = [0] * (ell + 2)
            for k in range(1, ell + 2):
                row[k] = (prev[k - 1] if k - 1 <= ell else 0)
                if k <= ell:
                    row[k] += ell * prev[k]
            rows.append(row)
        self._rows = rows

    def value(self, ell: int, k: int) -> int:
        if ell < 0 or ell > self.ell_max:
            raise ValueError(f"ell must be in [0, {self.ell_max}], got {ell}")
        if k < 0 or k > ell:
            return 0
        return self._rows[ell][k]


_TABLE = StirlingTable()


def stirling_unsigned(ell: int, k: int) -> int:
    """s(ell, k): permutations of [ell] with k cycles."""
    return _TABLE.value(ell, k)


def verify_stirling_identity(ell: int, i: int) -> bool:
    """Check ell*s(ell, i) == sum_{k=i}^{ell} s(ell, k)*C(k, i-1) exactly."""
    lhs = ell * stirling_unsigned(ell, i)
    rhs = sum(stirling_unsigned(ell, k) * math.comb(k, i - 1)
              for k in range(i, ell + 1))
    return lhs == rhs


def verify_martingale_step(t: int, X: int, gamma: int, delta: RationalLike,
                           ell: int) -> bool:
    """Exact one-step invariance of the rising-factorial martingale.

    With Z = X + gamma/(2+delta) and p = Z/(t+beta), checks
        p*rising(Z+1, ell) + (1-p)*rising(Z, ell)
          == (t+beta+ell)/(t+beta) * rising(Z, ell).
    """
    if gamma not in (0, -1):
        raise ValueError(f"gamma must be 0 or -1, got {gamma}")
    delta = Fraction(delta)
    if delta <= -1:
        raise ValueError(f"delta must be > -1, got {delta}")
    if not 1 <= X <= t:
        raise ValueError(f"X must be in [1, t], got X={X}, t={t}")
    beta = (1 + delta) / (2 + delta)
    Z = X + Fraction(gamma) / (2 + delta)
    p = Z / (t + beta)
    if p < 0 or p > 1:
        raise ValueError(f"jump probability out of range: {p}")
    lhs = p * rising_factorial(Z + 1, ell) + (1 - p) * rising_factorial(Z, ell)
    rhs = (t + beta + ell) / (t + beta) * rising_factorial(Z, ell)
    return lhs == rhs


def _check_step_preconditions(t: int, m: int, delta: Fraction, X: int, Y: int):
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    if not m * X <= Y:
        raise ValueError(f"need m*X <= Y: m*X={m * X}, Y={Y}")
    if not Y <= 2 * m * X:
        raise ValueError(f"need Y <= 2*m*X: Y={Y}, 2*m*X={2 * m * X}")
    if Y + delta * X < 0:
        raise ValueError(f"need Y + delta*X >= 0: got {Y + delta * X}")
    if (2 * m + delta) * t < Y + delta * X:
        raise ValueError(
            f"need (2m+delta)*t >= Y + delta*X: "
            f"{(2 * m + delta) * t} < {Y + delta * X}")


def step_law_exact(t: int, m: int, delta: RationalLike, X: int, Y: int
                   ) -> list[Fraction]:
    """Loop-free one-step law of the member-hit count a in {0..m}.

    With member mass W = Y + delta*X and total mass T = (2m+delta)*t,
        P(a) = C(m,a) * rising(W, a) * rising(T-W, m-a) / rising(T, m).
    The list sums to exactly 1.
    """
    delta = Fraction(delta)
    _check_step_preconditions(t, m, delta, X, Y)
    W = Y + delta * X
    T = (2 * m + delta) * t
    denom = rising_factorial(T, m)
    return [
        math.comb(m, a) * rising_factorial(W, a)
        * rising_factorial(T - W, m - a) / denom
        for a in range(m + 1)
    ]


def enumeration_oracle(t: int, m: int, delta: RationalLike, X: int, Y: int
                       ) -> list[Fraction]:
    """Same law by brute force over all 2**m hit/miss sequences.

    Each sequence's probability is the product of the sequential one-edge
    probabilities, where the member mass grows by 1 per previous hit and
    the total mass by 1 per edge placed.
    """
    delta = Fraction(delta)
    _check_step_preconditions(t, m, delta, X, Y)
    W = Y + delta * X
    T = (2 * m + delta) * t
    law = [Fraction(0)] * (m + 1)
    for bits in range(1 << m):
        prob = Fraction(1)
        hits = 0
        for i in range(m):
            if (bits >> i) & 1:
                prob *= (W + hits) / (T + i)
                hits += 1
            else:
                prob *= (T - W + i - hits) / (T + i)
        law[hits] += prob
    return law


def factorial_moments_check(t: int, m: int, delta: RationalLike, X: int,
                            Y: int, mu: int) -> bool:
    """Check sum_a falling(a, mu)*P(a) == falling(m, mu)*rising(W, mu)/rising(T, mu)."""
    delta = Fraction(delta)
    law = step_law_exact(t, m, delta, X, Y)
    lhs = sum(falling_factorial(a, mu) * p for a, p in enumerate(law))
    W = Y + delta * X
    T = (2 * m + delta) * t
    rhs = falling_factorial(m, mu) * rising_factorial(W, mu) / rising_factorial(T, mu)
    return lhs == rhs


def loop_free_factor(t: int, m: int, delta: RationalLike) -> Fraction:
    """Probability that vertex t+1 places none of its m edges as a loop:
    prod_i (2mt + i-1 + t*delta) / (2mt + 2(i-1) + t*delta + 1 + i*delta/m)."""
    delta = Fraction(delta)
    out = Fraction(1)
    for i in range(1, m + 1):
        numer = 2 * m * t + (i - 1) + t * delta
        denom = 2 * m * t + 2 * (i - 1) + t * delta + 1 + i * delta / m
        out *= numer / denom
    return out


def expected_increments_exact(t: int, m: int, delta: RationalLike, X: int,
                              Y: int) -> tuple[Fraction, Fraction]:
    """Exact loop-free conditional means (E[dX], E[dY]) of the descendant
    count and total member degree:

        E[dX] = 1 - rising(T-W, m)/rising(T, m)
        E[dY] = m*W/T + m*E[dX],        W = Y + delta*X, T = (2m+delta)*t.
    """
    delta = Fraction(delta)
    _check_step_preconditions(t, m, delta, X, Y)
    W = Y + delta * X
    T = (2 * m + delta) * t
    miss_all = rising_factorial(T - W, m) / rising_factorial(T, m)
    e_dx = 1 - miss_all
    e_dy = m * W / T + m * e_dx
    return e_dx, e_dy


# ---------------------------------------------------------------------------
# Exhaustive suite drivers (the CLI's `verify` subcommands)
# ---------------------------------------------------------------------------

DELTA_GRID = (Fraction(-1, 2), Fraction(0), Fraction(1), Fraction(7, 3))


def martingale_suite(t_max: int = 30, ell_max: int = 6,
                     deltas: Sequence[RationalLike] = DELTA_GRID) -> list[str]:
    """All (t <= t_max, 1 <= X <= t, ell <= ell_max, gamma, delta); returns
    failure descriptions (empty = pass)."""
    failures = []
    for delta in deltas:
        for t in range(1, t_max + 1):
            for X in range(1, t + 1):
                for gamma in (0, -1):
                    for ell in range(ell_max + 1):
                        if not verify_martingale_step(t, X, gamma, delta, ell):
                            failures.append(_martingale_failure(
                                t, X, gamma, Fraction(delta), ell))
    return failures


def _martingale_failure(t, X, gamma, delta, ell) -> str:
    beta = (1 + delta) / (2 + delta)
    Z = X + Fraction(gamma) / (2 + delta)
    p = Z / (t + beta)
    lhs = p * rising_factorial(Z + 1, ell) + (1 - p) * rising_factorial(Z, ell)
    rhs = (t + beta + ell) / (t + beta) * rising_factorial(Z, ell)
    return (f"martingale step failed at t={t} X={X} gamma={gamma} "
            f"delta={delta} ell={ell}: lhs={lhs} != rhs={rhs}")


def stirling_suite(ell_max: int = 10) -> list[str]:
    failures = []
    for ell in range(1, ell_max + 1):
        for i in range(1, ell + 1):
            if not verify_stirling_identity(ell, i):
                lhs = ell * stirling_unsigned(ell, i)
                rhs = sum(stirling_unsigned(ell, k) * math.comb(k, i - 1)
                          for k in range(i, ell + 1))
                failures.append(
                    f"stirling identity failed at ell={ell} i={i}: "
                    f"{lhs} != {rhs}")
    return failures


def feasible_states(t_max: int, m_max: int) -> Iterable[tuple[int, int, int, int]]:
    """All (t, m, X, Y) with 1 <= X <= t <= t_max, m <= m_max, mX <= Y <= 2mX."""
    for m in range(1, m_max + 1):
        for t in range(1, t_max + 1):
            for X in range(1, t + 1):
                for Y in range(m * X, 2 * m * X + 1):
                    yield t, m, X, Y


def steplaw_suite(t_max: int = 6, m_max: int = 3,
                  deltas: Sequence[RationalLike] = DELTA_GRID) -> list[str]:
    """Exact agreement of the closed-form law with the enumeration oracle,
    total mass 1, factorial moments, and increment consistency."""
    failures = []
    for delta in deltas:
        delta = Fraction(delta)
        for t, m, X, Y in feasible_states(t_max, m_max):
            if Y + delta * X < 0 or (2 * m + delta) * t < Y + delta * X:
                continue
            law = step_law_exact(t, m, delta, X, Y)
            oracle = enumeration_oracle(t, m, delta, X, Y)
            tag = f"(t={t}, m={m}, delta={delta}, X={X}, Y={Y})"
            if law != oracle:
                failures.append(
                    f"law != enumeration at {tag}: {law} vs {oracle}")
            if sum(law) != 1:
                failures.append(f"law mass != 1 at {tag}: {sum(law)}")
            W = Y + delta * X
            T = (2 * m + delta) * t
            for mu in range(m + 1):
                if not factorial_moments_check(t, m, delta, X, Y, mu):
                    lhs = sum(falling_factorial(a, mu) * p
                              for a, p in enumerate(law))
                    rhs = (falling_factorial(m, mu) * rising_factorial(W, mu)
                           / rising_factorial(T, mu))
                    failures.append(
                        f"factorial moment mu={mu} failed at {tag}: "
                        f"{lhs} != {rhs}")
            e_dx, e_dy = expected_increments_exact(t, m, delta, X, Y)
            e_dx_law = 1 - law[0]
            e_dy_law = sum((m + a) * p for a, p in enumerate(law)) - m * law[0]
            if e_dx != e_dx_law or e_dy != e_dy_law:
                failures.append(
                    f"increments mismatch at {tag}: "
                    f"({e_dx}, {e_dy}) vs law moments ({e_dx_law}, {e_dy_law})")
    return failures
