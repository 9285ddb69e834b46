"""Deterministic 64-bit pseudorandom generator (SplitMix64 + xoshiro256++).

The simulation contract is bit-exact reproducibility across platforms and
across the pure-Python and compiled execution paths, so we pin the generator
algorithm instead of delegating to ``random`` or NumPy:

* seeding: SplitMix64 (Steele, Lea, Flood 2014) expands a 64-bit seed into
  the 256-bit xoshiro state,
* stream: xoshiro256++ 1.0 (Blackman, Vigna 2018, public domain),
* bounded draws: unbiased rejection sampling (draw a fresh 64-bit word until
  it falls in the accepted region, then reduce modulo the bound).

``numba_kernels`` re-implements the identical algorithms on uint64; the test
suite asserts word-for-word agreement between the two paths.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

# SplitMix64 golden-ratio increment, also used for per-trial seed derivation.
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64_step(state: int) -> tuple[int, int]:
    """Advance a SplitMix64 state once; returns (new_state, output word)."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def splitmix64_mix(x: int) -> int:
    """Single SplitMix64 output for state ``x`` (used to derive sub-seeds)."""
    return splitmix64_step(x & MASK64)[1]


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Per-trial seed: SplitMix64(master_seed XOR gamma*(trial_index+1)).

    Trials are independent of execution order, so any worker layout produces
    the same per-trial streams.
    """
    offset = (GOLDEN_GAMMA * (trial_index + 1)) & MASK64
    return splitmix64_mix((master_seed & MASK64) ^ offset)


def seed_state(seed: int) -> list[int]:
    """Expand a 64-bit seed into the four xoshiro256++ state words."""
    state = seed & MASK64
    words = []
    for _ in range(4):
        state, out = splitmix64_step(state)
        words.append(out)
    if not any(words):  # all-zero state is the one forbidden fixed point
        words[0] = GOLDEN_GAMMA
    return words


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256PP:
    """xoshiro256++ stream over python ints (reference implementation)."""

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        self._s = seed_state(seed)

    @property
    def state(self) -> tuple[int, int, int, int]:
        return tuple(self._s)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s0 + s3) & MASK64, 23) + s0) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased (rejection on the top range)."""
        if n <= 0:
            raise ValueError(f"bound must be positive, got {n}")
        if n > MASK64:
            raise ValueError("bound exceeds 64 bits")
        threshold = ((1 << 64) - n) % n
        while True:
            x = self.next_u64()
            if x >= threshold:
                return x % n
