import numpy as np
import pytest

from attachsim import numba_kernels as nk
from attachsim.rng import (GOLDEN_GAMMA, MASK64, Xoshiro256PP,
                           derive_trial_seed, seed_state, splitmix64_mix,
                           splitmix64_step)


def test_splitmix64_known_answer():
    # first outputs of the reference C implementation seeded with 0
    state = 0
    outs = []
    for _ in range(3):
        state, out = splitmix64_step(state)
        outs.append(out)
    assert outs[0] == 0xE220A8397B1DCDAF
    assert outs[1] == 0x6E789E6AA1B965F4
    assert outs[2] == 0x06C45D188009454F


def test_xoshiro_known_answer():
    # first outputs of the reference C implementation (splitmix64-seeded
    # with 12345), captured from a compiled build of the published source
    rng = Xoshiro256PP(12345)
    got = ["%016x" % rng.next_u64() for _ in range(6)]
    assert got == [
        "8d948a82def8a568",
        "3477f953796702a0",
        "15caa2fce6db8d69",
        "2cef8853c20c6dd0",
        "43ff3fff9c039cd9",
        "b9c18b4a72333287",
    ]


def test_seed_state_nonzero_and_deterministic():
    assert seed_state(12345) == seed_state(12345)
    assert any(seed_state(0))
    assert any(seed_state(987654321))


def test_python_and_numba_streams_agree():
    for seed in (0, 1, 2**63 + 17, MASK64):
        py = Xoshiro256PP(seed)
        st = np.array(seed_state(seed), dtype=np.uint64)
        for _ in range(500):
            assert py.next_u64() == int(nk._next_u64(st))


def test_randbelow_range_and_determinism():
    rng = Xoshiro256PP(42)
    vals = [rng.randbelow(10) for _ in range(1000)]
    assert all(0 <= v < 10 for v in vals)
    rng2 = Xoshiro256PP(42)
    assert vals == [rng2.randbelow(10) for _ in range(1000)]


def test_randbelow_rejects_bad_bounds():
    rng = Xoshiro256PP(1)
    with pytest.raises(ValueError):
        rng.randbelow(0)
    with pytest.raises(ValueError):
        rng.randbelow(-5)


def test_randbelow_unbiased_small_bound():
    # bound 3: frequencies within 4 sigma of 1/3 over 30k draws
    rng = Xoshiro256PP(7)
    n = 30_000
    counts = [0, 0, 0]
    for _ in range(n):
        counts[rng.randbelow(3)] += 1
    sigma = (n * (1 / 3) * (2 / 3)) ** 0.5
    for c in counts:
        assert abs(c - n / 3) < 4 * sigma


def test_trial_seed_derivation_matches_definition():
    master = 99
    for idx in (0, 1, 17):
        expect = splitmix64_mix(master ^ (GOLDEN_GAMMA * (idx + 1) & MASK64))
        assert derive_trial_seed(master, idx) == expect
    # distinct across indices and masters
    seeds = {derive_trial_seed(99, i) for i in range(100)}
    assert len(seeds) == 100
    assert derive_trial_seed(1, 0) != derive_trial_seed(2, 0)
