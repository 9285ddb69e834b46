import itertools
import math
from fractions import Fraction as F

import pytest

from attachsim import (enumeration_oracle, expected_increments_exact,
                       factorial_moments_check, falling_factorial,
                       loop_free_factor, rising_factorial, step_law_exact,
                       stirling_unsigned, verify_martingale_step,
                       verify_stirling_identity)
from attachsim.exact import (StirlingTable, martingale_suite, steplaw_suite,
                             stirling_suite)


def brute_force_stirling(n, k):
    """Count permutations of [n] with exactly k cycles."""
    count = 0
    for perm in itertools.permutations(range(n)):
        seen = [False] * n
        cycles = 0
        for start in range(n):
            if not seen[start]:
                cycles += 1
                j = start
                while not seen[j]:
                    seen[j] = True
                    j = perm[j]
        if cycles == k:
            count += 1
    return count


class TestFactorials:
    def test_rising_examples(self):
        assert rising_factorial(2, 3) == 24
        assert rising_factorial(F(3, 2), 2) == F(15, 4)
        assert rising_factorial(F(-7, 3), 0) == 1

    def test_falling(self):
        assert falling_factorial(5, 2) == 20
        assert falling_factorial(3, 0) == 1

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            rising_factorial(1, -1)


class TestStirling:
    def test_small_values_against_brute_force(self):
        for n in range(7):
            for k in range(n + 1):
                assert stirling_unsigned(n, k) == brute_force_stirling(n, k)

    def test_named_values(self):
        assert stirling_unsigned(3, 2) == 3
        assert stirling_unsigned(4, 2) == 11
        for ell in range(1, 12):
            assert stirling_unsigned(ell, ell) == 1
            assert stirling_unsigned(ell, 0) == 0

    def test_row_sums_are_factorials(self):
        for ell in range(1, 15):
            assert sum(stirling_unsigned(ell, k)
                       for k in range(ell + 1)) == math.factorial(ell)

    def test_cap_enforced(self):
        with pytest.raises(ValueError):
            stirling_unsigned(21, 3)
        with pytest.raises(ValueError):
            StirlingTable(25)

    def test_identity_hand_values(self):
        # ell=3, i=2: 3*s(3,2)=9 equals s(3,2)*C(2,1)+s(3,3)*C(3,1)=6+3
        assert verify_stirling_identity(3, 2)
        assert verify_stirling_identity(1, 1)
        assert verify_stirling_identity(8, 3)

    def test_identity_exhaustive(self):
        assert stirling_suite(10) == []


class TestMartingaleStep:
    def test_hand_value(self):
        # t=2, X=1, gamma=0, delta=0, ell=2: E = 0.4*6 + 0.6*2 = 3.6
        assert verify_martingale_step(2, 1, 0, 0, 2)

    def test_order_zero_trivial(self):
        assert verify_martingale_step(5, 2, -1, F(1, 2), 0)

    def test_rational_delta(self):
        assert verify_martingale_step(5, 3, -1, F(1, 2), 4)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            verify_martingale_step(2, 3, 0, 0, 1)   # X > t
        with pytest.raises(ValueError):
            verify_martingale_step(2, 1, 1, 0, 1)   # gamma not in {0,-1}
        with pytest.raises(ValueError):
            verify_martingale_step(2, 1, 0, -1, 1)  # delta <= -1

    def test_suite_small_grid(self):
        assert martingale_suite(t_max=8, ell_max=4) == []

    def test_process_level_corollary(self):
        # freeze (t, X); the empirical mean of the next-step scaled rising
        # factorial stays within 3 SE of the current one over 1e6 draws
        np = pytest.importorskip("numpy")
        rng = np.random.default_rng(11)
        n = 1_000_000
        for (t, X, gamma, delta, ell) in [(7, 3, 0, F(0), 3),
                                          (12, 5, -1, F(1, 2), 2)]:
            beta = (1 + delta) / (2 + delta)
            Z = X + F(gamma) / (2 + delta)
            p = Z / (t + beta)
            denom = rising_factorial(t + 1 + beta, ell)
            r1 = float(rising_factorial(Z + 1, ell) / denom)
            r0 = float(rising_factorial(Z, ell) / denom)
            k = rng.binomial(n, float(p))
            emp = (k * r1 + (n - k) * r0) / n
            target = float(rising_factorial(Z, ell)
                           / rising_factorial(t + beta, ell))
            se = abs(r1 - r0) * math.sqrt(float(p) * (1 - float(p)) / n)
            assert abs(emp - target) <= 3 * se


class TestStepLaw:
    def test_hand_values(self):
        assert step_law_exact(2, 2, 0, 1, 2) == [F(7, 12), F(1, 3), F(1, 12)]

    def test_zero_member_mass(self):
        # Y + delta*X = 0 puts all mass on a = 0
        law = step_law_exact(3, 2, -2, 1, 2)
        assert law[0] == 1 and all(p == 0 for p in law[1:])

    def test_total_mass_one(self):
        for t, m, d, X, Y in [(4, 3, F(7, 3), 2, 8), (5, 2, F(-1, 2), 3, 7)]:
            assert sum(step_law_exact(t, m, d, X, Y)) == 1

    def test_enumeration_agrees(self):
        assert enumeration_oracle(2, 2, 0, 1, 2) == [F(7, 12), F(1, 3), F(1, 12)]

    def test_m1_reduction_recovers_jump_probability(self):
        # the no-loop hit probability times the no-loop factor equals the
        # loops-allowed one-step jump probability (X + gamma/(2+d))/(t+beta)
        for t, X, gamma, delta in [(3, 2, 0, F(0)), (6, 4, -1, F(1, 2)),
                                   (9, 3, 0, F(7, 3))]:
            Y = 2 * X + gamma
            hit = step_law_exact(t, 1, delta, X, Y)[1]
            beta = (1 + delta) / (2 + delta)
            jump = (X + F(gamma) / (2 + delta)) / (t + beta)
            assert hit * loop_free_factor(t, 1, delta) == jump

    def test_preconditions_reported(self):
        with pytest.raises(ValueError, match="m\\*X <= Y"):
            step_law_exact(3, 2, 0, 1, 1)
        with pytest.raises(ValueError, match="Y <= 2\\*m\\*X"):
            step_law_exact(3, 2, 0, 1, 5)
        with pytest.raises(ValueError, match="delta\\*X >= 0"):
            step_law_exact(3, 2, -4, 1, 3)

    def test_factorial_moments_hand_value(self):
        # mu=1: sum a*P(a) = 1/3 + 2/12 = 1/2 = (m)_1 * W / T
        assert factorial_moments_check(2, 2, 0, 1, 2, 1)
        assert factorial_moments_check(2, 2, 0, 1, 2, 0)
        assert factorial_moments_check(2, 2, 0, 1, 2, 2)

    def test_expected_increments_hand_values(self):
        e_dx, e_dy = expected_increments_exact(2, 2, 0, 1, 2)
        assert e_dx == F(5, 12)
        assert e_dy == F(4, 3)

    def test_expected_increments_zero_mass(self):
        e_dx, e_dy = expected_increments_exact(3, 2, -2, 1, 2)
        assert e_dx == 0 and e_dy == 0

    def test_suite_small_grid(self):
        assert steplaw_suite(t_max=4, m_max=2) == []


class TestLoopFreeFactor:
    def test_single_edge_value(self):
        assert loop_free_factor(1, 1, 0) == F(2, 3)

    def test_tail_bound(self):
        for t in (10, 100, 1000):
            assert 1 - loop_free_factor(t, 2, 0) <= F(3, t)

    def test_boundary_delta(self):
        # m + delta = 0: factors stay positive, product in (0, 1]
        for t in (1, 5, 50):
            v = loop_free_factor(t, 2, -2)
            assert 0 < v <= 1

    def test_in_unit_interval(self):
        for t, m, d in [(1, 3, F(7, 3)), (4, 2, F(-1, 2)), (10, 1, F(1))]:
            assert 0 < loop_free_factor(t, m, d) <= 1
