from fractions import Fraction as F

import numpy as np
import pytest

from attachsim import (Model, ProcessConfig, RetainedGraph,
                       attachment_distribution, collapse, coupled_run,
                       descendant_count, descendant_coupling_check,
                       init_process, run_fine_process,
                       transition_equivalence_check)
from attachsim.coupling import (descendant_coupling_suite,
                                transition_equivalence_suite)
from attachsim import numba_kernels as nk
from attachsim.process import Selection
from attachsim.rng import seed_state


class TestCollapse:
    def test_path_becomes_loop_plus_edge(self):
        fine = RetainedGraph(4, 1, ((1, 1), (2, 1), (3, 2), (4, 1)))
        coarse = collapse(fine, 2)
        assert coarse.n == 2 and coarse.m == 2
        assert coarse.edges == ((1, 1), (1, 1), (2, 1), (2, 1))

    def test_identity_for_m1(self):
        fine = RetainedGraph(3, 1, ((1, 1), (2, 1), (3, 1)))
        assert collapse(fine, 1) == RetainedGraph(3, 1, fine.edges)

    def test_loop_stays_loop(self):
        fine = RetainedGraph(2, 1, ((1, 1), (2, 2)))
        assert collapse(fine, 2).edges == ((1, 1), (1, 1))

    def test_rejects_indivisible(self):
        with pytest.raises(ValueError, match="divisible"):
            collapse(RetainedGraph(3, 1, ((1, 1), (2, 1), (3, 1))), 2)

    def test_degree_aggregation(self):
        for seed in range(5):
            m, t = 3, 8
            fine = run_fine_process(m, F(1, 2), t, seed)
            coarse = collapse(fine, m)
            fine_deg = fine.degrees()
            coarse_deg = coarse.degrees()
            for b in range(1, t + 1):
                block = range(m * (b - 1) + 1, m * b + 1)
                assert coarse_deg[b] == sum(fine_deg[y] for y in block)

    def test_fine_run_edge_count_and_degrees(self):
        fine = run_fine_process(2, F(0), 6, seed=3)
        assert fine.n == 12 and len(fine.edges) == 12
        assert sum(fine.degrees()) == 24


class TestTransitionEquivalence:
    def test_hand_value_first_substep(self):
        # m=2, delta=0, t=1, i=1: fine state has v1 loop + v2's edge; both
        # block and loop branches must equal the one-edge process exactly
        for seed in range(6):
            fine = run_fine_process(2, F(0), 2, seed)
            # degrees just before fine vertex m*t+i = 3 arrives: first 2 edges
            d = [0] * 5
            for u, v in fine.edges[:2]:
                d[u] += 1
                d[v] += 1
            gap_block = transition_equivalence_check(d, 2, F(0), 1, 1, 1)
            gap_loop = transition_equivalence_check(d, 2, F(0), 1, 1, 2)
            assert gap_block == 0 and gap_loop == 0
            # the probabilities themselves: block mass 4/5, loop 1/5
            total_block = sum(d[y] for y in (1, 2))
            assert F(total_block, 5) == F(4, 5)

    def test_loop_branch_weight_formula(self):
        # at i=1 the loop branch mass is (0 + 1 + delta/m)/D_1 exactly
        d = [0, 3, 1, 0, 0]  # a reachable fine state at m*t = 2... t=1
        delta = F(1, 2)
        m = 2
        fine_delta = delta / m
        gap = transition_equivalence_check(d, m, delta, 1, 1, 2)
        assert gap == 0
        coarse_den = (2 * m + delta) * 1 + 1 + delta / m
        fine_den = (2 + fine_delta) * 2 + 1 + fine_delta
        assert coarse_den == fine_den
        assert F(1 + fine_delta, 1) / fine_den == (0 + 1 + delta / m) / coarse_den

    @pytest.mark.parametrize("m,delta", [(2, F(0)), (3, F(1, 2))])
    def test_exhaustive_small_prefixes(self, m, delta):
        assert transition_equivalence_suite(m, delta, t_max=4, prefixes=5,
                                            seed=100) == []

    def test_rejects_bad_block(self):
        with pytest.raises(ValueError, match="block index"):
            transition_equivalence_check([0, 2], 2, F(0), 1, 1, 5)


class TestDescendantCoupling:
    def test_m1_collapse_is_identity_equality(self):
        run = coupled_run(1, F(1, 2), 50, seed=5)
        assert descendant_count(run.fine, 3) == descendant_count(run.coarse, 3)

    def test_inequality_at_intermediate_times(self):
        run = coupled_run(3, F(1, 2), 60, seed=31)
        for t in (5, 20, 41, 60):
            assert descendant_coupling_check(run, 2, t)
        assert descendant_count(run.coarse, 2, 1) == 0  # root not yet born

    def test_inequality_on_simulated_runs(self):
        assert descendant_coupling_suite(2, F(1, 2), t=100, r=2, trials=50,
                                         seed=20) == []
        assert descendant_coupling_suite(3, F(0), t=60, r=3, trials=30,
                                         seed=50) == []

    def test_descendant_count_matches_observer_flags(self):
        m, t, seed, r = 2, 80, 9, 2
        run = coupled_run(m, F(0), t, seed)
        # recompute coarse membership with the kernel on the coarse stream
        targets = np.array([v for _, v in run.coarse.edges[m:]], dtype=np.int64)
        creators = [u for u, _ in run.coarse.edges[m:]]
        loops = np.array([1 if u == v else 0
                          for u, v in run.coarse.edges[m:]], dtype=np.uint8)
        assert creators == [b for b in range(2, t + 1) for _ in range(m)]
        flags = nk.descendant_flags(targets, loops, m, t, r)
        assert int(flags.sum()) == descendant_count(run.coarse, r)

    def test_star_boundary_collapses_to_star(self):
        # delta = -m: the one-edge process with shift -1 is a star at v1;
        # collapsing any m keeps it a star at w1
        run = coupled_run(2, F(-2), 40, seed=1)
        deg = run.coarse.degrees()
        assert deg[1] == 2 * 2 * 1 + (40 - 1) * 2  # 2m initial + all edges
        assert all(d == 2 for d in deg[2:])
        assert descendant_count(run.coarse, 2) == 1


class TestCollapsedLawSmokeTest:
    def test_first_step_outcome_distribution(self):
        # the collapsed process's first coarse step (selections of w_2) must
        # match the direct process law within 3 SE per outcome class
        scipy_stats = pytest.importorskip("scipy.stats")
        m, delta, n_runs = 2, F(1, 2), 20_000
        fine_delta = delta / m

        counts = {}
        for k in range(n_runs):
            rs = np.array(seed_state(7_000_000 + k), dtype=np.uint64)
            tg, lp, _ = nk.pam_stream(1, fine_delta.numerator,
                                      fine_delta.denominator, False,
                                      2 * m, rs)
            # fine vertices m+1..2m are coarse vertex 2's selections
            outcome = []
            for a in range(m + 1, 2 * m + 1):
                idx = a - 2
                tgt = a if lp[idx] else int(tg[idx])
                block = (tgt + m - 1) // m
                outcome.append(block == 2)  # True = coarse loop
            key = tuple(outcome)
            counts[key] = counts.get(key, 0) + 1

        # exact law of the direct coarse process's step at t=1
        cfg = ProcessConfig(Model.PAM, m, delta, t_max=4)
        probs = {}
        for first_loop in (False, True):
            st = init_process(cfg, 0)
            p1 = attachment_distribution(st, 1)
            pr1 = p1[-1] if first_loop else sum(p1[:-1])
            partial = [Selection(2 if first_loop else 1, first_loop)]
            p2 = attachment_distribution(st, 2, partial)
            for second_loop in (False, True):
                pr2 = p2[-1] if second_loop else sum(p2[:-1])
                probs[(first_loop, second_loop)] = pr1 * pr2
        assert sum(probs.values()) == 1

        for key, p in probs.items():
            c = counts.get(key, 0)
            se = (n_runs * float(p) * (1 - float(p))) ** 0.5
            assert abs(c - n_runs * float(p)) <= 3 * se, (key, c, p)
        chi = scipy_stats.chisquare(
            [counts.get(k, 0) for k in probs],
            [n_runs * float(p) for p in probs.values()])
        assert chi.pvalue > 1e-4
