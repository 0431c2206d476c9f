"""Engine behavior: steppers, policies, the fast path, and run invariants."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpexact import (
    FpState,
    Matrix,
    TieBreakPolicy,
    TieError,
    Vector,
    fp_step_general,
    fp_step_symmetric,
    run,
    run_float,
    sample_times,
    top_gap,
)
from fpexact.rps import rps_matrix


def small_skew_matrices(n):
    entries = st.integers(min_value=-5, max_value=5)
    rows = st.lists(st.lists(entries, min_size=n, max_size=n), min_size=n, max_size=n)
    return rows.map(lambda r: Matrix(r) - Matrix(r).transpose())


class TestPolicies:
    def test_lexicographic_takes_lowest_index(self):
        policy = TieBreakPolicy.lexicographic()
        assert policy.resolve((1, 3), 5, ()) == 1

    def test_strict_raises_with_context(self):
        with pytest.raises(TieError) as err:
            TieBreakPolicy.strict().resolve((0, 2), 7, ())
        assert err.value.t == 7
        assert err.value.tied == (0, 2)

    def test_adversarial_choice_must_be_tied(self):
        policy = TieBreakPolicy.adversarial(lambda tied, t, u: 99)
        with pytest.raises(ValueError):
            policy.resolve((0, 1), 1, ())

    def test_adversarial_picks_from_callback(self):
        policy = TieBreakPolicy.adversarial(lambda tied, t, u: tied[-1])
        state = FpState.symmetric(3, policy=policy)
        i, _ = fp_step_symmetric(state, rps_matrix())
        assert i == 2  # highest tied index at the all-zero start


class TestSymmetricStep:
    def test_vertex_state_step(self):
        state = FpState.symmetric(3, u_init=Vector([2, -4, 2]))
        i, state = fp_step_symmetric(state, rps_matrix())
        assert i == 0
        assert state.U == [2, -3, 1]

    def test_mid_run_step(self):
        state = FpState.symmetric(3, u_init=Vector([2, 3, -5]))
        i, state = fp_step_symmetric(state, rps_matrix())
        assert i == 1
        assert state.U == [1, 3, -4]

    def test_strict_tie_at_zero(self):
        state = FpState.symmetric(3, policy=TieBreakPolicy.strict())
        with pytest.raises(TieError):
            fp_step_symmetric(state, rps_matrix())

    def test_requires_skew(self):
        state = FpState.symmetric(2)
        with pytest.raises(ValueError):
            fp_step_symmetric(state, Matrix.identity(2))


class TestGeneralStep:
    def test_rps_first_step_ties_break_low(self):
        state = FpState.general(3, 3)
        i, j, _ = fp_step_general(state, rps_matrix())
        assert (i, j) == (0, 0)

    def test_matching_pennies_hand_trace(self):
        # Hand simulation of four steps: row actions 1,1,1,2 and column
        # actions 1,2,2,2 (1-based), frozen here 0-based.
        pennies = Matrix([[1, -1], [-1, 1]])
        state = FpState.general(2, 2)
        traj = run(state, pennies, 4)
        assert traj.actions == [0, 0, 0, 1]
        assert traj.col_actions == [0, 1, 1, 1]
        assert state.x == [3, 1] and state.y == [1, 3]

    def test_symmetric_and_general_agree_on_skew_games(self):
        a = rps_matrix()
        sym_state = FpState.symmetric(3)
        sym_traj = run(sym_state, a, 100)
        gen_state = FpState.general(3, 3)
        gen_traj = run(gen_state, a, 100)
        assert gen_traj.actions == sym_traj.actions
        assert gen_traj.col_actions == sym_traj.actions
        assert gen_state.x == gen_state.y == sym_state.x


class TestRun:
    def test_rps_nine_steps(self):
        state = FpState.symmetric(3)
        traj = run(state, rps_matrix(), 9)
        assert state.x == [1, 3, 5]
        assert state.U == [2, -4, 2]
        assert traj.actions == [0, 1, 1, 1, 2, 2, 2, 2, 2]

    def test_rps_thirty_six_steps(self):
        state = FpState.symmetric(3)
        run(state, rps_matrix(), 36)
        assert state.x == [8, 12, 16]
        assert state.U == [4, -8, 4]

    def test_empty_checkpoint_schedule(self):
        state = FpState.symmetric(3)
        traj = run(state, rps_matrix(), 25)
        assert traj.checkpoints == {}
        assert len(traj.actions) == 25 == traj.final_t

    def test_checkpoint_at_start_and_midway(self):
        state = FpState.symmetric(3)
        traj = run(state, rps_matrix(), 16, checkpoints=[0, 9, 16])
        assert traj.checkpoints[0].x == (0, 0, 0)
        assert traj.checkpoints[9].x == (1, 3, 5)
        assert traj.checkpoints[16].x == (8, 3, 5)
        assert traj.checkpoints[16].u == Vector([2, 3, -5])

    def test_replay_determinism(self):
        def one():
            state = FpState.symmetric(3)
            return run(state, rps_matrix(), 200, checkpoints=[100],
                       gap_times=[50, 150])

        a, b = one(), one()
        assert a.actions == b.actions
        assert a.checkpoints == b.checkpoints
        assert a.gap_samples == b.gap_samples

    def test_state_consistency_at_checkpoints(self, bundle):
        state = FpState.symmetric(9, u_init=bundle.U0)
        traj = run(state, bundle.M, 500, checkpoints=[1, 137, 500])
        for t, cp in traj.checkpoints.items():
            recomputed = Vector(bundle.U0) + (bundle.M @ Vector(cp.x))
            assert cp.u == recomputed, f"inconsistent at t={t}"

    def test_fast_path_matches_reference_stepper(self, bundle):
        fast_state = FpState.symmetric(9, u_init=bundle.U0)
        fast = run(fast_state, bundle.M, 300)
        slow_state = FpState.symmetric(9, u_init=bundle.U0)
        slow_actions = []
        for _ in range(300):
            i, _ = fp_step_symmetric(slow_state, bundle.M)
            slow_actions.append(i)
        assert fast.actions == slow_actions
        assert fast_state.U == slow_state.U
        assert fast_state.x == slow_state.x

    def test_strict_policy_commits_partial_progress(self):
        state = FpState.symmetric(3, policy=TieBreakPolicy.strict())
        with pytest.raises(TieError) as err:
            run(state, rps_matrix(), 10)
        assert err.value.t == 1
        assert state.t == 0 and state.x == [0, 0, 0]

    def test_strict_policy_mid_run_tie(self):
        # From U = [0, 1, -1] the run proceeds until a tie appears.
        state = FpState.symmetric(3, policy=TieBreakPolicy.strict(),
                                  u_init=Vector([0, 1, -1]))
        with pytest.raises(TieError) as err:
            run(state, rps_matrix(), 50)
        assert state.t == err.value.t - 1 == sum(state.x)

    def test_gap_samples(self):
        state = FpState.symmetric(3)
        traj = run(state, rps_matrix(), 16, gap_times=[9, 16])
        assert traj.gap_samples == [
            (9, Fraction(4, 9)),
            (16, Fraction(2 * 3, 16)),
        ]

    def test_min_top_gap_tracking_matches_recomputation(self, bundle):
        state = FpState.symmetric(10)
        traj = run(state, bundle.M_aug, 60, top_gap_from=2)
        slow = FpState.symmetric(10)
        best = None
        for _ in range(60):
            fp_step_symmetric(slow, bundle.M_aug)
            if slow.t >= 2:
                g = top_gap(slow.U)
                if best is None or g < best[0]:
                    best = (g, slow.t)
        assert traj.min_top_gap == best

    def test_top_gap_samples_match_recomputation(self, bundle):
        times = (5, 20, 40)
        state = FpState.symmetric(10)
        traj = run(state, bundle.M_aug, 40, gap_times=times,
                   sample_top_gap=True)
        slow = FpState.symmetric(10)
        expected = []
        for _ in range(40):
            fp_step_symmetric(slow, bundle.M_aug)
            if slow.t in times:
                expected.append((slow.t, top_gap(slow.U)))
        assert traj.top_gap_samples == expected
        assert [t for t, _ in traj.gap_samples] == list(times)

    def test_tie_counting(self):
        state = FpState.symmetric(3)
        traj = run(state, rps_matrix(), 9, count_ties=True)
        # All-zero start plus the later within-spiral ties.
        assert traj.tie_count >= 1
        assert traj.tie_steps[0] == 1

    def test_rejects_bad_steps(self):
        state = FpState.symmetric(3)
        with pytest.raises(ValueError):
            run(state, rps_matrix(), 0)


class TestProperties:
    @given(small_skew_matrices(3), st.integers(min_value=1, max_value=60))
    @settings(max_examples=60, deadline=None)
    def test_max_utility_monotone_on_random_skew_games(self, a, steps):
        state = FpState.symmetric(3)
        traj = run(state, a, steps)
        assert traj.max_monotone

    @given(small_skew_matrices(4))
    @settings(max_examples=40, deadline=None)
    def test_strict_increase_only_on_action_change(self, a):
        state = FpState.symmetric(4)
        maxes = [max(state.U)]
        actions = []
        for _ in range(50):
            i, _ = fp_step_symmetric(state, a)
            actions.append(i)
            maxes.append(max(state.U))
        for t in range(len(actions) - 1):
            if maxes[t + 1] > maxes[t]:
                assert actions[t + 1] != actions[t], (
                    "max increased without an action change"
                )

    @given(small_skew_matrices(3), st.integers(min_value=5, max_value=80))
    @settings(max_examples=40, deadline=None)
    def test_fast_and_exact_paths_agree(self, a, steps):
        fast_state = FpState.symmetric(3)
        fast = run(fast_state, a, steps)
        slow_state = FpState.symmetric(3)
        slow_actions = []
        for _ in range(steps):
            i, _ = fp_step_symmetric(slow_state, a)
            slow_actions.append(i)
        assert fast.actions == slow_actions
        assert fast_state.U == slow_state.U


class TestTopGap:
    def test_tied_maximum(self):
        assert top_gap([2, -4, 2]) == 0

    def test_clear_maximum(self):
        assert top_gap([2, 3, -5]) == 1
        assert top_gap([5, 1]) == 4

    def test_requires_two_entries(self):
        with pytest.raises(ValueError):
            top_gap([1])


class TestFloatReplay:
    def test_agrees_with_exact_on_rps(self):
        state = FpState.symmetric(3)
        traj = run(state, rps_matrix(), 1000)
        assert run_float(rps_matrix(), 1000) == traj.actions


class TestSampleTimes:
    def test_geometric_grid(self):
        times = sample_times(100)
        assert times[0] == 1
        assert times == sorted(set(times))
        assert all(1 <= t <= 100 for t in times)

    def test_ratio_validation(self):
        with pytest.raises(ValueError):
            sample_times(100, ratio=1.0)
