"""RPS periodicity, admissibility oracle, reindexing, window property."""

from fractions import Fraction
from itertools import groupby

import pytest

from fpexact import (
    Matrix,
    Vector,
    bvec,
    is_admissible,
    rps_matrix,
    run_rps,
    substitute_k,
    vertex_states,
    windowed_run_check,
)
from fpexact.rps import VERTEX_MATRICES


class TestMatrix:
    def test_values(self):
        assert rps_matrix() == Matrix([[0, -1, 1], [1, 0, -1], [-1, 1, 0]])

    def test_skew_symmetry(self):
        assert rps_matrix() + rps_matrix().transpose() == Matrix.zero(3, 3)

    def test_uniform_is_nash(self):
        assert rps_matrix() @ Vector([1, 1, 1]) == Vector([0, 0, 0])

    def test_first_column(self):
        assert rps_matrix().column(0) == Vector([0, 1, -1])


class TestVertexStates:
    def test_k1(self):
        v1, v2, v3 = vertex_states(1)
        assert (v1.t, v1.x, v1.u) == (9, Vector([1, 3, 5]), Vector([2, -4, 2]))
        assert (v2.t, v2.x, v2.u) == (16, Vector([8, 3, 5]), Vector([2, 3, -5]))
        assert (v3.t, v3.x, v3.u) == (25, Vector([8, 12, 5]), Vector([-7, 3, 4]))

    def test_k2_first_vertex(self):
        v1, _, _ = vertex_states(2)
        assert (v1.t, v1.x, v1.u) == (36, Vector([8, 12, 16]), Vector([4, -8, 4]))

    def test_rejects_k_below_one(self):
        with pytest.raises(ValueError):
            vertex_states(0)

    def test_simulation_matches_formulas(self):
        K = 20
        targets = [v for k in range(1, K + 1) for v in vertex_states(k)]
        traj, _ = run_rps(9 * (K + 1) ** 2, checkpoints=[v.t for v in targets],
                          record_actions=False)
        for v in targets:
            assert Vector(traj.checkpoints[v.t].x) == v.x, f"x mismatch at t={v.t}"
            assert traj.checkpoints[v.t].u == v.u, f"U mismatch at t={v.t}"

    def test_third_vertex_time_is_t_plus_four(self):
        # The counts of the third vertex sum to 9k^2 + 12k + 4; two steps
        # later the counts have moved on, so the +6 variant never matches.
        for k in (1, 2, 3, 4):
            _, _, v3 = vertex_states(k)
            assert v3.t == 9 * k * k + 12 * k + 4
            assert v3.x.sum() == v3.t
            traj, _ = run_rps(v3.t + 2, checkpoints=[v3.t, v3.t + 2],
                              record_actions=False)
            assert Vector(traj.checkpoints[v3.t].x) == v3.x
            assert Vector(traj.checkpoints[v3.t + 2].x) != v3.x

    def test_single_action_run_lengths(self):
        # Actions come in runs of lengths 6j+1, 6j+3, 6j+5 cycling 1,2,3.
        K = 8
        traj, _ = run_rps(9 * K * K)
        runs = [(key, len(list(group))) for key, group in groupby(traj.actions)]
        expected = []
        for j in range(K):
            expected += [(0, 6 * j + 1), (1, 6 * j + 3), (2, 6 * j + 5)]
        assert runs == expected[:len(runs)]
        assert len(runs) == 3 * K


class TestAdmissibility:
    def test_vertex_matrices_are_admissible(self):
        for q in VERTEX_MATRICES:
            assert is_admissible(q, range(1, 11)).passed

    def test_canonical_pair_is_admissible(self, bundle):
        assert is_admissible(bundle.Q0, range(1, 11)).passed
        assert is_admissible(bundle.Q1, range(1, 11)).passed

    def test_inadmissible_matrix_fails_with_witness(self):
        report = is_admissible(Matrix([[3, 0, 0], [3, 0, 0], [3, 0, 1]]),
                               range(1, 11))
        assert not report.passed
        assert report.witnesses, "failure must carry a witness"

    def test_negative_target_time_rejected(self):
        with pytest.raises(ValueError):
            is_admissible(Matrix([[-3, 0, 0], [-3, 0, 0], [-3, 0, 0]]),
                          range(1, 5))

    def test_non_integer_target_time_rejected(self):
        q = Matrix([[3, 0, Fraction(1, 2)], [3, 0, 0], [3, 0, 0]])
        with pytest.raises(ValueError):
            is_admissible(q, range(1, 5))

    def test_non_increasing_times_rejected(self):
        with pytest.raises(ValueError):
            is_admissible(Matrix([[0, 0, 1], [0, 0, 1], [0, 0, 1]]), range(1, 5))


class TestSubstitution:
    def test_double_k(self):
        assert substitute_k(VERTEX_MATRICES[0], 2, 0) == Matrix(
            [[12, -4, 0], [12, 0, 0], [12, 4, 0]]
        )

    def test_identity_substitution(self):
        for q in VERTEX_MATRICES:
            assert substitute_k(q, 1, 0) == q

    def test_rejects_nonpositive_a(self):
        with pytest.raises(ValueError):
            substitute_k(VERTEX_MATRICES[0], 0, 1)

    def test_reindexing_identity(self):
        q = Matrix([[5, -1, 2], [0, 3, 1], [7, 0, 4]])
        for a, b in [(1, 0), (2, 0), (2, 1), (3, -1), (4, 8)]:
            sub = substitute_k(q, a, b)
            for k in range(0, 15):
                if a * k + b < 0:
                    continue
                assert sub @ bvec(k) == q @ bvec(a * k + b)

    def test_substituted_vertex_matrices_stay_admissible(self):
        # Simulation oracle over a modest range.
        for base, (a, b) in ((0, (2, 0)), (1, (2, 1)), (2, (3, 2))):
            q = substitute_k(VERTEX_MATRICES[base], a, b)
            assert is_admissible(q, range(1, 9)).passed


class TestWindowedRuns:
    def test_canonical_pair_window(self, bundle):
        report = windowed_run_check(bundle.Q0, bundle.Q1, range(1, 3))
        assert report.passed
        locations = [c.location for c in report.checks]
        assert "k=1,steps=1362" in locations
        assert "k=2,steps=2282" in locations

    def test_trivial_window(self, bundle):
        report = windowed_run_check(bundle.Q0, bundle.Q0, range(1, 4))
        assert report.passed
        assert all("steps=0" in c.location for c in report.checks)

    def test_window_length_matches_phase_length(self, bundle):
        from fpexact import phase_length

        for k in range(1, 51):
            window_steps = ((bundle.Q1 - bundle.Q0) @ bvec(k)).sum()
            assert window_steps == phase_length(k)
