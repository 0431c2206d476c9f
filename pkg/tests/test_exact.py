"""Exact scalar/vector/matrix layer: values, gaps, solver, serialization."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpexact import (
    FpState,
    Matrix,
    Vector,
    bvec,
    cmat,
    duality_gap,
    format_rational,
    matrix_from_json,
    matrix_to_json,
    rational,
    run,
    solve_linear_system,
    sym_gap,
)
from fpexact.rps import rps_matrix

rationals = st.fractions(
    min_value=-1000, max_value=1000, max_denominator=997
)


class TestBasisAndShift:
    def test_bvec_values(self):
        assert bvec(0) == [0, 0, 1]
        assert bvec(1) == [1, 1, 1]
        assert bvec(3) == [9, 3, 1]

    def test_bvec_rejects_negative(self):
        with pytest.raises(ValueError):
            bvec(-1)

    def test_cmat_value(self):
        assert cmat() == Matrix([[1, 2, 1], [0, 1, 1], [0, 0, 1]])

    def test_cmat_shifts_bvec(self):
        assert cmat() @ bvec(2) == bvec(3)
        assert cmat() @ bvec(0) == bvec(1)

    def test_cmat_cubed(self):
        assert (cmat() ** 3) @ bvec(1) == bvec(4)

    @given(st.integers(min_value=0, max_value=500))
    def test_cmat_shift_property(self, k):
        assert cmat() @ bvec(k) == bvec(k + 1)


class TestGaps:
    def test_rps_uniform_is_nash(self):
        x = Vector([Fraction(1, 3)] * 3)
        assert duality_gap(rps_matrix(), x, x) == 0
        assert sym_gap(rps_matrix(), x) == 0

    def test_rps_pure_rock(self):
        x = Vector([1, 0, 0])
        assert duality_gap(rps_matrix(), x, x) == 2

    def test_gap_after_nine_rps_steps(self):
        # Oracle: simulate nine steps, then evaluate both gap forms on the
        # averaged counts.
        state = FpState.symmetric(3)
        run(state, rps_matrix(), 9)
        assert state.x == [1, 3, 5]
        avg = Vector(state.x).normalized()
        assert duality_gap(rps_matrix(), avg, avg) == Fraction(4, 9)
        assert sym_gap(rps_matrix(), avg) == Fraction(4, 9)
        assert Fraction(2, 9) * max(state.U) == Fraction(4, 9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            duality_gap(rps_matrix(), Vector([1, 0]), Vector([1, 0, 0]))

    def test_rejects_non_probability(self):
        bad = Vector([Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)])
        with pytest.raises(ValueError):
            duality_gap(rps_matrix(), bad, bad)
        with pytest.raises(ValueError):
            sym_gap(rps_matrix(), bad)

    def test_sym_gap_requires_skew(self):
        with pytest.raises(ValueError):
            sym_gap(Matrix.identity(3), Vector([1, 0, 0]))

    def test_matching_pennies_nash_and_deviation(self):
        pennies = Matrix([[1, -1], [-1, 1]])
        half = Vector([Fraction(1, 2), Fraction(1, 2)])
        assert duality_gap(pennies, half, half) == 0
        assert duality_gap(pennies, Vector([1, 0]), Vector([1, 0])) == 2

    @given(
        st.lists(rationals, min_size=3, max_size=3),
        st.lists(rationals, min_size=3, max_size=3),
        st.lists(rationals, min_size=3, max_size=3),
        st.lists(st.integers(min_value=0, max_value=50), min_size=3, max_size=3),
    )
    @settings(max_examples=100)
    def test_sym_gap_matches_duality_gap_on_skew_games(self, r0, r1, r2, weights):
        raw = Matrix([r0, r1, r2])
        skew = raw - raw.transpose()
        total = sum(weights)
        if total == 0:
            weights = [1, 1, 1]
            total = 3
        x = Vector([Fraction(w, total) for w in weights])
        assert sym_gap(skew, x) == duality_gap(skew, x, x)

    @given(
        st.lists(
            st.lists(st.integers(min_value=-4, max_value=4), min_size=3, max_size=3),
            min_size=3, max_size=3,
        ),
        st.lists(st.integers(min_value=0, max_value=6), min_size=3, max_size=3),
        st.lists(st.integers(min_value=0, max_value=6), min_size=3, max_size=3),
    )
    @settings(max_examples=150)
    def test_gap_zero_iff_nash_by_pure_deviation_enumeration(self, rows, xw, yw):
        a = Matrix(rows)
        if sum(xw) == 0:
            xw = [1, 0, 0]
        if sum(yw) == 0:
            yw = [0, 1, 0]
        x = Vector(xw).normalized()
        y = Vector(yw).normalized()
        gap = duality_gap(a, x, y)
        assert gap >= 0
        value = x.dot(a @ y)
        # Enumeration oracle: no pure deviation may improve either side.
        row_deviation = max((a @ y).entries)
        col_deviation = min(x.dot(a.column(j)) for j in range(3))
        is_nash = row_deviation <= value and col_deviation >= value
        assert (gap == 0) == is_nash

    @given(rationals, rationals, rationals)
    def test_addition_associativity_exact(self, a, b, c):
        assert (a + b) + c == a + (b + c)


class TestContainers:
    def test_vector_basic_ops(self):
        v = Vector([1, 2, 3])
        assert v + v == Vector([2, 4, 6])
        assert v - v == Vector.zero(3)
        assert 2 * v == Vector([2, 4, 6])
        assert v.dot(v) == 14
        assert v.concat(Vector([4])) == Vector([1, 2, 3, 4])

    def test_matrix_transpose_and_skew(self):
        assert rps_matrix().transpose() == -rps_matrix()
        assert rps_matrix().is_skew_symmetric()
        assert not rps_matrix().is_symmetric()
        assert Matrix([[1, 2], [2, 3]]).is_symmetric()

    def test_block_assembly(self):
        a = Matrix([[1, 2], [3, 4]])
        z = Matrix.zero(2, 2)
        blocked = Matrix.block([[a, z], [z, a]])
        assert blocked.shape == (4, 4)
        assert blocked[0, 1] == 2 and blocked[2, 2] == 1 and blocked[0, 2] == 0

    def test_matmul_dimension_error(self):
        with pytest.raises(ValueError):
            Matrix.identity(3) @ Vector([1, 2])

    def test_ragged_matrix_rejected(self):
        with pytest.raises(ValueError):
            Matrix([[1, 2], [3]])


class TestLinearSolver:
    def test_unique_solution(self):
        a = Matrix([[2, 1], [1, 3]])
        sol = solve_linear_system(a, Vector([5, 10]))
        assert sol.nullspace == []
        assert a @ sol.particular == Vector([5, 10])

    def test_inconsistent_system(self):
        a = Matrix([[1, 1], [1, 1]])
        assert solve_linear_system(a, Vector([1, 2])) is None

    def test_underdetermined_nullspace(self):
        a = Matrix([[1, 1, 1]])
        sol = solve_linear_system(a, Vector([3]))
        assert a @ sol.particular == Vector([3])
        assert len(sol.nullspace) == 2
        for direction in sol.nullspace:
            assert a @ direction == Vector([0])

    @given(
        st.lists(
            st.lists(st.integers(min_value=-9, max_value=9), min_size=3, max_size=3),
            min_size=2,
            max_size=4,
        ),
        st.lists(st.integers(min_value=-9, max_value=9), min_size=3, max_size=3),
    )
    @settings(max_examples=100)
    def test_solver_reproduces_planted_solution(self, rows, planted):
        a = Matrix(rows)
        b = a @ Vector(planted)
        sol = solve_linear_system(a, b)
        assert sol is not None
        assert a @ sol.particular == b
        for direction in sol.nullspace:
            assert a @ direction == Vector.zero(a.nrows)
        assert sol.rank + len(sol.nullspace) == a.ncols


class TestSerialization:
    def test_format_is_canonical(self):
        assert format_rational(Fraction(-4, 6)) == "-2/3"
        assert format_rational(Fraction(5)) == "5/1"
        assert rational("-2/3") == Fraction(-2, 3)
        assert rational("7") == 7

    @given(rationals)
    def test_round_trip(self, q):
        assert rational(format_rational(q)) == q

    def test_matrix_json_round_trip(self):
        m = Matrix([[Fraction(1, 3), -2], [Fraction(7, 5), 0]])
        obj = matrix_to_json(m)
        assert obj["rows"] == 2 and obj["cols"] == 2
        assert matrix_from_json(obj) == m

    def test_matrix_json_shape_validation(self):
        with pytest.raises(ValueError):
            matrix_from_json({"rows": 3, "cols": 2, "entries": [["1/1", "2/1"]]})
