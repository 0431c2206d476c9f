"""Construction of the slow-convergence counterexample instance.

Three RPS copies are coupled into a 9x9 skew-symmetric game

    M = [[A, B, -B], [-B, A, B], [B, -B, A]],  A = rps, B symmetric,

so that play cycles through the blocks in phases.  During phase k the
active block replays an RPS window described by a pair of admissible
quadratic-form matrices (Q0, Q1), and the utility stack obeys the
recurrence

    V1 + A @ Q = V3 @ C,   V2 - B @ Q = V1 @ C,   V3 + B @ Q = V2 @ C,

with Q = Q1 - Q0 and V1 = ones @ Delta^T + A @ Q0.  Eliminating V2, V3
collapses the recurrence into one linear condition on (B, Delta):

    A @ Q + B @ Q @ (C - C^2) = (ones @ Delta^T + A @ Q0) @ (C^3 - I),

which `solve_key_equation` treats as an exact linear system in the six
free entries of symmetric B and the three entries of Delta.  A dummy
action appended to M absorbs the required initial utilities, giving the
10x10 matrix built by `build_M_aug`.

Phase boundaries follow the cubic timetable T_k, and the designed
top-gap step between consecutive phase stacks makes the block handoff
land exactly on it.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import (
    Matrix,
    Vector,
    bvec,
    cmat,
    format_rational,
    rational,
    solve_linear_system,
)
from .report import VerificationReport
from .rps import VERTEX_MATRICES, is_admissible, rps_matrix, substitute_k


def canonical_q0() -> Matrix:
    return Matrix([[12, 8, -12], [12, 0, 0], [12, 4, 0]])


def canonical_q1() -> Matrix:
    return Matrix([[48, 208, 225], [48, 200, 213], [48, 200, 208]])


def canonical_b() -> Matrix:
    return Fraction(-1, 900) * Matrix([[71, 54, 75], [54, 21, 25], [75, 25, 50]])


def canonical_delta() -> Vector:
    # The middle coefficient is pinned by the phase recurrence given
    # (Q0, Q1, B); see solve_key_equation.  The third entry is a free
    # gauge and is fixed to zero.
    return Vector([2, Fraction(298, 27), 0])


CANONICAL_DUMMY_MARGIN = Fraction(1, 2700)


@dataclass(frozen=True)
class InstanceBundle:
    """All constants of one constructed instance, mutually consistent."""

    Q0: Matrix
    Q1: Matrix
    Q: Matrix
    B: Matrix
    Delta: Vector
    V1: Matrix
    V2: Matrix
    V3: Matrix
    U0: Vector
    delta: Fraction
    M: Matrix
    M_aug: Matrix

    def to_json_dict(self) -> dict:
        return {
            "Q0": self.Q0.to_rows(),
            "Q1": self.Q1.to_rows(),
            "Q": self.Q.to_rows(),
            "B": self.B.to_rows(),
            "Delta": self.Delta.to_strings(),
            "V1": self.V1.to_rows(),
            "V2": self.V2.to_rows(),
            "V3": self.V3.to_rows(),
            "U0": self.U0.to_strings(),
            "delta": format_rational(self.delta),
            "M": self.M.to_rows(),
            "M_aug": self.M_aug.to_rows(),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)


def build_M(b: Matrix) -> Matrix:
    """Couple three RPS copies through a symmetric interaction matrix."""
    if b.shape != (3, 3):
        raise ValueError("interaction matrix must be 3x3")
    if not b.is_symmetric():
        raise ValueError("interaction matrix must be symmetric")
    a = rps_matrix()
    return Matrix.block([[a, b, -b], [-b, a, b], [b, -b, a]])


def derive_Vs(b: Matrix, delta: Vector, q0: Matrix, q: Matrix
              ) -> tuple[Matrix, Matrix, Matrix]:
    """Utility-stack matrices from (B, Delta, Q0, Q) via the recurrence.

    Raises ValueError when the inputs do not close the recurrence, i.e.
    V1 + A @ Q != V3 @ C.
    """
    a = rps_matrix()
    c = cmat()
    ones_delta = Matrix([list(delta.entries)] * 3)
    v1 = ones_delta + a @ q0
    v2 = v1 @ c + b @ q
    v3 = v2 @ c - b @ q
    closure_lhs = v1 + a @ q
    closure_rhs = v3 @ c
    if closure_lhs != closure_rhs:
        residual = closure_lhs - closure_rhs
        raise ValueError(
            "phase recurrence does not close for these inputs; "
            f"V1 + A@Q - V3@C = {residual!r}"
        )
    return v1, v2, v3


def timetable(k: int) -> int:
    """Phase-start time T_k = 36k^3 + 244k^2 + 378k - 658 (T_1 = 0)."""
    if k < 1:
        raise ValueError("timetable is defined for k >= 1")
    return 36 * k**3 + 244 * k**2 + 378 * k - 658


def phase_length(k: int) -> int:
    """Steps spent in phase k: T_{k+1} - T_k = sum(Q @ bvec(k))."""
    return timetable(k + 1) - timetable(k)


def active_block(k: int) -> int:
    """0-based index of the block that plays during phase k."""
    if k < 1:
        raise ValueError("phases are numbered from 1")
    return (k - 1) % 3


def phase_stack(v1: Matrix, v2: Matrix, v3: Matrix, k: int) -> Vector:
    """Expected 9-entry utility vector at time T_k.

    The (V1, V2, V3) stack rotates one block per phase; V1 always sits
    in the active block.
    """
    rot = active_block(k)
    vs = (v1, v2, v3)
    stacked: Vector | None = None
    for position in range(3):
        part = vs[(position - rot) % 3] @ bvec(k)
        stacked = part if stacked is None else stacked.concat(part)
    return stacked


def _assemble_aug(m: Matrix, u0: Vector, delta: Fraction) -> Matrix:
    """Assembly step of build_M_aug, without the margin range check."""
    lift = -u0.min()
    pattern = [2 * delta, delta, Fraction(0)] * 3
    lifted = Vector(v + lift + p for v, p in zip(u0, pattern))
    rows = [[Fraction(0)] + [-v for v in lifted]]
    for i in range(9):
        rows.append([lifted[i]] + list(m.rows[i]))
    return Matrix(rows)


def build_M_aug(m: Matrix, u0: Vector, delta: Fraction | int | str) -> Matrix:
    """Append a dummy action encoding the initial utilities.

    The dummy column lifts u0 by -min(u0) and adds the strictly
    decreasing within-block pattern [2*delta, delta, 0], so the lifted
    vector is positive with distinct within-block offsets and the dummy
    action is never a best response after the first step.  delta must
    lie strictly inside (0, 1/1800) so the pattern stays below every
    utility gap the 9x9 game can produce.
    """
    delta = rational(delta)
    if not (0 < delta < Fraction(1, 1800)):
        raise ValueError(f"delta must lie in (0, 1/1800), got {delta}")
    if m.shape != (9, 9) or not m.is_skew_symmetric():
        raise ValueError("expected the 9x9 skew-symmetric game")
    if len(u0) != 9:
        raise ValueError("expected a length-9 initialization vector")
    aug = _assemble_aug(m, u0, delta)
    lifted = aug.column(0)
    head, tail = lifted[0], Vector(lifted.entries[1:])
    assert head == 0
    if not (tail.min() > 0 and tail.max() > tail.min()):
        raise ValueError("lifted initialization must satisfy max > min > 0")
    return aug


def canonical_constants() -> InstanceBundle:
    """The canonical instance, derived (not transcribed) from its seeds.

    Only Q0, Q1, B, Delta, and the dummy margin are literals; V1..V3,
    U0, M, and M_aug are computed from them so the bundle is consistent
    by construction.
    """
    q0, q1, b = canonical_q0(), canonical_q1(), canonical_b()
    delta_vec = canonical_delta()
    q = q1 - q0
    v1, v2, v3 = derive_Vs(b, delta_vec, q0, q)
    u0 = (v1 @ bvec(1)).concat(v2 @ bvec(1)).concat(v3 @ bvec(1))
    m = build_M(b)
    m_aug = build_M_aug(m, u0, CANONICAL_DUMMY_MARGIN)
    return InstanceBundle(Q0=q0, Q1=q1, Q=q, B=b, Delta=delta_vec,
                          V1=v1, V2=v2, V3=v3, U0=u0,
                          delta=CANONICAL_DUMMY_MARGIN, M=m, M_aug=m_aug)


# --- the key linear condition -------------------------------------------------

_SYM_INDEX = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (0, 2): 2, (2, 0): 2,
              (1, 1): 3, (1, 2): 4, (2, 1): 4, (2, 2): 5}


def _key_sides(b: Matrix, delta: Vector, q0: Matrix, q1: Matrix
               ) -> tuple[Matrix, Matrix]:
    a = rps_matrix()
    c = cmat()
    q = q1 - q0
    ones_delta = Matrix([list(delta.entries)] * 3)
    lhs = a @ q + b @ q @ (c - c @ c)
    rhs = (ones_delta + a @ q0) @ (c**3 - Matrix.identity(3))
    return lhs, rhs


def check_key_equation(b: Matrix, delta: Vector, q0: Matrix, q1: Matrix
                       ) -> VerificationReport:
    """Entrywise check of the collapsed phase-recurrence condition."""
    lhs, rhs = _key_sides(b, delta, q0, q1)
    report = VerificationReport(
        claim="key-equation",
        params={"B": b, "Delta": delta},
    )
    for i in range(3):
        for j in range(3):
            report.record(f"entry({i},{j})", rhs[i, j], lhs[i, j])
    return report


def _key_system(q0: Matrix, q1: Matrix) -> tuple[Matrix, Vector]:
    """Linear system A_sys @ u = rhs over u = (b11,b12,b13,b22,b23,b33,d1,d2,d3)."""
    a = rps_matrix()
    c = cmat()
    q = q1 - q0
    w = q @ (c - c @ c)
    c3i = c**3 - Matrix.identity(3)
    aq = a @ q
    aq0c = a @ q0 @ c3i
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for i in range(3):
        for j in range(3):
            coeffs = [Fraction(0)] * 9
            for l in range(3):
                coeffs[_SYM_INDEX[(i, l)]] += w[l, j]
                coeffs[6 + l] -= c3i[l, j]
            rows.append(coeffs)
            rhs.append(aq0c[i, j] - aq[i, j])
    return Matrix(rows), Vector(rhs)


def _unpack_solution(u: Vector) -> tuple[Matrix, Vector]:
    b = Matrix([[u[0], u[1], u[2]], [u[1], u[3], u[4]], [u[2], u[4], u[5]]])
    return b, Vector([u[6], u[7], u[8]])


def _pack_solution(b: Matrix, delta: Vector) -> Vector:
    return Vector([b[0, 0], b[0, 1], b[0, 2], b[1, 1], b[1, 2], b[2, 2],
                   delta[0], delta[1], delta[2]])


@dataclass
class KeySolution:
    """Exact solution set of the key condition for one (Q0, Q1) pair."""

    consistent: bool
    particular: tuple[Matrix, Vector] | None
    nullspace: list[tuple[Matrix, Vector]]
    rank: int
    q0: Matrix
    q1: Matrix

    def contains(self, b: Matrix, delta: Vector) -> bool:
        """Exact membership: does (B, Delta) satisfy the condition?"""
        system, rhs = _key_system(self.q0, self.q1)
        return system @ _pack_solution(b, delta) == rhs

    def residual(self, b: Matrix, delta: Vector) -> Vector:
        system, rhs = _key_system(self.q0, self.q1)
        return (system @ _pack_solution(b, delta)) - rhs

    def solve_for_delta(self, delta: Vector
                        ) -> tuple[Matrix, list[Matrix]] | None:
        """Symmetric B solutions for a fixed Delta, as an affine slice.

        Returns (particular B, basis of B-directions that preserve the
        condition at this Delta), or None when the pinned system is
        inconsistent.
        """
        system, rhs = _key_system(self.q0, self.q1)
        pinned_rows = [list(r) for r in system.rows]
        pinned_rhs = list(rhs.entries)
        for i in range(3):
            row = [Fraction(0)] * 9
            row[6 + i] = Fraction(1)
            pinned_rows.append(row)
            pinned_rhs.append(rational(delta[i]))
        solution = solve_linear_system(Matrix(pinned_rows), Vector(pinned_rhs))
        if solution is None:
            return None
        b, _ = _unpack_solution(solution.particular)
        directions = [_unpack_solution(v)[0] for v in solution.nullspace]
        return b, directions

    def to_json_dict(self) -> dict:
        out: dict = {"consistent": self.consistent, "rank": self.rank}
        if self.particular is not None:
            b, d = self.particular
            out["particular"] = {"B": b.to_rows(), "Delta": d.to_strings()}
        out["nullspace"] = [
            {"B": b.to_rows(), "Delta": d.to_strings()} for b, d in self.nullspace
        ]
        return out


def key_infeasibility_witness(q0: Matrix, q1: Matrix
                              ) -> tuple[Vector, Fraction] | None:
    """Exact certificate that no (B, Delta) exists for this pair.

    Returns a row combination y with y @ system == 0 but y . rhs != 0,
    or None when the system is consistent.
    """
    system, rhs = _key_system(q0, q1)
    homogeneous = solve_linear_system(system.transpose(), Vector.zero(system.nrows))
    for y in homogeneous.nullspace:
        value = y.dot(rhs)
        if value != 0:
            return y, value
    return None


def solve_key_equation(q0: Matrix, q1: Matrix) -> KeySolution:
    """Solve the key condition exactly as a linear system in (B, Delta).

    Nine scalar equations in nine unknowns (six for symmetric B, three
    for Delta); the result is a particular solution plus a nullspace
    basis, or a KeySolution with consistent=False when no (B, Delta)
    closes the recurrence for this pair.
    """
    system, rhs = _key_system(q0, q1)
    solution = solve_linear_system(system, rhs)
    if solution is None:
        return KeySolution(False, None, [], rank=0, q0=q0, q1=q1)
    particular = _unpack_solution(solution.particular)
    nullspace = [_unpack_solution(v) for v in solution.nullspace]
    return KeySolution(True, particular, nullspace, rank=solution.rank,
                       q0=q0, q1=q1)


def check_key_inequality(v1: Matrix, v3: Matrix, b: Matrix,
                         k_range: Iterable[int] = range(1, 21),
                         expected_step: Fraction | None = None
                         ) -> VerificationReport:
    """Handoff-margin data: d(k) = max(V1 bvec(k)) - max(V3 bvec(k)).

    The phased structure needs d(k) > 0; the designed instances aim for
    a constant step (pass additionally requires it when expected_step is
    given).  Whether d(k) also stays below the strict per-step bound
    -max(B) is recorded as data, not gated: the canonical instance
    violates that sufficient condition yet its phase structure holds,
    which the simulation-based verifier certifies directly.
    """
    ks = sorted(set(int(k) for k in k_range))
    margin = -b.max_entry()
    report = VerificationReport(
        claim="key-inequality",
        params={"k_range": [ks[0], ks[-1]], "strict_margin": margin},
    )
    values: list[Fraction] = []
    within = True
    for k in ks:
        d = (v1 @ bvec(k)).max() - (v3 @ bvec(k)).max()
        values.append(d)
        report.record_flag(f"d({k})>0", d > 0, expected="positive", actual=d)
        if expected_step is not None:
            report.record(f"d({k})==step", expected_step, d)
        within = within and (0 < d < margin)
    report.params["within_strict_bound"] = within
    report.params["d_values"] = values
    if not within:
        report.note(
            "d(k) does not lie inside (0, -max(B)); positivity holds but the "
            "strict sufficient bound does not, so phase timing must be "
            "certified by simulation."
        )
    return report


# --- brute-force instance search ---------------------------------------------

_RUN_OFFSET = {1: 1, 2: 3, 3: 5}  # action-run length after vertex i is 6k + offset


@dataclass(frozen=True)
class WindowSpec:
    """One admissible-matrix candidate: vertex family + reindex + slide.

    The candidate is VERTEX_MATRICES[base-1] reindexed with k -> a*k + b,
    plus slide_alpha*k + slide_beta extra steps of the action that runs
    after that vertex.
    """

    base: int
    a: int
    b: int
    slide_alpha: int = 0
    slide_beta: int = 0

    def matrix(self) -> Matrix:
        q = substitute_k(VERTEX_MATRICES[self.base - 1], self.a, self.b)
        rows = [list(r) for r in q.rows]
        slide_row = self.base - 1
        rows[slide_row][1] += self.slide_alpha
        rows[slide_row][2] += self.slide_beta
        return Matrix(rows)

    def slide_in_run(self, k_check: Iterable[int]) -> bool:
        """Does the slide stay inside the single-action run for all checked k?"""
        off = _RUN_OFFSET[self.base]
        for k in k_check:
            kappa = self.a * k + self.b
            if kappa < 1:
                return False
            s = self.slide_alpha * k + self.slide_beta
            if not (0 <= s <= 6 * kappa + off):
                return False
        return True

    def to_json_dict(self) -> dict:
        return {"base": self.base, "a": self.a, "b": self.b,
                "slide_alpha": self.slide_alpha, "slide_beta": self.slide_beta}


def enumerate_window_specs(a_max: int = 6, b_max: int = 12,
                           slide_alpha_max: int = 0, slide_beta_max: int = 0,
                           k_check: Iterable[int] = range(1, 9)
                           ) -> list[WindowSpec]:
    """All plausible candidates within the given bounds (cheap filters only)."""
    ks = list(k_check)
    specs = []
    for base, a, b in itertools.product(
            (1, 2, 3), range(1, a_max + 1), range(-b_max, b_max + 1)):
        for alpha, beta in itertools.product(
                range(0, slide_alpha_max + 1),
                range(-slide_beta_max, slide_beta_max + 1)):
            spec = WindowSpec(base, a, b, alpha, beta)
            if spec.slide_in_run(ks):
                specs.append(spec)
    return specs


@dataclass
class SearchHit:
    """A candidate pair whose key condition admits a usable (B, Delta)."""

    q0_spec: WindowSpec
    q1_spec: WindowSpec
    delta: Vector
    b: Matrix
    b_fully_negative: bool
    handoff_positive: bool
    admissible: bool

    def to_json_dict(self) -> dict:
        return {
            "q0_spec": self.q0_spec.to_json_dict(),
            "q1_spec": self.q1_spec.to_json_dict(),
            "Delta": self.delta.to_strings(),
            "B": self.b.to_rows(),
            "b_fully_negative": self.b_fully_negative,
            "handoff_positive": self.handoff_positive,
            "admissible": self.admissible,
        }


def negative_b_on_slice(b_part: Matrix, directions: Sequence[Matrix]
                        ) -> Matrix | None:
    """A fully negative symmetric B on an affine slice, if one exists.

    The zero-dimensional case tests the point; the one-dimensional case
    intersects the six strict linear inequalities exactly and returns
    the midpoint of the feasible interval.  Higher-dimensional slices
    are only probed at the particular point (good enough for the small
    search boxes this driver is meant for).
    """
    if not directions:
        return b_part if b_part.max_entry() < 0 else None
    if len(directions) > 1:
        return b_part if b_part.max_entry() < 0 else None
    d = directions[0]
    lo: Fraction | None = None
    hi: Fraction | None = None
    for i in range(3):
        for j in range(i, 3):
            base, slope = b_part[i, j], d[i, j]
            if slope == 0:
                if base >= 0:
                    return None
                continue
            bound = -base / slope
            if slope > 0:
                hi = bound if hi is None else min(hi, bound)
            else:
                lo = bound if lo is None else max(lo, bound)
    if lo is not None and hi is not None and lo >= hi:
        return None
    if lo is None and hi is None:
        s = Fraction(0)
    elif lo is None:
        s = hi - 1
    elif hi is None:
        s = lo + 1
    else:
        s = (lo + hi) / 2
    candidate = b_part + s * d
    return candidate if candidate.max_entry() < 0 else None


def search_instances(specs: Sequence[WindowSpec],
                     delta_probes: Sequence[Vector],
                     k_check: Iterable[int] = range(1, 9),
                     require_negative_b: bool = True,
                     admissibility_range: Iterable[int] = range(1, 9),
                     limit: int | None = None) -> list[SearchHit]:
    """Brute-force pass over candidate pairs x Delta probes.

    For every ordered pair with a strictly positive, growing window the
    key condition is solved; each Delta probe then pins an affine slice
    of symmetric B's, from which a fully negative member is taken when
    required.  Kept pairs must also have a positive handoff margin d(k)
    and pass the simulated admissibility check.
    """
    ks = list(k_check)
    hits: list[SearchHit] = []
    for s0, s1 in itertools.permutations(specs, 2):
        q0m, q1m = s0.matrix(), s1.matrix()
        window = q1m - q0m
        if not _window_is_positive(window, ks):
            continue
        solution = solve_key_equation(q0m, q1m)
        if not solution.consistent:
            continue
        for probe in delta_probes:
            slice_ = solution.solve_for_delta(probe)
            if slice_ is None:
                continue
            b_part, directions = slice_
            if require_negative_b:
                b = negative_b_on_slice(b_part, directions)
                if b is None:
                    continue
            else:
                b = b_part
            negative = b.max_entry() < 0
            try:
                v1, _, v3 = derive_Vs(b, probe, q0m, window)
            except ValueError:
                continue
            handoff = all(
                (v1 @ bvec(k)).max() - (v3 @ bvec(k)).max() > 0 for k in ks
            )
            if not handoff:
                continue
            admissible = (
                is_admissible(q0m, admissibility_range).passed
                and is_admissible(q1m, admissibility_range).passed
            )
            hits.append(SearchHit(s0, s1, probe, b, negative, handoff,
                                  admissible))
            if limit is not None and len(hits) >= limit:
                return hits
    return hits


def _window_is_positive(window: Matrix, ks: Iterable[int]) -> bool:
    for k in ks:
        counts = window @ bvec(k)
        if any(e < 0 or e.denominator != 1 for e in counts):
            return False
        if counts.sum() <= 0:
            return False
    return True
