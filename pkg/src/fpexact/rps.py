"""The rock-paper-scissors building block.

Under lexicographic tie-breaking, symmetric fictitious play on RPS is
periodic: the empirical counts spiral outward through a sequence of
vertex states with quadratic coordinates.  A 3x3 integer matrix Q is
*admissible* when the counts hit Q @ bvec(k) exactly at time
t = sum(Q @ bvec(k)) for every k; admissibility is checked here by a
single simulated run with checkpoints, which is the unambiguous oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .engine import FpState, TieBreakPolicy, Trajectory, run
from .exact import Matrix, Vector, bvec
from .report import VerificationReport


def rps_matrix() -> Matrix:
    """Payoff matrix of rock-paper-scissors (skew-symmetric)."""
    return Matrix([[0, -1, 1], [1, 0, -1], [-1, 1, 0]])


#: The three vertex-state matrices: counts at the corners of the spiral,
#: as quadratic forms in k (columns multiply [k^2, k, 1]).
VERTEX_MATRICES: tuple[Matrix, Matrix, Matrix] = (
    Matrix([[3, -2, 0], [3, 0, 0], [3, 2, 0]]),
    Matrix([[3, 4, 1], [3, 0, 0], [3, 2, 0]]),
    Matrix([[3, 4, 1], [3, 6, 3], [3, 2, 0]]),
)


@dataclass(frozen=True)
class VertexState:
    """Exact iterate (t, x_t, U_t) at one spiral vertex."""

    t: int
    x: Vector
    u: Vector


def vertex_states(k: int) -> tuple[VertexState, VertexState, VertexState]:
    """The three closed-form vertex states of spiral cycle k (k >= 1)."""
    if k < 1:
        raise ValueError("vertex states are defined for k >= 1")
    kk = k * k
    first = VertexState(
        t=9 * kk,
        x=Vector([3 * kk - 2 * k, 3 * kk, 3 * kk + 2 * k]),
        u=Vector([2 * k, -4 * k, 2 * k]),
    )
    second = VertexState(
        t=9 * kk + 6 * k + 1,
        x=Vector([3 * kk + 4 * k + 1, 3 * kk, 3 * kk + 2 * k]),
        u=Vector([2 * k, 2 * k + 1, -4 * k - 1]),
    )
    third = VertexState(
        t=9 * kk + 12 * k + 4,
        x=Vector([3 * kk + 4 * k + 1, 3 * kk + 6 * k + 3, 3 * kk + 2 * k]),
        u=Vector([-4 * k - 3, 2 * k + 1, 2 * k + 2]),
    )
    return first, second, third


def run_rps(steps: int, *, u_init: Vector | None = None,
            checkpoints: Iterable[int] = (),
            policy: TieBreakPolicy | None = None,
            record_actions: bool = True) -> tuple[Trajectory, FpState]:
    """Fresh symmetric RPS run; returns the trajectory and final state."""
    a = rps_matrix()
    state = FpState.symmetric(3, policy=policy, u_init=u_init)
    traj = run(state, a, steps, checkpoints=checkpoints,
               record_actions=record_actions)
    return traj, state


def _quadratic_targets(q: Matrix, ks: list[int]) -> list[tuple[int, int, Vector]]:
    """Per-k (k, t, expected counts) with the time preconditions enforced."""
    if q.shape != (3, 3):
        raise ValueError("expected a 3x3 quadratic-form matrix")
    targets = []
    prev_t = 0
    for k in ks:
        expected = q @ bvec(k)
        t_frac = expected.sum()
        if t_frac.denominator != 1 or t_frac <= 0:
            raise ValueError(f"target time {t_frac} at k={k} is not a positive integer")
        t = int(t_frac)
        if t <= prev_t:
            raise ValueError(f"target times must be strictly increasing (k={k})")
        prev_t = t
        targets.append((k, t, expected))
    return targets


def is_admissible(q: Matrix, k_range: Iterable[int] = range(1, 31)
                  ) -> VerificationReport:
    """Check x_t == Q @ bvec(k) at t = sum(Q @ bvec(k)) by one simulated run."""
    ks = sorted(set(int(k) for k in k_range))
    if not ks or ks[0] < 1:
        raise ValueError("k_range must contain integers >= 1")
    targets = _quadratic_targets(q, ks)
    report = VerificationReport(
        claim="rps-admissibility",
        params={"k_range": [ks[0], ks[-1]], "matrix": q},
    )
    traj, _ = run_rps(targets[-1][1], checkpoints=[t for _, t, _ in targets],
                      record_actions=False)
    for k, t, expected in targets:
        actual = Vector(traj.checkpoints[t].x)
        report.record(f"k={k},t={t}", expected, actual)
    return report


def substitute_k(q: Matrix, a: int, b: int) -> Matrix:
    """Reindex the quadratic form: result @ bvec(k) == q @ bvec(a*k + b)."""
    if a < 1:
        raise ValueError("substitution needs a >= 1")
    shift = Matrix([[a * a, 2 * a * b, b * b], [0, a, b], [0, 0, 1]])
    return q @ shift


def windowed_run_check(q0: Matrix, q1: Matrix,
                       k_range: Iterable[int] = range(1, 11)
                       ) -> VerificationReport:
    """Initialization-window property of an admissible pair (Q0, Q1).

    Starting FP from U = A_rps @ Q0 @ bvec(k) replays the plain RPS run
    between times sum(Q0 @ bvec(k)) and sum(Q1 @ bvec(k)), so after
    sum((Q1 - Q0) @ bvec(k)) steps the counts equal (Q1 - Q0) @ bvec(k).
    """
    ks = sorted(set(int(k) for k in k_range))
    if not ks or ks[0] < 1:
        raise ValueError("k_range must contain integers >= 1")
    a = rps_matrix()
    window = q1 - q0
    report = VerificationReport(
        claim="rps-windowed-initialization",
        params={"k_range": [ks[0], ks[-1]]},
    )
    for k in ks:
        expected = window @ bvec(k)
        steps_frac = expected.sum()
        if steps_frac.denominator != 1 or steps_frac < 0:
            raise ValueError(f"window length {steps_frac} at k={k} is invalid")
        steps = int(steps_frac)
        if steps == 0:
            report.record(f"k={k},steps=0", expected, Vector.zero(3))
            continue
        u_init = a @ (q0 @ bvec(k))
        state = FpState.symmetric(3, u_init=u_init)
        run(state, a, steps, record_actions=False)
        report.record(f"k={k},steps={steps}", expected, Vector(state.x))
    return report
