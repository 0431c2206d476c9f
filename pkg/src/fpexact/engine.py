"""Fictitious-play iteration with pluggable tie-breaking.

Two interchangeable execution paths produce identical trajectories:

* reference steppers (`fp_step_symmetric`, `fp_step_general`) that work
  directly on Fractions, one step at a time;
* a scaled-integer loop used by `run` for symmetric games under the
  lexicographic or strict policy.  The game and the initial utility
  vector are rescaled once by the common denominator of all entries, so
  every step is a handful of plain Python integer additions.  Python
  integers are arbitrary precision, so the loop stays exact no matter
  how far the utilities grow.

Action indices are 0-based throughout the Python API; serialized
artifacts (CSV, reports) use 1-based action numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .exact import Matrix, Vector

TieChooser = Callable[[tuple[int, ...], int, tuple[Fraction, ...]], int]


class TieError(RuntimeError):
    """Raised by the strict policy when the best-response set is not a singleton."""

    def __init__(self, t: int, tied: Sequence[int]):
        self.t = t
        self.tied = tuple(tied)
        super().__init__(f"tie at step {t}: actions {list(self.tied)} share the optimum")


@dataclass(frozen=True)
class TieBreakPolicy:
    """How to pick an action when several are tied at the optimum.

    * ``lexicographic`` takes the lowest index,
    * ``strict`` refuses to choose and raises :class:`TieError`,
    * ``adversarial`` defers to a callback ``(tied, t, utilities) -> index``
      whose choice must come from the tied set.
    """

    kind: str
    choose: TieChooser | None = None

    @classmethod
    def lexicographic(cls) -> "TieBreakPolicy":
        return cls("lexicographic")

    @classmethod
    def strict(cls) -> "TieBreakPolicy":
        return cls("strict")

    @classmethod
    def adversarial(cls, choose: TieChooser) -> "TieBreakPolicy":
        return cls("adversarial", choose)

    def resolve(self, tied: tuple[int, ...], t: int,
                utilities: tuple[Fraction, ...]) -> int:
        if len(tied) == 1:
            return tied[0]
        if self.kind == "lexicographic":
            return tied[0]
        if self.kind == "strict":
            raise TieError(t, tied)
        if self.kind == "adversarial":
            if self.choose is None:
                raise ValueError("adversarial policy needs a callback")
            choice = self.choose(tied, t, utilities)
            if choice not in tied:
                raise ValueError(
                    f"adversarial callback chose {choice}, not in tied set {list(tied)}"
                )
            return choice
        raise ValueError(f"unknown tie-break policy kind {self.kind!r}")


def _argmax_set(values: Sequence) -> tuple[int, ...]:
    top = max(values)
    return tuple(i for i, v in enumerate(values) if v == top)


def _argmin_set(values: Sequence) -> tuple[int, ...]:
    low = min(values)
    return tuple(i for i, v in enumerate(values) if v == low)


@dataclass
class FpState:
    """Mutable iteration state: step count, action counts, utilities.

    Symmetric mode tracks ``U = u_init + A @ x``; general (two-player)
    mode tracks the pair ``row_util = A @ y`` and ``col_util = A^T @ x``.
    """

    t: int
    x: list[int]
    policy: TieBreakPolicy
    U: list[Fraction] | None = None
    u_init: tuple[Fraction, ...] | None = None
    y: list[int] | None = None
    row_util: list[Fraction] | None = None
    col_util: list[Fraction] | None = None

    @property
    def mode(self) -> str:
        return "general" if self.y is not None else "symmetric"

    @classmethod
    def symmetric(cls, n: int, policy: TieBreakPolicy | None = None,
                  u_init: Vector | Sequence | None = None) -> "FpState":
        policy = policy or TieBreakPolicy.lexicographic()
        if u_init is None:
            init = tuple(Fraction(0) for _ in range(n))
        else:
            init = tuple(Vector(u_init).entries)
            if len(init) != n:
                raise ValueError(f"u_init has length {len(init)}, expected {n}")
        return cls(t=0, x=[0] * n, policy=policy, U=list(init), u_init=init)

    @classmethod
    def general(cls, n: int, m: int,
                policy: TieBreakPolicy | None = None) -> "FpState":
        policy = policy or TieBreakPolicy.lexicographic()
        zero_n = [Fraction(0) for _ in range(n)]
        zero_m = [Fraction(0) for _ in range(m)]
        return cls(t=0, x=[0] * n, policy=policy, y=[0] * m,
                   row_util=list(zero_n), col_util=list(zero_m))

    def utilities(self) -> Vector:
        if self.mode != "symmetric":
            raise ValueError("utilities() is defined for symmetric states")
        return Vector(self.U)


def fp_step_symmetric(state: FpState, a: Matrix) -> tuple[int, FpState]:
    """One symmetric step: best response to U, then U += A[:, i]."""
    if state.mode != "symmetric":
        raise ValueError("state is not in symmetric mode")
    if not a.is_skew_symmetric():
        raise ValueError("symmetric play requires a skew-symmetric matrix")
    if a.nrows != len(state.x):
        raise ValueError(f"matrix is {a.shape}, state has {len(state.x)} actions")
    u = state.U
    t_next = state.t + 1
    i = state.policy.resolve(_argmax_set(u), t_next, tuple(u))
    state.U = [uv + a.rows[r][i] for r, uv in enumerate(u)]
    state.x[i] += 1
    state.t = t_next
    return i, state


def fp_step_general(state: FpState, a: Matrix) -> tuple[int, int, FpState]:
    """One two-player step: row best response and column best response.

    Ties on the column side are resolved by the same policy applied to
    the negated utility vector, so the callback always sees an argmax.
    """
    if state.mode != "general":
        raise ValueError("state is not in general mode")
    if a.nrows != len(state.x) or a.ncols != len(state.y):
        raise ValueError(
            f"matrix is {a.shape}, state is {len(state.x)} x {len(state.y)}"
        )
    t_next = state.t + 1
    row_util, col_util = state.row_util, state.col_util
    i = state.policy.resolve(_argmax_set(row_util), t_next, tuple(row_util))
    negated = tuple(-v for v in col_util)
    j = state.policy.resolve(_argmin_set(col_util), t_next, negated)
    state.x[i] += 1
    state.y[j] += 1
    state.row_util = [v + a.rows[r][j] for r, v in enumerate(row_util)]
    state.col_util = [v + a.rows[i][c] for c, v in enumerate(col_util)]
    state.t = t_next
    return i, j, state


def top_gap(u: Vector | Sequence) -> Fraction:
    """Margin between the largest and second-largest entry (0 on a tie)."""
    values = list(u)
    if len(values) < 2:
        raise ValueError("top_gap needs at least two entries")
    top = max(values)
    i = values.index(top)
    second = max(values[:i] + values[i + 1:])
    return Fraction(top - second)


@dataclass(frozen=True)
class Checkpoint:
    t: int
    x: tuple[int, ...]
    u: Vector | None = None
    y: tuple[int, ...] | None = None


@dataclass
class Trajectory:
    """Recorded run: actions, sparse checkpoints, gap samples, scan results.

    ``actions[k]`` is the (0-based) action of step ``t_start + k + 1``;
    when recorded from a fresh state its length equals the final t.
    ``gap_samples`` holds ``(t, 2 max(U_t) / t)`` at the requested times.
    """

    t_start: int
    steps: int
    actions: list[int] = field(default_factory=list)
    col_actions: list[int] | None = None
    checkpoints: dict[int, Checkpoint] = field(default_factory=dict)
    gap_samples: list[tuple[int, Fraction]] = field(default_factory=list)
    top_gap_samples: list[tuple[int, Fraction]] = field(default_factory=list)
    min_top_gap: tuple[Fraction, int] | None = None
    tie_count: int = 0
    tie_steps: list[int] = field(default_factory=list)
    max_monotone: bool = True

    @property
    def final_t(self) -> int:
        return self.t_start + self.steps


_TIE_STEP_CAP = 1000


def run(state: FpState, a: Matrix, steps: int, *,
        checkpoints: Iterable[int] = (),
        gap_times: Iterable[int] = (),
        sample_top_gap: bool = False,
        record_actions: bool = True,
        top_gap_from: int | None = None,
        count_ties: bool = False) -> Trajectory:
    """Advance the state `steps` times, recording the requested artifacts.

    checkpoints: absolute times t at which to snapshot (x_t, U_t) exactly.
    gap_times:   absolute times t at which to sample the gap 2 max(U_t)/t;
                 with sample_top_gap the top-gap is sampled there too.
    top_gap_from: when set, track min over t >= top_gap_from of the
                  top-gap of U_t, i.e. the exact no-tie margin.
    count_ties:  count the steps whose best-response set was tied.

    Identical inputs produce identical trajectories; the scaled-integer
    path and the Fraction steppers are interchangeable.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if state.mode == "general":
        if list(gap_times) or top_gap_from is not None or count_ties:
            raise ValueError(
                "gap sampling, top-gap tracking, and tie counting are "
                "defined for symmetric runs only"
            )
        return _run_general(state, a, steps, checkpoints, record_actions)
    if not a.is_skew_symmetric():
        raise ValueError("symmetric play requires a skew-symmetric matrix")
    if a.nrows != len(state.x):
        raise ValueError(f"matrix is {a.shape}, state has {len(state.x)} actions")
    if state.policy.kind == "adversarial":
        return _run_symmetric_exact(state, a, steps, checkpoints, gap_times,
                                    sample_top_gap, record_actions,
                                    top_gap_from, count_ties)
    return _run_symmetric_scaled(state, a, steps, checkpoints, gap_times,
                                 sample_top_gap, record_actions,
                                 top_gap_from, count_ties)


def _times_in_window(times: Iterable[int], lo: int, hi: int) -> list[int]:
    window = sorted({int(t) for t in times if lo <= t <= hi})
    return window


def _run_symmetric_scaled(state: FpState, a: Matrix, steps: int,
                          checkpoints: Iterable[int], gap_times: Iterable[int],
                          sample_top_gap: bool, record_actions: bool,
                          top_gap_from: int | None,
                          count_ties: bool) -> Trajectory:
    n = a.nrows
    scale = 1
    for row in a.rows:
        for e in row:
            scale = math.lcm(scale, e.denominator)
    for v in state.U:
        scale = math.lcm(scale, v.denominator)
    cols = [tuple(int(a.rows[r][j] * scale) for r in range(n)) for j in range(n)]
    u = [int(v * scale) for v in state.U]
    x = list(state.x)
    t0 = state.t
    traj = Trajectory(t_start=t0, steps=0)

    cp_times = _times_in_window(checkpoints, t0, t0 + steps)
    if cp_times and cp_times[0] == t0:
        traj.checkpoints[t0] = _snapshot(t0, x, u, scale)
        cp_times.pop(0)
    gp_times = _times_in_window(gap_times, max(t0 + 1, 1), t0 + steps)
    cp_i = gp_i = 0
    strict = state.policy.kind == "strict"
    need_tie_check = strict or count_ties
    track_gap = top_gap_from is not None
    actions = traj.actions
    best_gap: int | None = None
    best_gap_t = -1
    mono = True
    prev_max: int | None = None
    # Sentinel below any reachable utility, for the second-max swap trick.
    bound = max(abs(e) for row in a.rows for e in row)
    reach = max(abs(v) for v in state.U)
    sentinel = -int((bound * (t0 + steps + 1) + reach) * scale) - 1

    completed = 0
    try:
        for t in range(t0 + 1, t0 + steps + 1):
            m = max(u)
            i = u.index(m)
            if need_tie_check and u.count(m) > 1:
                if strict:
                    raise TieError(t, tuple(j for j, v in enumerate(u) if v == m))
                traj.tie_count += 1
                if len(traj.tie_steps) < _TIE_STEP_CAP:
                    traj.tie_steps.append(t)
            if prev_max is not None and m < prev_max:
                mono = False
            prev_max = m
            col = cols[i]
            u = [uv + cv for uv, cv in zip(u, col)]
            x[i] += 1
            completed = t - t0
            if record_actions:
                actions.append(i)
            if track_gap and t >= top_gap_from:
                m2 = max(u)
                i2 = u.index(m2)
                u[i2] = sentinel
                second = max(u)
                u[i2] = m2
                g = m2 - second
                if best_gap is None or g < best_gap:
                    best_gap, best_gap_t = g, t
            if cp_i < len(cp_times) and t == cp_times[cp_i]:
                traj.checkpoints[t] = _snapshot(t, x, u, scale)
                cp_i += 1
            if gp_i < len(gp_times) and t == gp_times[gp_i]:
                m2 = max(u)
                traj.gap_samples.append((t, Fraction(2 * m2, scale * t)))
                if sample_top_gap:
                    i2 = u.index(m2)
                    u[i2] = sentinel
                    second = max(u)
                    u[i2] = m2
                    traj.top_gap_samples.append((t, Fraction(m2 - second, scale)))
                gp_i += 1
    finally:
        # Commit progress (also on a strict-policy tie, which aborts before
        # the offending step is applied) so the state matches the steps taken.
        state.t = t0 + completed
        state.x = x
        state.U = [Fraction(v, scale) for v in u]
        traj.steps = completed
    if prev_max is not None and max(u) < prev_max:
        mono = False
    traj.max_monotone = mono
    if best_gap is not None:
        traj.min_top_gap = (Fraction(best_gap, scale), best_gap_t)
    return traj


def _snapshot(t: int, x: list[int], u: list[int], scale: int) -> Checkpoint:
    return Checkpoint(t=t, x=tuple(x), u=Vector(Fraction(v, scale) for v in u))


def _run_symmetric_exact(state: FpState, a: Matrix, steps: int,
                         checkpoints: Iterable[int], gap_times: Iterable[int],
                         sample_top_gap: bool, record_actions: bool,
                         top_gap_from: int | None,
                         count_ties: bool) -> Trajectory:
    t0 = state.t
    traj = Trajectory(t_start=t0, steps=steps)
    cp_times = set(_times_in_window(checkpoints, t0, t0 + steps))
    gp_times = set(_times_in_window(gap_times, max(t0 + 1, 1), t0 + steps))
    if t0 in cp_times:
        traj.checkpoints[t0] = Checkpoint(t0, tuple(state.x), Vector(state.U))
    best: tuple[Fraction, int] | None = None
    prev_max = None
    for _ in range(steps):
        u_before = state.U
        tied = _argmax_set(u_before)
        if count_ties and len(tied) > 1:
            traj.tie_count += 1
            if len(traj.tie_steps) < _TIE_STEP_CAP:
                traj.tie_steps.append(state.t + 1)
        m = max(u_before)
        if prev_max is not None and m < prev_max:
            traj.max_monotone = False
        prev_max = m
        i = state.policy.resolve(tied, state.t + 1, tuple(u_before))
        state.U = [uv + a.rows[r][i] for r, uv in enumerate(u_before)]
        state.x[i] += 1
        state.t += 1
        if record_actions:
            traj.actions.append(i)
        t = state.t
        if top_gap_from is not None and t >= top_gap_from:
            g = top_gap(state.U)
            if best is None or g < best[0]:
                best = (g, t)
        if t in cp_times:
            traj.checkpoints[t] = Checkpoint(t, tuple(state.x), Vector(state.U))
        if t in gp_times:
            traj.gap_samples.append((t, 2 * max(state.U) / t))
            if sample_top_gap:
                traj.top_gap_samples.append((t, top_gap(state.U)))
    if prev_max is not None and max(state.U) < prev_max:
        traj.max_monotone = False
    traj.min_top_gap = best
    return traj


def _run_general(state: FpState, a: Matrix, steps: int,
                 checkpoints: Iterable[int], record_actions: bool) -> Trajectory:
    t0 = state.t
    traj = Trajectory(t_start=t0, steps=steps, col_actions=[])
    cp_times = set(_times_in_window(checkpoints, t0, t0 + steps))
    if t0 in cp_times:
        traj.checkpoints[t0] = Checkpoint(t0, tuple(state.x), y=tuple(state.y))
    for _ in range(steps):
        i, j, _ = fp_step_general(state, a)
        if record_actions:
            traj.actions.append(i)
            traj.col_actions.append(j)
        if state.t in cp_times:
            traj.checkpoints[state.t] = Checkpoint(
                state.t, tuple(state.x), y=tuple(state.y)
            )
    return traj


def run_float(a: Matrix, steps: int, u_init: Vector | Sequence | None = None
              ) -> list[int]:
    """Float64 replay of the symmetric lexicographic iteration.

    Cross-validation aid: on games whose exact run keeps a positive
    top-gap margin, the float action sequence must match the exact one.
    """
    n = a.nrows
    cols = [tuple(float(a.rows[r][j]) for r in range(n)) for j in range(n)]
    u = [float(v) for v in u_init] if u_init is not None else [0.0] * n
    actions: list[int] = []
    for _ in range(steps):
        i = u.index(max(u))
        col = cols[i]
        u = [uv + cv for uv, cv in zip(u, col)]
        actions.append(i)
    return actions


def sample_times(t_max: int, ratio: float = 1.1, t_min: int = 1) -> list[int]:
    """Geometric sampling grid: unique values of ceil(ratio^n) in [t_min, t_max]."""
    if t_max < 1:
        return []
    if ratio <= 1.0:
        raise ValueError("ratio must exceed 1")
    times: set[int] = set()
    value = 1.0
    while True:
        t = math.ceil(value)
        if t > t_max:
            break
        if t >= t_min:
            times.add(t)
        value *= ratio
    return sorted(times)
