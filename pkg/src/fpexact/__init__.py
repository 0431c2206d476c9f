"""Exact-arithmetic fictitious play and a slow-convergence counterexample.

The package simulates fictitious play over exact rationals, constructs
a 10x10 skew-symmetric game on which the duality gap of the averaged
play decays only at order t^(-1/3), and certifies every finite claim
about that construction by replay.
"""

from .engine import (
    Checkpoint,
    FpState,
    TieBreakPolicy,
    TieError,
    Trajectory,
    fp_step_general,
    fp_step_symmetric,
    run,
    run_float,
    sample_times,
    top_gap,
)
from .exact import (
    LinearSolution,
    Matrix,
    Vector,
    bvec,
    cmat,
    decimal_str,
    duality_gap,
    format_rational,
    matrix_from_json,
    matrix_to_json,
    pretty_rational,
    rational,
    solve_linear_system,
    sym_gap,
)
from .instance import (
    InstanceBundle,
    KeySolution,
    SearchHit,
    WindowSpec,
    active_block,
    build_M,
    build_M_aug,
    canonical_constants,
    check_key_equation,
    check_key_inequality,
    derive_Vs,
    enumerate_window_specs,
    key_infeasibility_witness,
    phase_length,
    phase_stack,
    search_instances,
    solve_key_equation,
    timetable,
)
from .report import CheckRecord, VerificationReport
from .rps import (
    VERTEX_MATRICES,
    VertexState,
    is_admissible,
    rps_matrix,
    run_rps,
    substitute_k,
    vertex_states,
    windowed_run_check,
)
from .verify import (
    NoTieScan,
    RateFit,
    fit_rate,
    gap_curve,
    no_tie_scan,
    verify_aug_offset,
    verify_float_agreement,
    verify_phase,
    verify_rate,
    verify_rps_periodicity,
    verify_theorem,
)

__version__ = "0.1.0"
