"""Command-line interface: simulate, construct, solve, search, verify, rate.

Exit codes: 0 success / all checks passed, 1 verification or runtime
failure, 2 usage error, 3 I/O error.  Data files contain no timestamps,
so identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import random
import sys

from . import __version__
from .engine import FpState, TieBreakPolicy, TieError, run, sample_times
from .exact import (
    Matrix,
    Vector,
    decimal_str,
    format_rational,
    matrix_from_json,
    matrix_to_json,
    pretty_rational,
    rational,
)
from .report import VerificationReport
from .instance import (
    build_M_aug,
    canonical_constants,
    canonical_delta,
    check_key_inequality,
    derive_Vs,
    enumerate_window_specs,
    key_infeasibility_witness,
    negative_b_on_slice,
    search_instances,
    solve_key_equation,
)
from .verify import (
    fit_rate,
    gap_curve,
    no_tie_scan,
    verify_aug_offset,
    verify_phase,
    verify_rate,
    verify_rps_periodicity,
    verify_theorem,
)

_GAMES = ("rps", "m", "m_aug")


def _load_game(source: str) -> tuple[str, Matrix]:
    if source in _GAMES:
        if source == "rps":
            from .rps import rps_matrix

            return source, rps_matrix()
        bundle = canonical_constants()
        return source, bundle.M if source == "m" else bundle.M_aug
    with open(source, "r", encoding="utf-8") as fh:
        return source, matrix_from_json(json.load(fh))


def _load_init(source: str, n: int) -> Vector | None:
    if source == "zero":
        return None
    if source == "u0":
        u0 = canonical_constants().U0
        if len(u0) != n:
            raise ValueError(f"init u0 has 9 entries, game has {n} actions")
        return u0
    with open(source, "r", encoding="utf-8") as fh:
        entries = json.load(fh)
    v = Vector(entries)
    if len(v) != n:
        raise ValueError(f"init vector has {len(v)} entries, game has {n} actions")
    return v


def _make_policy(name: str, seed: int) -> TieBreakPolicy:
    if name == "lex":
        return TieBreakPolicy.lexicographic()
    if name == "strict":
        return TieBreakPolicy.strict()
    if name == "random":
        # Demo harness for callback-driven tie-breaking; seeded, so still
        # reproducible per invocation.
        rng = random.Random(seed)
        return TieBreakPolicy.adversarial(lambda tied, t, u: rng.choice(tied))
    raise ValueError(f"unknown policy {name!r}")


def _parse_times(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _stride_times(stride: str, steps: int) -> list[int]:
    if stride == "none":
        return []
    if stride == "every":
        return list(range(1, steps + 1))
    if stride.startswith("geometric"):
        ratio = 1.1
        if ":" in stride:
            ratio = float(stride.split(":", 1)[1])
        return sample_times(steps, ratio=ratio)
    raise ValueError(f"unknown stride {stride!r} (use geometric[:R], every, none)")


def _write_json(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _write_meta(out_dir: str, command: str, parameters: dict) -> None:
    _write_json(os.path.join(out_dir, "meta.json"), {
        "tool": "fpexact",
        "version": __version__,
        "command": command,
        "parameters": parameters,
    })


def _matrix_text(m: Matrix) -> str:
    cells = [[pretty_rational(e) for e in row] for row in m.rows]
    widths = [max(len(cells[i][j]) for i in range(m.nrows)) for j in range(m.ncols)]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths))
             for row in cells]
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


# --- subcommands ---------------------------------------------------------------


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ValueError(f"missing required option(s): {flags}")


def cmd_simulate(args: argparse.Namespace) -> int:
    _require(args, "game", "steps", "out")
    name, game = _load_game(args.game)
    if not game.is_skew_symmetric():
        raise ValueError("simulate currently supports skew-symmetric games")
    u_init = _load_init(args.init, game.nrows)
    policy = _make_policy(args.policy, args.seed)
    sample_at = _stride_times(args.gap_stride, args.steps)
    checkpoints = _parse_times(args.checkpoints) if args.checkpoints else []

    state = FpState.symmetric(game.nrows, policy=policy, u_init=u_init)
    traj = run(state, game, args.steps, checkpoints=checkpoints,
               gap_times=sample_at, sample_top_gap=True)

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "trajectory.csv"), "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "action", "max_U", "gap", "top_gap"])
        for (t, gap), (_, margin) in zip(traj.gap_samples, traj.top_gap_samples):
            writer.writerow([
                t,
                traj.actions[t - 1] + 1,
                format_rational(gap * t / 2),
                format_rational(gap),
                format_rational(margin),
            ])
    state_payload = {
        "game": name,
        "t": state.t,
        "x": list(state.x),
        "U": [format_rational(v) for v in state.U],
        "policy": policy.kind,
        "checkpoints": {
            str(t): {"x": list(cp.x), "U": cp.u.to_strings()}
            for t, cp in sorted(traj.checkpoints.items())
        },
    }
    _write_json(os.path.join(args.out, "state.json"), state_payload)
    _write_meta(args.out, "simulate", {
        "game": args.game, "steps": args.steps, "policy": args.policy,
        "init": args.init, "gap_stride": args.gap_stride,
        "checkpoints": args.checkpoints, "seed": args.seed,
    })
    print(f"simulated {traj.steps} steps of {name}; final t={state.t}")
    return 0


def cmd_construct(args: argparse.Namespace) -> int:
    bundle = canonical_constants()
    if args.delta is not None:
        margin = rational(args.delta)
        m_aug = build_M_aug(bundle.M, bundle.U0, margin)  # validates the range
        bundle = dataclasses.replace(bundle, delta=margin, M_aug=m_aug)
    if args.emit_matrix:
        m = bundle.M if args.emit_matrix == "m" else bundle.M_aug
        if args.format == "text":
            _emit(_matrix_text(m), args.out)
        else:
            _emit(json.dumps(matrix_to_json(m), indent=2) + "\n", args.out)
        return 0
    _emit(bundle.to_json() + "\n", args.out)
    return 0


def _load_quad(source: str, which: str) -> Matrix:
    if source == "canonical":
        bundle = canonical_constants()
        return bundle.Q0 if which == "q0" else bundle.Q1
    with open(source, "r", encoding="utf-8") as fh:
        return matrix_from_json(json.load(fh))


def cmd_solve(args: argparse.Namespace) -> int:
    q0 = _load_quad(args.q0, "q0")
    q1 = _load_quad(args.q1, "q1")
    if q1 == q0:
        print("degenerate window: Q1 == Q0 leaves no steps to replay; "
              "the condition reduces to the initialization term alone",
              file=sys.stderr)
    solution = solve_key_equation(q0, q1)
    payload = solution.to_json_dict()
    if not solution.consistent:
        witness = key_infeasibility_witness(q0, q1)
        if witness is not None:
            y, value = witness
            payload["infeasibility_witness"] = {
                "combination": y.to_strings(),
                "residual": format_rational(value),
            }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
        print("inconsistent system: no (B, Delta) closes the recurrence",
              file=sys.stderr)
        return 1
    exit_code = 0
    if args.check:
        probe = Vector(args.delta_probe.split(","))
        slice_ = solution.solve_for_delta(probe)
        checks: dict[str, bool] = {}
        if slice_ is None:
            checks["delta_feasible"] = False
        else:
            b_part, directions = slice_
            b = negative_b_on_slice(b_part, directions) or b_part
            payload["probed"] = {
                "Delta": probe.to_strings(),
                "B": b.to_rows(),
                "b_slice_dim": len(directions),
            }
            checks["delta_feasible"] = True
            checks["b_symmetric"] = b.is_symmetric()
            checks["b_fully_negative"] = b.max_entry() < 0
            try:
                v1, _, v3 = derive_Vs(b, probe, q0, q1 - q0)
                ineq = check_key_inequality(v1, v3, b, range(1, 13))
                checks["handoff_margin_positive"] = ineq.passed
                payload["key_inequality"] = ineq.to_dict()
            except ValueError:
                checks["handoff_margin_positive"] = False
        payload["checks"] = checks
        if not all(checks.values()):
            exit_code = 1
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return exit_code


def cmd_search(args: argparse.Namespace) -> int:
    specs = enumerate_window_specs(
        a_max=args.a_max, b_max=args.b_max,
        slide_alpha_max=args.slide_alpha_max,
        slide_beta_max=args.slide_beta_max,
        k_check=range(1, args.k_max + 1),
    )
    probes = [Vector(p.split(",")) for p in args.delta_probe] or [canonical_delta()]
    hits = search_instances(
        specs, probes, k_check=range(1, args.k_max + 1),
        require_negative_b=not args.allow_positive_b,
        admissibility_range=range(1, args.k_max + 1),
        limit=args.limit,
    )
    payload = {
        "candidates": len(specs),
        "hits": [h.to_json_dict() for h in hits],
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    print(f"searched {len(specs)} candidates, found {len(hits)} hits",
          file=sys.stderr)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    _require(args, "claim")
    claims = [args.claim] if args.claim != "all" else [
        "rps", "phase", "theorem", "aug-offset", "no-tie", "rate"]
    reports = []
    rate_artifacts = None
    def fallback(value, default):
        return value if value is not None else default

    for claim in claims:
        if claim == "rps":
            reports.append(verify_rps_periodicity(fallback(args.k, 50)))
        elif claim == "phase":
            reports.append(verify_phase(fallback(args.k, 1)))
        elif claim == "theorem":
            reports.append(verify_theorem(fallback(args.k, 6)))
        elif claim == "aug-offset":
            reports.append(verify_aug_offset(fallback(args.t_max, 100_000)))
        elif claim == "no-tie":
            scan = no_tie_scan(fallback(args.t_max, 1_000_000))
            report = VerificationReport(claim="no-tie-margin",
                                        params=scan.to_json_dict())
            report.record_flag(
                "min-top-gap-positive", scan.tie_free,
                expected="> 0",
                actual=f"{format_rational(scan.min_top_gap)} at t={scan.t}",
            )
            reports.append(report)
        elif claim == "rate":
            curve, fit, report = verify_rate(
                t_max=fallback(args.t_max, 1_000_000),
                fit_min=args.fit_min, fit_max=args.fit_max)
            reports.append(report)
            rate_artifacts = (curve, fit)
        else:
            raise ValueError(f"unknown claim {claim!r}")
    for report in reports:
        print(report.summary())
    if args.json_out:
        payload = [r.to_dict() for r in reports]
        _write_json(args.json_out, payload if len(payload) > 1 else payload[0])
    if rate_artifacts is not None and args.out:
        _write_rate_artifacts(args.out, *rate_artifacts)
    return 0 if all(r.passed for r in reports) else 1


def _write_rate_artifacts(out_dir: str, curve, fit) -> None:
    from .plots import plot_gap_curve

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "gap_curve.csv"), "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "gap_exact", "gap_decimal"])
        for t, gap in curve:
            writer.writerow([t, format_rational(gap), decimal_str(gap)])
    _write_json(os.path.join(out_dir, "rate_fit.json"), fit.to_json_dict())
    plot_gap_curve(curve, fit, os.path.join(out_dir, "gap_loglog.png"))


def cmd_rate(args: argparse.Namespace) -> int:
    _require(args, "t_max", "out")
    bundle = canonical_constants()
    curve = gap_curve(bundle.M_aug, args.t_max)
    fit = fit_rate(curve, t_min=args.fit_min, t_max=args.fit_max)
    os.makedirs(args.out, exist_ok=True)
    _write_rate_artifacts(args.out, curve, fit)
    _write_meta(args.out, "rate", {
        "t_max": args.t_max, "fit_min": args.fit_min, "fit_max": args.fit_max,
    })
    print(f"gap ~ {fit.coefficient:.4f} * t^{fit.exponent:.4f} "
          f"(rms log residual {fit.residual:.4f}, window {fit.window})")
    return 0


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="fpexact",
        description="Exact fictitious-play simulation, instance construction, "
                    "and verification.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    def add_command(name: str, **kwargs) -> argparse.ArgumentParser:
        command = sub.add_parser(name, **kwargs)
        command.add_argument(
            "--config", default=None,
            help="JSON file of option defaults; explicit flags win")
        registry[name] = command
        return command

    p = add_command("simulate", help="run fictitious play and export the trajectory")
    p.add_argument("--game", default=None,
                   help="builtin game (rps, m, m_aug) or path to a game JSON file")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--policy", choices=("lex", "strict", "random"), default="lex")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for the random tie-break demo policy only")
    p.add_argument("--init", default="zero",
                   help="initial utilities: zero, u0, or a JSON vector path")
    p.add_argument("--checkpoints", default="",
                   help="comma-separated times to snapshot into state.json")
    p.add_argument("--gap-stride", default="geometric:1.1",
                   help="trajectory sampling: geometric[:RATIO], every, none")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = add_command("construct", help="emit the canonical instance bundle")
    p.add_argument("--delta", default=None,
                   help='dummy margin "p/q" in (0, 1/1800); default 1/2700')
    p.add_argument("--emit-matrix", choices=("m", "m_aug"), default=None)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_construct)

    p = add_command("solve", help="solve the phase-recurrence condition for (B, Delta)")
    p.add_argument("--q0", default="canonical")
    p.add_argument("--q1", default="canonical")
    p.add_argument("--check", action="store_true",
                   help="gate on negativity and handoff-margin checks")
    p.add_argument("--delta-probe", default="2/1,298/27,0/1",
                   help="comma-separated Delta used to pin B for --check")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_solve)

    p = add_command("search", help="brute-force scan for instances")
    p.add_argument("--a-max", type=int, default=6)
    p.add_argument("--b-max", type=int, default=12)
    p.add_argument("--slide-alpha-max", type=int, default=0)
    p.add_argument("--slide-beta-max", type=int, default=0)
    p.add_argument("--k-max", type=int, default=8)
    p.add_argument("--limit", type=int, default=20)
    p.add_argument("--allow-positive-b", action="store_true")
    p.add_argument("--delta-probe", action="append", default=[],
                   help="comma-separated Delta probe; repeatable")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_search)

    p = add_command("verify", help="run a verification claim")
    p.add_argument("--claim", default=None,
                   choices=("rps", "phase", "theorem", "aug-offset", "no-tie",
                            "rate", "all"))
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--fit-min", type=int, default=1000)
    p.add_argument("--fit-max", type=int, default=None)
    p.add_argument("--json-out", default=None)
    p.add_argument("--out", default=None,
                   help="directory for rate artifacts (CSV, fit, figure)")
    p.set_defaults(func=cmd_verify)

    p = add_command("rate", help="measure the gap curve and fit its decay")
    p.add_argument("--t-max", type=int, default=1_000_000)
    p.add_argument("--fit-min", type=int, default=1000)
    p.add_argument("--fit-max", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rate)

    return parser, registry


def _load_config(path: str, args: argparse.Namespace) -> dict:
    """Validated option overrides from a JSON config file."""
    with open(path, "r", encoding="utf-8") as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        raise ValueError("config file must hold a JSON object")
    known = set(vars(args))
    resolved = {}
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if dest in ("config", "func", "command") or dest not in known:
            raise ValueError(f"unknown config key {key!r}")
        resolved[dest] = value
    return resolved


def main(argv: list[str] | None = None) -> int:
    parser, registry = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            # Flags > config file > built-in defaults: install the config
            # values as the subcommand's defaults and re-parse, so only
            # explicitly supplied options override them.
            overrides = _load_config(args.config, args)
            registry[args.command].set_defaults(**overrides)
            args = parser.parse_args(argv)
        return args.func(args)
    except TieError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
