"""Command-line surface: simulate, ratio-field, helix-scan, sphere-verify,
analyze.

Exit codes: 0 on success, 1 for invalid arguments or unreadable inputs,
2 when the numerics fail mid-run (a partial record is still written when
one exists).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .chordarc import (
    D_OVER_L,
    METRICS,
    find_local_minima,
    pair_diagnostics,
    ratio_field,
)
from .curve import compute_geometry
from .diagnostics import analyze_directory, emit_record, simulate_preset, summarize
from .errors import CsfError, InvalidArgumentError, NumericalFailureError
from .fileio import (
    write_consistency_csv,
    write_fscan_csv,
    write_minima_csv,
    write_ratio_field,
    write_run_csv,
)
from .flow import SCHEMES, SEMI_IMPLICIT, FlowConfig
from .helix import (
    HelixParams,
    helix_pair_condition,
    helix_pair_condition_scaled,
    helix_ratio_time_derivative,
)
from .presets import PRESET_NAMES, SPHERE_PERTURBED, make_preset, build_curve
from .sphere import consistency_profile


def _add_preset_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=PRESET_NAMES, default="circle")
    parser.add_argument("--n", type=int, default=512, help="vertex count")
    parser.add_argument("--r", type=float, default=None, help="circle radius")
    parser.add_argument("--a", type=float, default=None, help="first shape axis")
    parser.add_argument("--b", type=float, default=None, help="second shape axis")
    parser.add_argument("--eps", type=float, default=None, help="perturbation size")
    parser.add_argument("--k", type=int, default=None, help="perturbation harmonic")
    parser.add_argument("--path", default=None, help="curve file for custom-file")


def _preset_from_args(args: argparse.Namespace):
    mapping = (
        ("r", "r"),
        ("a", "a"),
        ("b", "b"),
        ("eps", "eps"),
        ("k", "harmonic"),
        ("path", "path"),
    )
    params = {}
    for flag, key in mapping:
        value = getattr(args, flag)
        if value is not None:
            params[key] = value
    return make_preset(args.preset, n=args.n, **params)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csflab",
        description="Curve shortening flow laboratory for discrete space curves.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    sim = sub.add_parser("simulate", help="evolve a preset and write artifacts")
    _add_preset_arguments(sim)
    sim.add_argument("--t-end", type=float, default=None)
    sim.add_argument("--scheme", choices=SCHEMES, default=SEMI_IMPLICIT)
    sim.add_argument("--cfl", type=float, default=0.5)
    sim.add_argument("--record-every", type=int, default=50)
    sim.add_argument("--remesh-every", type=int, default=50)
    sim.add_argument("--max-steps", type=int, default=1_000_000)
    sim.add_argument("--stop-length-fraction", type=float, default=0.05)
    sim.add_argument("--stop-curvature-resolution", type=float, default=0.5)
    sim.add_argument("--out", required=True)

    field = sub.add_parser("ratio-field", help="pairwise ratio field and minima")
    _add_preset_arguments(field)
    field.add_argument("--metric", choices=METRICS, default=D_OVER_L)
    field.add_argument("--band", type=int, default=2)
    field.add_argument("--out", required=True)

    scan = sub.add_parser("helix-scan", help="helix condition values on a grid")
    scan.add_argument("--m-min", type=float, required=True)
    scan.add_argument("--m-max", type=float, required=True)
    scan.add_argument("--m-steps", type=int, required=True)
    scan.add_argument("--log-m", action="store_true")
    scan.add_argument("--y-min", type=float, required=True)
    scan.add_argument("--y-max", type=float, required=True)
    scan.add_argument("--y-steps", type=int, required=True)
    scan.add_argument("--out", required=True)

    verify = sub.add_parser("sphere-verify", help="sphere conservation checks")
    verify.add_argument("--eps", type=float, default=0.2)
    verify.add_argument("--k", type=int, default=3)
    verify.add_argument("--n", type=int, default=512)
    verify.add_argument("--t-end", type=float, default=0.4)
    verify.add_argument("--out", required=True)

    analyze = sub.add_parser("analyze", help="recompute diagnostics from snapshots")
    analyze.add_argument("--dir", required=True)

    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    preset = _preset_from_args(args)
    config = FlowConfig(
        cfl=args.cfl,
        remesh_every=args.remesh_every,
        record_every=args.record_every,
        t_end=args.t_end,
        stop_length_fraction=args.stop_length_fraction,
        stop_curvature_resolution=args.stop_curvature_resolution,
        scheme=args.scheme,
        max_steps=args.max_steps,
    )
    try:
        record = simulate_preset(preset, config)
    except NumericalFailureError as exc:
        if exc.record is not None and exc.record.rows:
            emit_record(exc.record, args.out)
        raise
    emit_record(record, args.out)
    summary = summarize(record)
    print(
        f"wrote {Path(args.out) / 'run.csv'}: {len(record.rows)} rows, "
        f"stop={summary.stop_reason}, t_est={summary.t_est:g}"
    )
    return 0


def _cmd_ratio_field(args: argparse.Namespace) -> int:
    curve = build_curve(_preset_from_args(args))
    field = ratio_field(curve, args.metric, args.band)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_ratio_field(field, out / "ratiofield.txt")
    geometry = compute_geometry(curve)
    rows = []
    for i, j, value in find_local_minima(field):
        diag = pair_diagnostics(curve, i, j, geometry)
        rows.append(
            {
                "i": i,
                "j": j,
                "value": value,
                "d": diag.d,
                "l": diag.l,
                "psi": diag.psi,
                "alpha": diag.alpha,
                "cond22": diag.cond_dl,
                "cond31": diag.cond_dpsi,
            }
        )
    write_minima_csv(rows, out / "minima.csv")
    print(f"wrote {out / 'ratiofield.txt'} and {len(rows)} minima")
    return 0


def _cmd_helix_scan(args: argparse.Namespace) -> int:
    if args.m_steps < 1 or args.y_steps < 1:
        raise InvalidArgumentError("grid step counts must be positive")
    if args.log_m:
        if args.m_min <= 0.0:
            raise InvalidArgumentError("--log-m needs a positive --m-min")
        m_grid = np.geomspace(args.m_min, args.m_max, args.m_steps)
    else:
        m_grid = np.linspace(args.m_min, args.m_max, args.m_steps)
    y_grid = np.linspace(args.y_min, args.y_max, args.y_steps)
    rows = []
    for m in m_grid:
        m = float(m)
        f_vals = np.atleast_1d(helix_pair_condition(y_grid, m))
        g_vals = np.atleast_1d(helix_pair_condition_scaled(y_grid, m))
        params = HelixParams(a=1.0, b=float(np.sqrt(m)))
        d_vals = np.atleast_1d(helix_ratio_time_derivative(params, y_grid))
        for y, fv, gv, dv in zip(y_grid, f_vals, g_vals, d_vals):
            rows.append((m, float(y), float(fv), float(gv), float(dv)))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_fscan_csv(rows, out / "fscan.csv")
    print(f"wrote {out / 'fscan.csv'}: {len(rows)} rows")
    return 0


def _cmd_sphere_verify(args: argparse.Namespace) -> int:
    preset = make_preset(SPHERE_PERTURBED, n=args.n, eps=args.eps, harmonic=args.k)
    if not 0.0 < args.t_end < 0.5:
        raise InvalidArgumentError("--t-end must lie in (0, 0.5)")
    config = FlowConfig(t_end=args.t_end, sphere_radius=1.0)
    record = simulate_preset(preset, config)
    out = emit_record(record, args.out)
    targets = args.t_end * np.arange(1, 7) / 6.0
    profile = consistency_profile(build_curve(preset), targets)
    write_consistency_csv(profile, out / "consistency.csv")
    worst = max(row[2] for row in profile)
    print(
        f"wrote {out / 'run.csv'} and consistency.csv; "
        f"max deviation {worst:.3g}"
    )
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    rows = analyze_directory(args.dir)
    out_path = Path(args.dir) / "analyze.csv"
    write_run_csv(rows, out_path)
    print(f"wrote {out_path}: {len(rows)} rows")
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "ratio-field": _cmd_ratio_field,
    "helix-scan": _cmd_helix_scan,
    "sphere-verify": _cmd_sphere_verify,
    "analyze": _cmd_analyze,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags; this tool reports 1 for bad input
        return 0 if exc.code in (0, None) else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("error: a command is required", file=sys.stderr)
        return 1
    try:
        return _HANDLERS[args.command](args)
    except NumericalFailureError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (CsfError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
