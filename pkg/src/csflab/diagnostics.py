"""Run orchestration, summaries and directory-level emission.

Ties the pieces together: builds a preset, runs the flow, writes run.csv,
run.json and per-record curve snapshots into one directory, and recomputes
diagnostics from saved snapshots so an archived run can be audited without
rerunning the flow.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

from . import fileio
from .curve import SampledCurve, compute_geometry, total_absolute_curvature
from .errors import InvalidArgumentError, UnsupportedTopologyError
from .flow import FlowConfig, RecordRow, RunRecord, run, snapshot_diagnostics
from .presets import Preset, build_curve, sphere_radius_for

TOTAL_CURVATURE_BOUND = 4.0 * math.pi

_SNAP_RE = re.compile(r"snap_(\d+)\.curve$")


def check_total_curvature_bound(curve: SampledCurve) -> tuple[float, bool]:
    """Total |k| integral and whether it is below the embeddedness bound 4*pi.

    The bound is reported, never enforced: runs on curves that violate it
    proceed normally and simply carry verdict False.
    """
    if not curve.is_cyclic():
        raise UnsupportedTopologyError("the curvature bound applies to closed curves")
    value = total_absolute_curvature(compute_geometry(curve))
    return value, value < TOTAL_CURVATURE_BOUND


@dataclass(frozen=True)
class RunSummary:
    """Headline facts of one run."""

    config: FlowConfig
    stop_reason: str
    t_est: float
    initial_total_abs_curv: float
    curvature_bound_ok: bool
    final_row: RecordRow


def summarize(record: RunRecord) -> RunSummary:
    if not record.rows:
        raise InvalidArgumentError("cannot summarize an empty record")
    first = record.rows[0]
    return RunSummary(
        config=record.config,
        stop_reason=record.stop_reason,
        t_est=record.t_est,
        initial_total_abs_curv=first.total_abs_curv,
        curvature_bound_ok=first.total_abs_curv < TOTAL_CURVATURE_BOUND,
        final_row=record.rows[-1],
    )


def emit_record(record: RunRecord, out_dir) -> Path:
    """Write run.csv, run.json and snap_<step>.curve files; overwrites."""
    if not record.rows:
        raise InvalidArgumentError("refusing to emit an empty record")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_run_csv(record.rows, out / "run.csv")
    fileio.write_run_json(record, out / "run.json")
    for step, _, curve in record.snapshots:
        fileio.write_curve(curve, out / f"snap_{step}.curve")
    return out


def simulate_preset(preset: Preset, config: FlowConfig) -> RunRecord:
    """Build the preset curve and run it; spherical presets get the
    sphere_residual column filled automatically."""
    radius = sphere_radius_for(preset)
    if radius is not None and config.sphere_radius is None:
        config = replace(config, sphere_radius=radius)
    return run(build_curve(preset), config)


def analyze_directory(run_dir) -> list[RecordRow]:
    """Recompute diagnostic rows from the snapshots saved in a run directory.

    Reads run.csv for the recorded times, run.json for the configuration
    and vanishing-time estimate, and every snap_<step>.curve; returns rows
    built by the same measurement code the live run used.
    """
    run_dir = Path(run_dir)
    csv_path = run_dir / "run.csv"
    json_path = run_dir / "run.json"
    if not csv_path.is_file() or not json_path.is_file():
        raise InvalidArgumentError(f"{run_dir} is not a run directory")
    recorded = {row.step: row for row in fileio.read_run_csv(csv_path)}
    payload = fileio.read_run_json(json_path)
    config = fileio.config_from_json(payload)
    t_est = float(payload["t_est"])

    snapshots: list[tuple[int, Path]] = []
    for path in run_dir.iterdir():
        match = _SNAP_RE.match(path.name)
        if match:
            snapshots.append((int(match.group(1)), path))
    snapshots.sort()
    if not snapshots:
        raise InvalidArgumentError(f"{run_dir} contains no snapshots")

    rows = []
    for step, path in snapshots:
        if step not in recorded:
            raise InvalidArgumentError(f"snapshot step {step} missing from run.csv")
        t = recorded[step].t
        curve = fileio.read_curve(path)
        row = snapshot_diagnostics(curve, t, step, config.sphere_radius)
        if math.isinf(t_est):
            row.sing_indicator = 0.0
        elif t_est > t:
            row.sing_indicator = row.k_max**2 * (t_est - t)
        rows.append(row)
    return rows
