"""Chord-to-arc ratio fields and local-minimum diagnostics.

For a closed curve of length L and two vertices with chord d and shorter
arc l, two ratios are tracked:

* d/l   -- plain chord-arc ratio in (0, 1];
* d/psi -- chord relative to the chord of a round circle of the same
  length subtending the same arc, psi = (L/pi) * sin(pi*l/L).

Periodic curves use a one-way arc along the periodic extension (the curve
plus one offset copy), where only d/l makes sense.

All pairwise computations use one fixed elementwise arithmetic order so
results are reproducible bit-for-bit regardless of CSF_THREADS.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .curve import (
    CLOSED,
    PERIODIC,
    CurveGeometry,
    SampledCurve,
    arc_positions,
    compute_geometry,
)
from .errors import (
    DiagonalPairError,
    InvalidArgumentError,
    UnsupportedTopologyError,
)

D_OVER_L = "d_over_l"
D_OVER_PSI = "d_over_psi"
METRICS = (D_OVER_L, D_OVER_PSI)

MIN_FIELD_VERTICES = 16


def comparison_chord(arc: np.ndarray | float, length: float):
    """Chord of a round circle of circumference ``length`` spanning ``arc``."""
    return (length / math.pi) * np.sin(arc * math.pi / length)


def arc_angle(arc: np.ndarray | float, length: float):
    """Half the central angle pi*l/L spanned by the arc on that circle."""
    return arc * math.pi / length


def _thread_count() -> int:
    raw = os.environ.get("CSF_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class RatioField:
    """Pairwise ratio matrix; cells within the exclusion band hold NaN."""

    values: np.ndarray
    metric: str
    exclusion_band: int

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _pair_blocks(curve: SampledCurve, metric: str, band: int) -> np.ndarray:
    """Compute the full n x n ratio matrix, chunked over row blocks."""
    pts = curve.points
    n = curve.n
    s, length = arc_positions(curve)
    px, py, pz = pts[:, 0], pts[:, 1], pts[:, 2]
    idx = np.arange(n)
    out = np.empty((n, n))

    def fill(lo: int, hi: int) -> None:
        dx = px[lo:hi, None] - px[None, :]
        dy = py[lo:hi, None] - py[None, :]
        dz = pz[lo:hi, None] - pz[None, :]
        d = np.sqrt(dx * dx + dy * dy + dz * dz)
        fwd = np.abs(s[lo:hi, None] - s[None, :])
        arc = np.minimum(fwd, length - fwd)
        with np.errstate(invalid="ignore", divide="ignore"):
            if metric == D_OVER_L:
                vals = d / arc
            else:
                vals = d / comparison_chord(arc, length)
        sep = np.abs(idx[lo:hi, None] - idx[None, :])
        vals[np.minimum(sep, n - sep) <= band] = np.nan
        out[lo:hi] = vals

    workers = _thread_count()
    if workers == 1 or n < 4 * workers:
        fill(0, n)
    else:
        block = -(-n // workers)
        bounds = [(lo, min(lo + block, n)) for lo in range(0, n, block)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: fill(*b), bounds))
    return out


def ratio_field(
    curve: SampledCurve, metric: str = D_OVER_L, exclusion_band: int = 2
) -> RatioField:
    """Pairwise ratio matrix for a closed curve with at least 16 vertices.

    The band of ``exclusion_band`` index steps around the diagonal is set to
    NaN: ratios of near-identical vertices approach 1 with O(h^2) noise and
    would drown every genuine extremum search in discretization artifacts.
    """
    if curve.topology != CLOSED:
        raise UnsupportedTopologyError(
            f"ratio fields require a closed curve, not {curve.topology!r}"
        )
    if metric not in METRICS:
        raise InvalidArgumentError(f"unknown metric {metric!r}")
    if curve.n < MIN_FIELD_VERTICES:
        raise InvalidArgumentError(
            f"ratio fields need at least {MIN_FIELD_VERTICES} vertices"
        )
    if not 1 <= exclusion_band < curve.n // 2:
        raise InvalidArgumentError("exclusion_band must be in [1, n/2)")
    values = _pair_blocks(curve, metric, exclusion_band)
    values.setflags(write=False)
    return RatioField(values=values, metric=metric, exclusion_band=exclusion_band)


def find_local_minima(field: RatioField) -> list[tuple[int, int, float]]:
    """Cells not exceeding any of their eight torus neighbors.

    Band cells are never candidates and are ignored as neighbors.  A strict
    decrease toward at least one neighbor is required so that flat regions
    do not report every interior cell.  Pairs are canonicalized to i < j and
    deduplicated, then sorted by (value, i, j).
    """
    vals = field.values
    if not np.isfinite(vals).any():
        raise InvalidArgumentError("ratio field has no finite cells")
    is_min = np.isfinite(vals)
    strictly_below = np.zeros_like(is_min)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = np.roll(np.roll(vals, -di, axis=0), -dj, axis=1)
            finite = np.isfinite(nb)
            with np.errstate(invalid="ignore"):
                is_min &= ~finite | (vals <= nb)
                strictly_below |= finite & (vals < nb)
    is_min &= strictly_below
    found: dict[tuple[int, int], float] = {}
    for i, j in zip(*np.nonzero(is_min)):
        key = (int(i), int(j)) if i < j else (int(j), int(i))
        found.setdefault(key, float(vals[i, j]))
    return sorted(
        ((i, j, v) for (i, j), v in found.items()), key=lambda r: (r[2], r[0], r[1])
    )


def _min_ratio_periodic(curve: SampledCurve, band: int) -> float:
    pts = curve.points
    n = curve.n
    ext = np.vstack([pts, pts + curve.offset])
    seg = np.linalg.norm(np.diff(ext, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    best = math.inf
    for gap in range(band + 1, n + 1):
        diff = ext[gap : gap + n] - ext[:n]
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        arc = s[gap : gap + n] - s[:n]
        best = min(best, float(np.min(d / arc)))
    return best


def min_pair_ratio(
    curve: SampledCurve, metric: str = D_OVER_L, exclusion_band: int = 2
) -> float:
    """Global minimum of the pair ratio outside the exclusion band."""
    if metric not in METRICS:
        raise InvalidArgumentError(f"unknown metric {metric!r}")
    if curve.topology == CLOSED:
        return float(np.nanmin(ratio_field(curve, metric, exclusion_band).values))
    if curve.topology == PERIODIC:
        if metric != D_OVER_L:
            raise UnsupportedTopologyError(
                "comparison-circle ratios need a closed curve of finite length"
            )
        return _min_ratio_periodic(curve, exclusion_band)
    raise UnsupportedTopologyError(f"no pair ratios for {curve.topology!r} curves")


def ratio_minima(
    curve: SampledCurve, exclusion_band: int = 2
) -> tuple[float, float]:
    """(min d/l, min d/psi) for a closed curve in one pairwise pass."""
    if curve.topology != CLOSED:
        raise UnsupportedTopologyError("ratio minima require a closed curve")
    dl = _pair_blocks(curve, D_OVER_L, exclusion_band)
    dpsi = _pair_blocks(curve, D_OVER_PSI, exclusion_band)
    return float(np.nanmin(dl)), float(np.nanmin(dpsi))


def min_ratio_series(
    snapshots: list[tuple[float, SampledCurve]],
    metric: str = D_OVER_L,
    exclusion_band: int = 2,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Global-minimum ratio across snapshots: (times, minima, slopes).

    Slopes are forward finite differences, one fewer entry than times.
    """
    if len(snapshots) < 2:
        raise InvalidArgumentError("need at least two snapshots for a series")
    t = np.array([ti for ti, _ in snapshots], dtype=float)
    vals = np.array(
        [min_pair_ratio(c, metric, exclusion_band) for _, c in snapshots]
    )
    return t, vals, np.diff(vals) / np.diff(t)


def arc_curvature_integral(
    curve: SampledCurve,
    i: int,
    j: int,
    geometry: CurveGeometry | None = None,
) -> float:
    """Integral of |k| ds over the shorter arc from vertex i to vertex j.

    The two end vertices contribute half their lumped weight, so the
    integrals over the two complementary arcs add up exactly to the total
    absolute curvature.
    """
    if curve.topology != CLOSED:
        raise UnsupportedTopologyError("arc integrals require a closed curve")
    geom = geometry if geometry is not None else compute_geometry(curve)
    _validate_closed_pair(curve, i, j)
    kds = geom.scalar_curvature * geom.ds
    total = float(np.sum(kds))
    s, length = arc_positions(curve)
    lo, hi = (i, j) if i < j else (j, i)
    span = slice(lo, hi + 1)
    forward = float(np.sum(kds[span])) - 0.5 * float(kds[lo]) - 0.5 * float(kds[hi])
    if s[hi] - s[lo] <= length - (s[hi] - s[lo]):
        return forward
    return total - forward


@dataclass(frozen=True)
class PairDiagnostics:
    """Everything measured about one vertex pair.

    ``psi``, ``alpha``, ``d_over_psi``, the comparison residuals and
    ``cond_dpsi`` are None for periodic pairs, where no comparison circle
    exists.  The chord direction used for tangent products points along the
    (shorter) arc from its first vertex to its last, so results do not
    depend on argument order.
    """

    i: int
    j: int
    d: float
    l: float
    d_over_l: float
    psi: float | None
    alpha: float | None
    d_over_psi: float | None
    chord_tangent_start: float
    chord_tangent_end: float
    tangent_sum_sq: float
    first_var_residual_dl: tuple[float, float]
    first_var_residual_dpsi: tuple[float, float] | None
    cond_dl: float
    cond_dpsi: float | None


def ratio_minimum_condition_dl(diag: PairDiagnostics, total_curvature: float) -> float:
    """Sign test certifying that a d/l local minimum rises under the flow.

    Evaluates -|e1+e2|^2 + <e1+e2, w>^2 + (d/l)^2 * (total |k| integral)^2
    from measured tangents; non-negative values certify monotonicity at this
    pair.  ``total_curvature`` is the |k| integral over the whole curve (or
    one full period for periodic pairs).
    """
    omega_dot = diag.chord_tangent_start + diag.chord_tangent_end
    return (
        -diag.tangent_sum_sq
        + omega_dot**2
        + (diag.d**2 / diag.l**2) * total_curvature**2
    )


def ratio_minimum_condition_dpsi(
    diag: PairDiagnostics, arc_curvature: float
) -> float:
    """Sign test for a d/psi local minimum, from the shorter-arc |k| integral.

    Evaluates cos(a)*I^2 - cos(a)*4*pi^2*l^2/L^2 - psi*l*|e1+e2|^2/d^2
    + (4l/psi)*cos(a)^2 where I = ``arc_curvature`` and the length L enters
    through psi and alpha.  Needs a closed-curve pair.
    """
    if diag.psi is None or diag.alpha is None:
        raise UnsupportedTopologyError(
            "comparison-circle condition needs a closed-curve pair"
        )
    cos_a = math.cos(diag.alpha)
    # alpha = pi*l/L, so 4*pi^2*l^2/L^2 = 4*alpha^2
    return (
        cos_a * arc_curvature**2
        - cos_a * 4.0 * diag.alpha**2
        - diag.psi * diag.l * diag.tangent_sum_sq / (diag.d * diag.d)
        + (4.0 * diag.l / diag.psi) * cos_a**2
    )


def _validate_closed_pair(curve: SampledCurve, i: int, j: int) -> None:
    n = curve.n
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidArgumentError(f"pair ({i}, {j}) out of range for n={n}")
    if i == j:
        raise DiagonalPairError(f"vertex pair ({i}, {j}) has no chord")


def pair_diagnostics(
    curve: SampledCurve,
    i: int,
    j: int,
    geometry: CurveGeometry | None = None,
) -> PairDiagnostics:
    """Chord, arc, ratios, tangent products and both stability conditions.

    Closed curves measure along the shorter of the two arcs; periodic
    curves measure forward along the periodic extension, allowing j up to
    i + n (the pure-offset pair).
    """
    geom = geometry if geometry is not None else compute_geometry(curve)
    if curve.topology == CLOSED:
        return _closed_pair_diagnostics(curve, int(i), int(j), geom)
    if curve.topology == PERIODIC:
        return _periodic_pair_diagnostics(curve, int(i), int(j), geom)
    raise UnsupportedTopologyError(
        f"pair diagnostics need a cyclic curve, not {curve.topology!r}"
    )


def _assemble_diagnostics(
    i: int,
    j: int,
    chord: np.ndarray,
    arc: float,
    e_start: np.ndarray,
    e_end: np.ndarray,
    curve_curvature: float,
    psi: float | None,
    alpha: float | None,
    arc_curvature: float | None,
) -> PairDiagnostics:
    d = float(np.linalg.norm(chord))
    if d == 0.0:
        raise InvalidArgumentError(f"vertices {i} and {j} coincide")
    omega = chord / d
    e_sum = e_start + e_end
    ct_start = float(e_start @ omega)
    ct_end = float(e_end @ omega)
    d_over_l = d / arc
    residual_dpsi = None
    if psi is not None and alpha is not None:
        target = (d / psi) * math.cos(alpha)
        residual_dpsi = (ct_start - target, ct_end - target)
    diag = PairDiagnostics(
        i=i,
        j=j,
        d=d,
        l=arc,
        d_over_l=d_over_l,
        psi=psi,
        alpha=alpha,
        d_over_psi=None if psi is None else d / psi,
        chord_tangent_start=ct_start,
        chord_tangent_end=ct_end,
        tangent_sum_sq=float(e_sum @ e_sum),
        first_var_residual_dl=(ct_start - d_over_l, ct_end - d_over_l),
        first_var_residual_dpsi=residual_dpsi,
        cond_dl=math.nan,
        cond_dpsi=None,
    )
    return replace(
        diag,
        cond_dl=ratio_minimum_condition_dl(diag, curve_curvature),
        cond_dpsi=(
            None
            if arc_curvature is None
            else ratio_minimum_condition_dpsi(diag, arc_curvature)
        ),
    )


def _closed_pair_diagnostics(
    curve: SampledCurve, i: int, j: int, geom: CurveGeometry
) -> PairDiagnostics:
    _validate_closed_pair(curve, i, j)
    s, length = arc_positions(curve)
    lo, hi = (i, j) if i < j else (j, i)
    fwd = float(s[hi] - s[lo])
    if fwd <= length - fwd:
        start, end, arc = lo, hi, fwd
    else:
        start, end, arc = hi, lo, length - fwd
    chord = curve.points[end] - curve.points[start]
    kds = geom.scalar_curvature * geom.ds
    return _assemble_diagnostics(
        i=i,
        j=j,
        chord=chord,
        arc=arc,
        e_start=geom.tangents[start],
        e_end=geom.tangents[end],
        curve_curvature=float(np.sum(kds)),
        psi=float(comparison_chord(arc, length)),
        alpha=float(arc_angle(arc, length)),
        arc_curvature=arc_curvature_integral(curve, i, j, geom),
    )


def _periodic_pair_diagnostics(
    curve: SampledCurve, i: int, j: int, geom: CurveGeometry
) -> PairDiagnostics:
    n = curve.n
    if not 0 <= i < n:
        raise InvalidArgumentError(f"first index {i} out of range for n={n}")
    if j == i:
        raise DiagonalPairError(f"vertex pair ({i}, {j}) has no chord")
    if not i < j <= i + n:
        raise InvalidArgumentError(
            f"periodic pair needs i < j <= i + n, got ({i}, {j})"
        )
    ext = np.vstack([curve.points, curve.points + curve.offset])
    seg = np.linalg.norm(np.diff(ext, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    kds = geom.scalar_curvature * geom.ds
    return _assemble_diagnostics(
        i=i,
        j=j,
        chord=ext[j] - ext[i],
        arc=float(s[j] - s[i]),
        e_start=geom.tangents[i],
        e_end=geom.tangents[j % n],
        curve_curvature=float(np.sum(kds)),
        psi=None,
        alpha=None,
        arc_curvature=None,
    )
