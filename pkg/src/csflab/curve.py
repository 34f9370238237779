"""Discrete space curves: sampling, tangents, curvature vectors, arc length.

A curve is an ordered array of 3D vertices with one of three topologies:

* ``closed``   -- the last vertex connects back to the first;
* ``open``     -- free ends, boundary vertices use one-sided stencils;
* ``periodic`` -- one period of a translation-invariant curve; the successor
  of the last vertex is the first vertex shifted by a constant offset vector.

All functions here are pure. Vertex arrays are marked read-only on
construction so shared curves cannot be mutated behind a caller's back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DiagonalPairError,
    InvalidArgumentError,
    InvalidCurveError,
    UnsupportedTopologyError,
)

CLOSED = "closed"
OPEN = "open"
PERIODIC = "periodic"
TOPOLOGIES = (CLOSED, OPEN, PERIODIC)

# Minimum vertex counts per topology; below these the stencils degenerate.
MIN_VERTICES = {CLOSED: 8, PERIODIC: 8, OPEN: 4}


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Ordered vertex polyline with topology and optional period offset."""

    points: np.ndarray
    topology: str = CLOSED
    offset: np.ndarray | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise InvalidCurveError("points must be an (n, 3) array")
        if not np.isfinite(pts).all():
            raise InvalidCurveError("points contain non-finite values")
        if self.topology not in TOPOLOGIES:
            raise InvalidCurveError(f"unknown topology {self.topology!r}")
        n = len(pts)
        if n < MIN_VERTICES[self.topology]:
            raise InvalidCurveError(
                f"{self.topology} curve needs at least "
                f"{MIN_VERTICES[self.topology]} vertices, got {n}"
            )
        off = self.offset
        if self.topology == PERIODIC:
            if off is None:
                raise InvalidCurveError("periodic topology requires an offset")
            off = np.ascontiguousarray(np.asarray(off, dtype=float))
            if off.shape != (3,) or not np.isfinite(off).all():
                raise InvalidCurveError("offset must be a finite 3-vector")
            if np.linalg.norm(off) == 0.0:
                raise InvalidCurveError("periodic offset must be nonzero")
        elif off is not None and np.linalg.norm(np.asarray(off, float)) != 0.0:
            raise InvalidCurveError(f"{self.topology} topology takes no offset")
        else:
            off = None

        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if seg.size and seg.min() == 0.0:
            raise InvalidCurveError("consecutive vertices must be distinct")
        if self.topology == CLOSED and np.linalg.norm(pts[0] - pts[-1]) == 0.0:
            raise InvalidCurveError("closing segment is degenerate")
        if self.topology == PERIODIC:
            if np.linalg.norm(pts[0] + off - pts[-1]) == 0.0:
                raise InvalidCurveError("period-closing segment is degenerate")

        pts.setflags(write=False)
        if off is not None:
            off.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "offset", off)

    @property
    def n(self) -> int:
        return len(self.points)

    def is_cyclic(self) -> bool:
        return self.topology in (CLOSED, PERIODIC)


@dataclass(frozen=True, eq=False)
class CurveGeometry:
    """Per-vertex differential data of a sampled curve.

    ``tangents`` are unit vectors, ``curvature_vectors`` are orthogonal to
    them (the tangential part of the second-difference stencil is projected
    out), ``scalar_curvature`` is their norm, and ``ds`` is the mass-lumped
    arc element (half the sum of the two adjacent segment lengths), which
    makes ``ds.sum()`` equal to ``total_length`` exactly.
    """

    tangents: np.ndarray
    curvature_vectors: np.ndarray
    scalar_curvature: np.ndarray
    ds: np.ndarray
    total_length: float
    segment_lengths: np.ndarray


def segment_lengths(curve: SampledCurve) -> np.ndarray:
    """Chord lengths of the polyline segments.

    Closed and periodic curves return ``n`` entries (the last one closes the
    loop or the period); open curves return ``n - 1``.
    """
    pts = curve.points
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    if curve.topology == CLOSED:
        seg = np.append(seg, np.linalg.norm(pts[0] - pts[-1]))
    elif curve.topology == PERIODIC:
        seg = np.append(seg, np.linalg.norm(pts[0] + curve.offset - pts[-1]))
    return seg


def arc_positions(curve: SampledCurve) -> tuple[np.ndarray, float]:
    """Cumulative arc position of each vertex and the total length."""
    seg = segment_lengths(curve)
    s = np.concatenate(([0.0], np.cumsum(seg)))
    total = float(s[-1])
    return s[: curve.n], total


def _neighbors(curve: SampledCurve) -> tuple[np.ndarray, np.ndarray]:
    # Wrapped predecessor/successor arrays for cyclic topologies.
    pts = curve.points
    prev = np.roll(pts, 1, axis=0)
    nxt = np.roll(pts, -1, axis=0)
    if curve.topology == PERIODIC:
        prev = prev.copy()
        nxt = nxt.copy()
        prev[0] = pts[-1] - curve.offset
        nxt[-1] = pts[0] + curve.offset
    return prev, nxt


def _project_normal(raw: np.ndarray, tangents: np.ndarray) -> np.ndarray:
    # Remove the tangential residue of the second-difference stencil so the
    # curvature vector is orthogonal to the tangent to rounding accuracy.
    tang_comp = np.einsum("ij,ij->i", raw, tangents)
    return raw - tang_comp[:, None] * tangents


def compute_geometry(curve: SampledCurve) -> CurveGeometry:
    """Tangents, curvature vectors and arc elements of ``curve``.

    Tangents come from the normalized centered difference of the two
    neighbors; curvature vectors from the three-point second-derivative
    stencil with respect to arc length on non-uniform spacing, projected
    orthogonal to the tangent.  Open-curve endpoints use one-sided stencils.
    """
    pts = curve.points
    n = curve.n
    seg = segment_lengths(curve)

    if curve.is_cyclic():
        prev, nxt = _neighbors(curve)
        h_minus = np.roll(seg, 1)
        h_plus = seg
        chord = nxt - prev
        chord_len = np.linalg.norm(chord, axis=1)
        if chord_len.min() <= 0.0:
            raise InvalidCurveError("degenerate centered-difference tangent")
        tangents = chord / chord_len[:, None]
        raw = (2.0 / (h_minus + h_plus))[:, None] * (
            (nxt - pts) / h_plus[:, None] - (pts - prev) / h_minus[:, None]
        )
        kvec = _project_normal(raw, tangents)
        ds = 0.5 * (h_minus + h_plus)
        total = float(np.sum(seg))
    else:
        tangents = np.empty_like(pts)
        raw = np.empty_like(pts)
        h = seg
        # interior: same formulas as the cyclic branch
        prev, cur, nxt = pts[:-2], pts[1:-1], pts[2:]
        hm, hp = h[:-1], h[1:]
        chord = nxt - prev
        chord_len = np.linalg.norm(chord, axis=1)
        if chord_len.size and chord_len.min() <= 0.0:
            raise InvalidCurveError("degenerate centered-difference tangent")
        tangents[1:-1] = chord / chord_len[:, None]
        raw[1:-1] = (2.0 / (hm + hp))[:, None] * (
            (nxt - cur) / hp[:, None] - (cur - prev) / hm[:, None]
        )
        # one-sided boundary stencils
        tangents[0] = (pts[1] - pts[0]) / h[0]
        tangents[-1] = (pts[-1] - pts[-2]) / h[-1]
        raw[0] = 2.0 * ((pts[2] - pts[1]) / h[1] - (pts[1] - pts[0]) / h[0]) / (
            h[0] + h[1]
        )
        raw[-1] = 2.0 * (
            (pts[-1] - pts[-2]) / h[-1] - (pts[-2] - pts[-3]) / h[-2]
        ) / (h[-1] + h[-2])
        kvec = _project_normal(raw, tangents)
        ds = np.empty(n)
        ds[1:-1] = 0.5 * (h[:-1] + h[1:])
        ds[0] = 0.5 * h[0]
        ds[-1] = 0.5 * h[-1]
        total = float(np.sum(seg))

    scalar = np.linalg.norm(kvec, axis=1)
    for arr in (tangents, kvec, scalar, ds, seg):
        arr.setflags(write=False)
    return CurveGeometry(
        tangents=tangents,
        curvature_vectors=kvec,
        scalar_curvature=scalar,
        ds=ds,
        total_length=total,
        segment_lengths=seg,
    )


def total_absolute_curvature(geometry: CurveGeometry) -> float:
    """Discrete integral of |k| along the curve: sum of k_i * ds_i."""
    return float(np.sum(geometry.scalar_curvature * geometry.ds))


def total_squared_curvature(geometry: CurveGeometry) -> float:
    """Discrete integral of k^2 along the curve."""
    return float(np.sum(geometry.scalar_curvature**2 * geometry.ds))


def pair_distances(curve: SampledCurve, i: int, j: int) -> tuple[float, float]:
    """Chord distance d and shorter-arc distance l between vertices i and j.

    Defined for closed curves only; the arc is measured along the polyline
    and folded to the shorter of the two sides, so 0 < l <= L/2.
    """
    if curve.topology != CLOSED:
        raise UnsupportedTopologyError(
            "pair distances need a closed curve, got " + curve.topology
        )
    n = curve.n
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidArgumentError(f"vertex index out of range: ({i}, {j})")
    if i == j:
        raise DiagonalPairError("a vertex cannot be paired with itself")
    s, total = arc_positions(curve)
    d = float(np.linalg.norm(curve.points[i] - curve.points[j]))
    arc = abs(float(s[j] - s[i]))
    l = min(arc, total - arc)
    return d, l


def resample_uniform(curve: SampledCurve, n: int) -> SampledCurve:
    """Resample to ``n`` vertices at uniform arc spacing.

    New vertices sit on the piecewise-linear interpolant at equal arc-length
    fractions of the polyline.  Closed and periodic curves keep vertex 0 as
    the anchor; open curves keep both endpoints exactly.  Topology and offset
    are preserved.
    """
    if n < MIN_VERTICES[curve.topology]:
        raise InvalidArgumentError(
            f"cannot resample {curve.topology} curve to {n} vertices"
        )
    pts = curve.points
    if curve.topology == CLOSED:
        ext = np.vstack([pts, pts[0]])
    elif curve.topology == PERIODIC:
        ext = np.vstack([pts, pts[0] + curve.offset])
    else:
        ext = pts
    seg = np.linalg.norm(np.diff(ext, axis=0), axis=1)
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    total = cum[-1]

    if curve.topology == OPEN:
        targets = np.arange(n) * (total / (n - 1))
        targets[-1] = total
    else:
        targets = np.arange(n) * (total / n)

    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    frac = (targets - cum[idx]) / seg[idx]
    new_pts = ext[idx] + frac[:, None] * (ext[idx + 1] - ext[idx])
    if curve.topology == OPEN:
        new_pts[0] = pts[0]
        new_pts[-1] = pts[-1]
    return SampledCurve(new_pts, curve.topology, curve.offset)
