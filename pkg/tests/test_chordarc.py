"""Chord-arc ratio fields, minima, and the minimum conditions."""

import math

import numpy as np
import pytest

from csflab import (
    CLOSED,
    D_OVER_L,
    D_OVER_PSI,
    DiagonalPairError,
    InvalidArgumentError,
    PERIODIC,
    RatioField,
    SampledCurve,
    UnsupportedTopologyError,
    arc_curvature_integral,
    comparison_chord,
    compute_geometry,
    find_local_minima,
    min_pair_ratio,
    min_ratio_series,
    pair_diagnostics,
    ratio_field,
    ratio_minima,
    ratio_minimum_condition_dl,
    ratio_minimum_condition_dpsi,
    total_absolute_curvature,
)


def circle(n, r=1.0):
    th = np.arange(n) * (2.0 * math.pi / n)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th), np.zeros(n)])
    return SampledCurve(pts, CLOSED)


def helix(n, a=1.0, b=1.0):
    u = np.arange(n) * (2.0 * math.pi / n)
    pts = np.column_stack([a * np.cos(u), a * np.sin(u), b * u])
    return SampledCurve(pts, PERIODIC, offset=(0.0, 0.0, 2.0 * math.pi * b))


def dumbbell(n):
    th = np.arange(n) * (2.0 * math.pi / n)
    r = 1.0 + 0.4 * np.cos(2 * th) + 0.1 * np.sin(3 * th)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th), np.zeros(n)])
    return SampledCurve(pts, CLOSED)


def test_comparison_chord_oracle():
    L = 10.0
    # a half-length arc of the comparison circle spans its diameter
    assert abs(comparison_chord(L / 2.0, L) - L / math.pi) < 1e-14
    assert comparison_chord(0.0, L) == 0.0
    # small arcs: psi ~ l
    assert abs(comparison_chord(1e-4, L) - 1e-4) < 1e-10


def test_circle_dl_field_matches_polygon_formula():
    n, r = 64, 2.0
    f = ratio_field(circle(n, r), D_OVER_L, exclusion_band=2)
    s = math.sin(math.pi / n)
    for i, j in [(0, 5), (3, 35), (10, 42), (0, 32)]:
        m = min((j - i) % n, (i - j) % n)
        expected = math.sin(m * math.pi / n) / (m * s)
        assert abs(f.values[i, j] - expected) < 1e-13
        assert f.values[i, j] == f.values[j, i]


def test_circle_dpsi_field_is_constant():
    # every pair of a polygonal circle has d/psi = pi / (n sin(pi/n))
    n = 64
    f = ratio_field(circle(n), D_OVER_PSI, exclusion_band=2)
    expected = math.pi / (n * math.sin(math.pi / n))
    finite = f.values[np.isfinite(f.values)]
    assert finite.size > 0
    assert np.abs(finite - expected).max() < 1e-12


def test_exclusion_band_masks_near_diagonal():
    n, band = 32, 3
    f = ratio_field(circle(n), D_OVER_L, exclusion_band=band)
    for i in range(n):
        for j in range(n):
            sep = min((j - i) % n, (i - j) % n)
            assert np.isnan(f.values[i, j]) == (sep <= band)


def test_ratio_field_validation():
    with pytest.raises(InvalidArgumentError):
        ratio_field(circle(16), "chord_over_arc", 2)
    with pytest.raises(InvalidArgumentError):
        ratio_field(circle(16), D_OVER_L, 0)
    with pytest.raises(InvalidArgumentError):
        ratio_field(circle(16), D_OVER_L, 8)  # band >= n/2
    with pytest.raises(UnsupportedTopologyError):
        ratio_field(helix(32), D_OVER_L, 2)
    f = ratio_field(circle(16), D_OVER_L, 2)
    with pytest.raises(ValueError):
        f.values[0, 5] = 0.0


def test_find_local_minima_planted():
    n = 20
    vals = np.full((n, n), 2.0)
    rng = np.random.default_rng(0)
    vals += rng.uniform(0.0, 0.1, (n, n))
    vals = 0.5 * (vals + vals.T)
    for k in range(n):
        for b in (-2, -1, 0, 1, 2):
            vals[k, (k + b) % n] = math.nan
    vals[4, 12] = vals[12, 4] = 0.5  # unique planted minimum
    f = RatioField(values=vals, metric=D_OVER_L, exclusion_band=2)
    mins = find_local_minima(f)
    assert mins[0][:2] == (4, 12)
    assert mins[0][2] == 0.5
    # canonical i < j ordering, ascending values
    assert all(i < j for i, j, _ in mins)
    assert all(a[2] <= b[2] for a, b in zip(mins, mins[1:]))


def test_find_local_minima_plateau_needs_strict_neighbor():
    n = 20
    vals = np.full((n, n), 1.0)
    for k in range(n):
        for b in (-2, -1, 0, 1, 2):
            vals[k, (k + b) % n] = math.nan
    f = RatioField(values=vals, metric=D_OVER_L, exclusion_band=2)
    # constant field: no cell is strictly below any neighbor
    assert find_local_minima(f) == []


def test_find_local_minima_all_nan_rejected():
    vals = np.full((16, 16), math.nan)
    f = RatioField(values=vals, metric=D_OVER_L, exclusion_band=2)
    with pytest.raises(InvalidArgumentError):
        find_local_minima(f)


def test_dumbbell_neck_minimum_satisfies_first_variation():
    # at an interior minimum of d/l both chord-tangent angles equal the ratio
    n = 512
    c = dumbbell(n)
    f = ratio_field(c, D_OVER_L, exclusion_band=2)
    mins = find_local_minima(f)
    from csflab import arc_positions

    s, L = arc_positions(c)
    interior = []
    for i, j, v in mins:
        fwd = abs(s[j] - s[i])
        l = min(fwd, L - fwd)
        if l < 0.48 * L:
            interior.append((i, j, v))
    assert interior, "dumbbell neck should produce an interior d/l minimum"
    for i, j, v in interior:
        diag = pair_diagnostics(c, i, j)
        r1, r2 = diag.first_var_residual_dl
        assert abs(r1) < 5.0 / n
        assert abs(r2) < 5.0 / n
        assert abs(diag.d_over_l - v) < 1e-13


def test_circle_conditions_close_to_continuum():
    n = 256
    c = circle(n)
    g = compute_geometry(c)
    total = total_absolute_curvature(g)
    for i, j in [(0, 64), (0, 128), (17, 100)]:
        diag = pair_diagnostics(c, i, j)
        # d/psi condition vanishes on a round circle up to O(h^2)
        cond31 = ratio_minimum_condition_dpsi(diag, arc_curvature_integral(c, i, j))
        assert abs(cond31) < 2e-4
        # d/l condition reduces to (2 pi d / l)^2 > 0
        cond22 = ratio_minimum_condition_dl(diag, total)
        expected = (diag.d_over_l * total) ** 2
        assert abs(cond22 - expected) < 1e-8
        assert cond22 > 0.0
    # and the O(h^2) error actually contracts under refinement
    fine = circle(2 * n)
    d_fine = pair_diagnostics(fine, 0, 2 * 64)
    coarse = abs(ratio_minimum_condition_dpsi(
        pair_diagnostics(c, 0, 64), arc_curvature_integral(c, 0, 64)))
    refined = abs(ratio_minimum_condition_dpsi(
        d_fine, arc_curvature_integral(fine, 0, 128)))
    assert refined < coarse / 3.0


def test_cos2u_symmetric_pairs_are_borderline():
    from csflab import COS2U_CURVE, build_curve, make_preset

    n = 256
    c = build_curve(make_preset(COS2U_CURVE, n=n))
    for i, j in [(0, n // 2), (n // 4, 3 * n // 4)]:
        diag = pair_diagnostics(c, i, j)
        assert abs(diag.alpha - math.pi / 2.0) < 1e-9
        cond = ratio_minimum_condition_dpsi(diag, arc_curvature_integral(c, i, j))
        assert abs(cond) < 5e-2  # exact symmetry makes these nearly critical
        assert abs(cond) < 1e-9


def test_pair_diagnostics_closed_orientation_invariance():
    c = dumbbell(128)
    a = pair_diagnostics(c, 20, 90)
    b = pair_diagnostics(c, 90, 20)
    assert a.d == b.d and a.l == b.l and a.cond_dl == b.cond_dl


def test_pair_diagnostics_periodic_helix():
    n, a, b = 256, 1.0, 0.7
    c = helix(n, a, b)
    diag = pair_diagnostics(c, 3, 3 + n)
    # one full period: chord is the pure offset
    assert abs(diag.d - 2.0 * math.pi * b) < 1e-12
    seg = 2.0 * a * math.sin(math.pi / n)
    expected_l = n * math.hypot(seg, 2.0 * math.pi * b / n)
    assert abs(diag.l - expected_l) < 1e-9
    assert diag.psi is None and diag.alpha is None and diag.d_over_psi is None
    assert diag.first_var_residual_dpsi is None
    assert diag.cond_dpsi is None
    assert diag.cond_dl is not None and math.isfinite(diag.cond_dl)
    with pytest.raises(DiagonalPairError):
        pair_diagnostics(c, 5, 5)
    with pytest.raises(UnsupportedTopologyError):
        ratio_minimum_condition_dpsi(diag, 1.0)


def test_min_pair_ratio_periodic_matches_brute_force():
    n = 128
    c = helix(n, 1.0, 0.4)
    got = min_pair_ratio(c, D_OVER_L, exclusion_band=2)
    ext = np.vstack([c.points, c.points + c.offset])
    seg = np.linalg.norm(np.diff(c.points, axis=0), axis=1)
    closing = np.linalg.norm(c.points[0] + c.offset - c.points[-1])
    s = np.concatenate([[0.0], np.cumsum(np.concatenate([seg, [closing]]))])
    best = math.inf
    for i in range(n):
        for j in range(i + 3, min(i + n, 2 * n - 1) + 1):
            d = np.linalg.norm(ext[j] - ext[i])
            l = (s[j % n] + (j // n) * s[n]) - s[i] if j >= n else s[j] - s[i]
            best = min(best, d / l)
    assert abs(got - best) < 1e-12


def test_min_pair_ratio_periodic_rejects_dpsi():
    with pytest.raises(UnsupportedTopologyError):
        min_pair_ratio(helix(64), D_OVER_PSI, 2)


def test_ratio_minima_matches_field_minima():
    c = dumbbell(128)
    dl, dpsi = ratio_minima(c, exclusion_band=2)
    f_dl = ratio_field(c, D_OVER_L, 2)
    f_dpsi = ratio_field(c, D_OVER_PSI, 2)
    assert dl == np.nanmin(f_dl.values)
    assert dpsi == np.nanmin(f_dpsi.values)


def test_min_ratio_series_slopes():
    snaps = [(0.0, circle(64, 1.0)), (0.1, circle(64, 0.9)), (0.2, circle(64, 0.8))]
    t, vals, slopes = min_ratio_series(snaps, D_OVER_L, 2)
    assert t.shape == (3,) and vals.shape == (3,) and slopes.shape == (2,)
    # d/l is scale invariant: constant along shrinking circles
    assert np.abs(np.diff(vals)).max() < 1e-14
    assert np.abs(slopes).max() < 1e-13
    with pytest.raises(InvalidArgumentError):
        min_ratio_series([(0.0, circle(64))], D_OVER_L, 2)


def test_arc_curvature_integral_circle_oracle():
    n, r = 128, 1.5
    c = circle(n, r)
    h = 2.0 * r * math.sin(math.pi / n)
    # half-weight endpoints make the arc integral exactly m*h/r
    for i, j in [(0, 10), (7, 50), (0, 64)]:
        m = min((j - i) % n, (i - j) % n)
        got = arc_curvature_integral(c, i, j)
        assert abs(got - m * h / r) < 1e-10


def test_arc_integral_takes_shorter_arc_with_half_endpoints():
    c = dumbbell(96)
    g = compute_geometry(c)
    total = total_absolute_curvature(g)
    kds = g.scalar_curvature * g.ds
    # short index span: integral is the in-span sum with half endpoints
    span_sum = kds[10:41].sum() - 0.5 * kds[10] - 0.5 * kds[40]
    assert abs(arc_curvature_integral(c, 10, 40) - span_sum) < 1e-12
    assert arc_curvature_integral(c, 40, 10) == arc_curvature_integral(c, 10, 40)
    # wide index span: the complement is the shorter arc
    wide_sum = kds[2:91].sum() - 0.5 * kds[2] - 0.5 * kds[90]
    assert abs(arc_curvature_integral(c, 2, 90) - (total - wide_sum)) < 1e-12


def test_threaded_field_bitwise_equal(monkeypatch):
    c = dumbbell(96)
    monkeypatch.setenv("CSF_THREADS", "1")
    serial = ratio_field(c, D_OVER_PSI, 2).values
    monkeypatch.setenv("CSF_THREADS", "4")
    threaded = ratio_field(c, D_OVER_PSI, 2).values
    assert np.array_equal(serial, threaded, equal_nan=True)
    monkeypatch.setenv("CSF_THREADS", "not-a-number")
    fallback = ratio_field(c, D_OVER_PSI, 2).values
    assert np.array_equal(serial, fallback, equal_nan=True)
