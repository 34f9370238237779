"""Spherical flows: decomposition, time dilation, and consistency."""

import math

import numpy as np
import pytest

from csflab import (
    CLOSED,
    DomainError,
    InvalidArgumentError,
    NotOnSphereError,
    SampledCurve,
    SPHERE_PERTURBED,
    build_curve,
    compute_geometry,
    consistency_check,
    consistency_profile,
    decompose_curvature,
    inverse_time_dilation,
    make_preset,
    rescale,
    run_geodesic_flow,
    run_to_times,
    sphere_residual,
    stable_step,
    step_geodesic_flow,
    time_dilation,
)


def latitude_circle(n, theta, r=1.0):
    phi = np.arange(n) * (2.0 * math.pi / n)
    pts = np.column_stack([
        r * math.sin(theta) * np.cos(phi),
        r * math.sin(theta) * np.sin(phi),
        np.full(n, r * math.cos(theta)),
    ])
    return SampledCurve(pts, CLOSED)


def test_latitude_decomposition_oracle():
    theta = 1.0
    c = latitude_circle(256, theta)
    dec = decompose_curvature(c)
    assert abs(dec.radius - 1.0) < 1e-12
    # normal curvature 1/R, geodesic curvature cot(theta)
    assert np.abs(dec.k_n - 1.0).max() < 1e-9
    assert np.abs(np.abs(dec.k_g) - 1.0 / math.tan(theta)).max() < 1e-9
    # frame vectors are unit and mutually orthogonal
    g = compute_geometry(c)
    assert np.abs(np.linalg.norm(dec.n_vec, axis=1) - 1.0).max() < 1e-12
    assert np.abs(np.einsum("ij,ij->i", dec.n_vec, g.tangents)).max() < 1e-12
    assert np.abs(np.einsum("ij,ij->i", dec.q_vec, dec.n_vec)).max() < 1e-12


def test_decomposition_reconstructs_curvature_vector():
    c = build_curve(make_preset(SPHERE_PERTURBED, n=256, eps=0.3, harmonic=4))
    dec = decompose_curvature(c)
    g = compute_geometry(c)
    recon = dec.k_g[:, None] * dec.q_vec + dec.k_n[:, None] * dec.n_vec
    scale = np.linalg.norm(g.curvature_vectors, axis=1)
    err = np.linalg.norm(recon - g.curvature_vectors, axis=1)
    assert (err <= 1e-6 * np.maximum(scale, 1.0)).all()


def test_great_circle_has_zero_geodesic_curvature():
    c = latitude_circle(128, math.pi / 2.0)
    dec = decompose_curvature(c)
    assert np.abs(dec.k_g).max() < 1e-9
    assert np.abs(dec.k_n - 1.0).max() < 1e-9


def test_decompose_rejects_off_sphere_curve():
    th = np.arange(64) * (2.0 * math.pi / 64)
    pts = np.column_stack([2.0 * np.cos(th), np.sin(th), np.zeros(64)])
    with pytest.raises(NotOnSphereError):
        decompose_curvature(SampledCurve(pts, CLOSED))


def test_sphere_residual_tracks_radius_law():
    c = latitude_circle(64, 1.2)
    assert sphere_residual(c, 0.0, 1.0) < 1e-12
    # same curve read as a time-t snapshot of a shrinking unit sphere
    t = 0.3
    shrunk = SampledCurve(c.points * math.sqrt(1.0 - 2 * t), CLOSED)
    assert sphere_residual(shrunk, t, 1.0) < 1e-12
    assert sphere_residual(c, t, 1.0) > 0.5  # wrong time shows up immediately
    with pytest.raises(DomainError):
        sphere_residual(c, 0.5, 1.0)


def test_time_dilation_values_and_roundtrip():
    assert time_dilation(0.0) == 0.5 * math.log(2.0)
    assert abs(time_dilation(0.25) - 0.5 * math.log(4.0)) < 1e-15
    for t in (0.0, 0.1, 0.3, 0.49):
        assert abs(inverse_time_dilation(time_dilation(t)) - t) < 1e-12
    with pytest.raises(DomainError):
        time_dilation(0.5)


def test_rescale_projects_to_unit_sphere():
    t = 0.2
    factor = math.sqrt(1.0 - 2 * t)
    c = latitude_circle(64, 0.8, r=factor)
    st = rescale(c, t)
    assert abs(st.t_tilde - time_dilation(t)) < 1e-15
    assert st.source_t == t
    assert np.abs(np.linalg.norm(st.curve_tilde.points, axis=1) - 1.0).max() < 1e-15


def test_rescale_rejects_wrong_radius():
    c = latitude_circle(64, 0.8, r=1.0)
    with pytest.raises(InvalidArgumentError):
        rescale(c, 0.4)  # radius should be sqrt(0.2), not 1


def test_geodesic_flow_latitude_ode():
    # cos(theta) grows like e^{t_tilde} under the intrinsic flow
    theta0 = 1.0
    st = rescale(latitude_circle(256, theta0), 0.0)
    dt = 0.25
    out = run_geodesic_flow(st, [st.t_tilde + dt])
    z = out[0].curve_tilde.points[:, 2]
    assert z.max() - z.min() < 1e-12  # stays a latitude circle
    assert abs(z.mean() - math.cos(theta0) * math.exp(dt)) < 1e-4
    assert np.abs(np.linalg.norm(out[0].curve_tilde.points, axis=1) - 1.0).max() < 1e-12


def test_step_geodesic_flow_bounds_dt():
    st = rescale(latitude_circle(64, 1.0), 0.0)
    geom = compute_geometry(st.curve_tilde)
    with pytest.raises(InvalidArgumentError):
        step_geodesic_flow(st, 10.0 * stable_step(geom))
    nxt = step_geodesic_flow(st, 0.5 * stable_step(geom))
    assert nxt.t_tilde > st.t_tilde


def test_consistency_check_validations():
    c = build_curve(make_preset(SPHERE_PERTURBED, n=64))
    ext = run_to_times(c, [0.05])
    intr = run_geodesic_flow(rescale(c, 0.0), [time_dilation(0.05)])
    assert consistency_check(ext, intr) < 1e-3
    with pytest.raises(InvalidArgumentError):
        consistency_check(ext, [])
    wrong_time = run_geodesic_flow(rescale(c, 0.0), [time_dilation(0.06)])
    with pytest.raises(InvalidArgumentError):
        consistency_check(ext, wrong_time)


def test_consistency_profile_small_grid():
    c = build_curve(make_preset(SPHERE_PERTURBED, n=128, eps=0.2, harmonic=3))
    targets = [0.05, 0.1, 0.15]
    rows = consistency_profile(c, targets, cfl=0.4)
    assert [r[0] for r in rows] == targets
    for t, t_tilde, gap in rows:
        assert abs(t_tilde - time_dilation(t)) < 1e-12
        assert gap < 1e-3
    # deviation accumulates but stays tiny on a smooth perturbation
    gaps = [r[2] for r in rows]
    assert gaps == sorted(gaps)
