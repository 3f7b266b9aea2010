import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from courbure.geometry import (CAP_FRACTION, NotConformallyHyperbolic, build_dr_profile,
                               chart_from_profile, conformal_change_curvature,
                               conformal_coordinate, euclidean_profile, flat_chart,
                               gaussian_curvature_chart, gaussian_curvature_profile,
                               hyperbolic_profile, laplace_beltrami, poincare_cap_chart,
                               profile_preset, sphere_cap_profile, uniformize_revolution)
from courbure.grid import CAPPED_DISK, ScalarField

# independent 30-digit quadratures of the D_r profiles (collar 1)
DR_T = {3: 3.6495352771161178588, 4: 4.727048247250558747,
        5: 5.7554301720270531355, 6: 6.7658647161661818128}
DR_T_COLLAR_HALF_R4 = 4.7336731470779298839
# lim t - log rho for any profile equal to sinh on [0, 1]: log(1/2) - log tanh(1/2)
SINH_CENTER_OFFSET = 0.078789652345359415653


def test_conformal_coordinate_hyperbolic_closed_form():
    p = hyperbolic_profile()
    for rho in (0.1, 0.7, 1.0, 2.5, 9.0):
        exact = math.log(math.tanh(rho / 2)) - math.log(math.tanh(0.5))
        assert conformal_coordinate(p, rho) == pytest.approx(exact, abs=1e-12)


def test_conformal_coordinate_flat_is_log():
    p = euclidean_profile()
    for rho in (0.01, 0.5, 3.0, 100.0):
        assert conformal_coordinate(p, rho) == pytest.approx(math.log(rho), abs=1e-12)


def test_conformal_coordinate_domain():
    with pytest.raises(ValueError):
        conformal_coordinate(sphere_cap_profile(2.0), 2.5)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.05, 5.0))
def test_conformal_coordinate_increasing(a, b):
    p = hyperbolic_profile()
    if a < b:
        assert conformal_coordinate(p, a) < conformal_coordinate(p, b)


def test_curvature_of_profiles():
    rho = np.array([0.0, 0.3, 1.0, 2.0])
    assert np.allclose(gaussian_curvature_profile(hyperbolic_profile())(rho), -1, atol=1e-6)
    assert np.allclose(gaussian_curvature_profile(euclidean_profile())(rho), 0, atol=1e-12)
    assert np.allclose(gaussian_curvature_profile(sphere_cap_profile())(rho[:3]), 1, atol=1e-6)


def test_dr_profile_shape():
    p = build_dr_profile(4.0)
    assert p.rho_max == pytest.approx(4 + 4 * math.sinh(4))
    assert p.f(2.0) == pytest.approx(math.sinh(2.0))
    assert p.f(6.0) == pytest.approx(math.sinh(4.0))
    rho = np.linspace(0.01, 8, 2001)
    assert np.all(np.diff(p.f(rho)) >= -1e-12)
    # f, f' continuous at the collar ends
    for edge in (3.0, 4.0):
        for fn in (p.f, p.df):
            assert fn(edge - 1e-9) == pytest.approx(fn(edge + 1e-9), rel=1e-6, abs=1e-6)


def test_dr_profile_derivatives_match_finite_differences():
    p = build_dr_profile(3.0, 0.7)
    h = 1e-5
    for s in (2.4, 2.6, 2.9):
        assert p.df(s) == pytest.approx((p.f(s + h) - p.f(s - h)) / (2 * h), rel=1e-7)
        assert p.d2f(s) == pytest.approx((p.df(s + h) - p.df(s - h)) / (2 * h), rel=1e-6)


def test_dr_profile_rejects_small_r():
    with pytest.raises(ValueError):
        build_dr_profile(1.5)


def test_profile_presets():
    assert profile_preset("hyperbolic").f(1.0) == pytest.approx(math.sinh(1.0))
    assert profile_preset("sphere-cap").rho_max == 2.0
    assert profile_preset("dr", r=3.0).params["r"] == 3.0
    with pytest.raises(KeyError):
        profile_preset("torus")


def test_flat_chart_has_zero_curvature():
    chart = flat_chart(16, 0, 1, 11)
    assert np.abs(gaussian_curvature_chart(chart).values[1:-1]).max() == 0


def _chart_curvature_error(n):
    chart = chart_from_profile(hyperbolic_profile(), 3.0, 16, n, rho_inner=0.5)
    K = gaussian_curvature_chart(chart).values
    return np.abs(K + 1)[1:-1].max()


def test_hyperbolic_chart_curvature_converges():
    e1, e2 = _chart_curvature_error(129), _chart_curvature_error(257)
    assert e2 < 2e-3
    assert e1 / e2 > 3.5


def test_capped_chart_geometry():
    chart, kappa0 = poincare_cap_chart(4.0, 32, 64)
    assert chart.grid.topology == CAPPED_DISK
    assert chart.rho[0] == pytest.approx(CAP_FRACTION * 4.0)
    assert chart.rho[-1] == pytest.approx(4.0)
    assert np.allclose(chart.lam.values[:, 0], np.sinh(chart.rho), rtol=1e-9)
    assert np.all(kappa0.values == 1.0)


def test_chart_rho_matches_closed_form_inverse():
    chart = chart_from_profile(hyperbolic_profile(), 3.0, 16, 40, rho_inner=0.2)
    t = chart.grid.t
    exact = 2 * np.arctanh(math.tanh(0.5) * np.exp(t))
    assert np.allclose(chart.rho, exact, rtol=1e-9)


def test_laplace_beltrami_scales_flat_laplacian():
    chart = chart_from_profile(hyperbolic_profile(), 2.0, 16, 20, rho_inner=0.5)
    u = ScalarField.from_function(chart.grid, lambda th, t: np.cos(th) * t)
    lb = laplace_beltrami(chart, u).values
    # independent stencil
    v, g = u.values, chart.grid
    lap = np.zeros_like(v)
    for j in range(1, g.n_t - 1):
        for i in range(g.n_theta):
            lap[j, i] = ((v[j - 1, i] - 2 * v[j, i] + v[j + 1, i]) / g.h_t ** 2
                         + (v[j, i - 1] - 2 * v[j, i] + v[j, (i + 1) % g.n_theta]) / g.h_theta ** 2)
    assert np.allclose(lb, lap / chart.lam.values ** 2, atol=1e-12)


def test_conformal_change_of_constant_factor():
    chart, kappa0 = poincare_cap_chart(3.0, 16, 40)
    u = ScalarField.constant(chart.grid, -math.log(2))
    k = conformal_change_curvature(kappa0, u, chart).values
    assert np.allclose(k[1:-1], 4.0, atol=1e-12)


def test_uniformize_hyperbolic_is_isometry():
    unif = uniformize_revolution(hyperbolic_profile(30.0))
    assert math.exp(unif.T - unif.c0) / 2 == pytest.approx(1.0, abs=1e-9)
    assert unif.c0 == pytest.approx(SINH_CENTER_OFFSET, abs=1e-10)


def test_uniformize_flat_disk():
    unif = uniformize_revolution(euclidean_profile(3.0))
    assert unif.conformal_radius == pytest.approx(3.0, rel=1e-9)
    assert unif.radius_map(1.5) == pytest.approx(0.5, rel=1e-9)


def test_uniformize_plane_is_rejected():
    with pytest.raises(NotConformallyHyperbolic):
        uniformize_revolution(euclidean_profile())


@pytest.mark.parametrize("r", [3, 4, 5, 6])
def test_uniformize_dr_against_independent_quadrature(r):
    unif = uniformize_revolution(build_dr_profile(r))
    assert unif.T == pytest.approx(DR_T[r], abs=1e-10)
    assert unif.c0 == pytest.approx(SINH_CENTER_OFFSET, abs=1e-10)


def test_uniformize_dr_collar_half():
    assert uniformize_revolution(build_dr_profile(4.0, 0.5)).T == pytest.approx(
        DR_T_COLLAR_HALF_R4, abs=1e-10)


def test_radius_map_limits():
    unif = uniformize_revolution(build_dr_profile(3.0))
    assert unif.radius_map(0.0) == 0.0
    assert unif.radius_map(unif.profile.rho_max) == 1.0
    r = unif.radius_map(np.array([0.5, 1.0, 2.0, 5.0]))
    assert np.all(np.diff(r) > 0) and np.all((r > 0) & (r < 1))
