import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from courbure.grid import (ANNULUS, CAPPED_DISK, Grid, GridError, ScalarField, cap_ghost_ring,
                           graph_distance, holder_seminorm, integrate, laplacian_flat,
                           laplacian_matrix, lattice_sources)


def annulus(n_theta=32, n_t=33, t0=0.0, t1=1.0):
    return Grid.uniform(n_theta, t0, t1, n_t, ANNULUS)


def test_grid_rejects_few_theta_nodes():
    with pytest.raises(GridError):
        Grid.uniform(4, 0, 1, 10)


def test_grid_rejects_nonuniform_t():
    with pytest.raises(GridError):
        Grid(16, np.array([0.0, 0.1, 0.3]))


def test_grid_rejects_decreasing_t():
    with pytest.raises(GridError):
        Grid(16, np.array([0.0, -0.1, -0.2]))


def test_spacings():
    g = annulus(64, 11, 0.0, 2.0)
    assert g.h_theta == pytest.approx(2 * math.pi / 64)
    assert g.h_t == pytest.approx(0.2)
    assert g.shape == (11, 64)


def test_dirichlet_rings_by_topology():
    assert annulus().dirichlet_rings == (0, 32)
    assert Grid.uniform(16, -3, 0, 10, CAPPED_DISK).dirichlet_rings == (9,)


def test_field_rejects_nonfinite():
    g = annulus()
    vals = np.zeros(g.shape)
    vals[3, 4] = np.nan
    with pytest.raises(GridError):
        ScalarField(g, vals)


def test_field_wrong_size():
    with pytest.raises(GridError):
        ScalarField(annulus(), np.zeros(7))


def test_laplacian_of_constant_vanishes():
    g = annulus()
    lap = laplacian_flat(ScalarField.constant(g, 3.7))
    assert np.abs(lap.values[1:-1]).max() < 1e-12


def _cos_error(n):
    g = annulus(n, n + 1, 0.0, 1.0)
    f = ScalarField.from_function(g, lambda th, t: np.cos(th) + 0 * t)
    lap = laplacian_flat(f).values
    return np.abs(lap + np.cos(g.mesh()[0]))[1:-1].max()


def test_laplacian_cos_theta_second_order():
    e1, e2 = _cos_error(32), _cos_error(64)
    assert e1 < 0.01
    assert e1 / e2 > 3.5


def test_laplacian_t_squared():
    g = annulus(16, 41, -1.0, 2.0)
    lap = laplacian_flat(ScalarField.from_function(g, lambda th, t: t ** 2 + 0 * th))
    # the 3-point stencil is exact on quadratics
    assert np.abs(lap.values[1:-1] - 2).max() < 1e-9


def test_laplacian_fourth_order_converges_faster():
    def err(n):
        g = annulus(n, n + 1, 0.0, 1.0)
        f = ScalarField.from_function(g, lambda th, t: np.sin(2 * th) * np.exp(t))
        exact = -3 * np.sin(2 * g.mesh()[0]) * np.exp(g.mesh()[1])
        return np.abs(laplacian_flat(f, order=4).values - exact)[2:-2].max()
    assert err(32) / err(64) > 12


def test_laplacian_needs_three_rings():
    g = Grid(16, np.array([0.0, 1.0]))
    with pytest.raises(GridError):
        laplacian_flat(ScalarField.constant(g, 1.0))


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(8, 40), st.integers(3, 30))
def test_affine_in_t_is_harmonic(a, b, n_theta, n_t):
    g = Grid.uniform(n_theta, -1.0, 2.0, n_t)
    f = ScalarField.from_function(g, lambda th, t: a + b * t + 0 * th)
    assert np.abs(laplacian_flat(f).values[1:-1]).max() < 1e-9 * max(1, abs(a), abs(b))


def test_laplacian_matrix_matches_stencil():
    rng = np.random.default_rng(0)
    g = Grid.uniform(12, -2.0, 0.0, 9, CAPPED_DISK)
    f = ScalarField(g, rng.normal(size=g.shape))
    via_matrix = (laplacian_matrix(g, cap_closure=True) @ f.flat).reshape(g.shape)
    direct = laplacian_flat(f, cap_closure=True).values
    assert np.allclose(via_matrix[:-1], direct[:-1], atol=1e-10)


def test_cap_ghost_preserves_constants_and_damps_modes():
    g = Grid.uniform(32, -3.0, 0.0, 20, CAPPED_DISK)
    assert np.allclose(cap_ghost_ring(np.full(32, 2.5), g), 2.5)
    mode = np.cos(3 * g.theta)
    ghost = cap_ghost_ring(mode, g)
    assert np.abs(ghost).max() < np.abs(mode).max()


def test_cap_ghost_is_discrete_harmonic_continuation():
    # the ghost of ring 0 of mu^j cos(k theta) is mu^-1 cos(k theta)
    g = Grid.uniform(16, -1.0, 0.0, 8, CAPPED_DISK)
    k = 2
    sigma = 4 * (g.h_t / g.h_theta) ** 2 * math.sin(k * g.h_theta / 2) ** 2
    mu = 1 + sigma / 2 + math.sqrt(sigma + sigma ** 2 / 4)
    ring = np.cos(k * g.theta)
    ghost = cap_ghost_ring(ring, g)
    assert np.allclose(ghost, ring / mu, atol=1e-13)
    # and the three rings ghost, ring, mu * ring satisfy the 5-point equation
    lap = (ghost - 2 * ring + mu * ring) / g.h_t ** 2 + \
        (np.roll(ring, 1) - 2 * ring + np.roll(ring, -1)) / g.h_theta ** 2
    assert np.abs(lap).max() < 1e-9


def test_integrate_area_of_cylinder():
    g = annulus(64, 51)
    assert integrate(ScalarField.constant(g, 1.0)) == pytest.approx(2 * math.pi, abs=1e-10)


def test_integrate_zero_and_periodic():
    g = annulus()
    assert integrate(ScalarField.constant(g, 0.0)) == 0.0
    s = ScalarField.from_function(g, lambda th, t: np.sin(th) + 0 * t)
    assert abs(integrate(s)) < 1e-10


def test_integrate_with_weights_and_mismatch():
    g = annulus()
    two = ScalarField.constant(g, 2.0)
    assert integrate(two, two) == pytest.approx(4 * 2 * math.pi)
    with pytest.raises(GridError):
        integrate(two, ScalarField.constant(annulus(16), 1.0))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6), st.floats(-4, 4), st.floats(-4, 4))
def test_integrate_linear_and_monotone(coefs, a, b):
    g = annulus(16, 9)
    Theta, T = g.mesh()
    f1 = ScalarField(g, coefs[0] + coefs[1] * np.cos(Theta) + coefs[2] * T)
    f2 = ScalarField(g, coefs[3] + coefs[4] * np.sin(2 * Theta) + coefs[5] * T ** 2)
    lhs = integrate(ScalarField(g, a * f1.values + b * f2.values))
    assert lhs == pytest.approx(a * integrate(f1) + b * integrate(f2), abs=1e-9)
    assert integrate(ScalarField(g, f1.values ** 2)) >= 0


def test_holder_constant_is_zero():
    g = annulus()
    assert holder_seminorm(ScalarField.constant(g, 1.0), alpha=0.5) == 0.0


def test_holder_rejects_alpha():
    g = annulus()
    with pytest.raises(ValueError):
        holder_seminorm(ScalarField.constant(g, 1.0), alpha=1.5)


def test_holder_of_distance_function_is_one():
    # Lipschitz constant of a distance function is 1
    g = annulus(48, 49, 0.0, 3.0)
    dist = graph_distance(g)
    ref = g.size // 2 + 5
    d = ScalarField(g, dist([ref])[0])
    value = holder_seminorm(d, alpha=1.0, metric_distance=dist, radius=1.0,
                            sources=lattice_sources(g, 8))
    assert value == pytest.approx(1.0, abs=1e-9)


def test_holder_monotone_in_alpha():
    # for d <= 1, d^0.5 >= d, so the alpha = 1/2 quotient is the smaller one
    g = annulus(24, 25)
    f = ScalarField.from_function(g, lambda th, t: np.sin(th) * t)
    for radius in (0.5, 1.0):
        half = holder_seminorm(f, alpha=0.5, radius=radius)
        one = holder_seminorm(f, alpha=1.0, radius=radius)
        assert half <= one * (1 + 1e-12)
    assert holder_seminorm(f, alpha=0.5, radius=0.5) < holder_seminorm(f, alpha=1.0, radius=0.5)


def test_graph_distance_scales_with_conformal_factor():
    g = annulus(16, 9)
    d1 = graph_distance(g)([0])
    d3 = graph_distance(g, ScalarField.constant(g, 3.0))([0])
    assert np.allclose(d3, 3 * d1)


def test_lattice_sources_are_nodes():
    g = annulus(64, 65)
    s = lattice_sources(g, 8)
    assert s.min() >= 0 and s.max() < g.size
    assert len(np.unique(s)) == len(s)
