import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from courbure.geometry import build_dr_profile, flat_chart, hyperbolic_profile, sphere_cap_profile
from courbure.grid import ScalarField
from courbure.modulus import (EXTREMAL_COLUMNS, METRICATION_BOUND, AnnulusSpec,
                              extremal_length_check, extremal_trials, flat_annulus,
                              modulus_revolution, monotonicity_check, random_density,
                              shortest_essential_loop, write_extremal_csv)


def sinh_modulus(a, b):
    return math.log(math.tanh(b / 2) / math.tanh(a / 2))


def test_metrication_bound_value():
    # worst direction is 22.5 degrees: (1 + (sqrt2 - 1) tan) / sec
    worst = max((math.cos(a) + (math.sqrt(2) - 1) * math.sin(a))
                for a in np.linspace(0, math.pi / 4, 10001))
    assert METRICATION_BOUND == pytest.approx(worst - 1, abs=1e-7)
    assert METRICATION_BOUND <= 0.083


@pytest.mark.parametrize("a,b", [(1, 2), (0.1, 0.5), (2, 9), (0.5, 3)])
def test_sinh_closed_form(a, b):
    assert modulus_revolution(hyperbolic_profile(), a, b) == pytest.approx(sinh_modulus(a, b), abs=1e-10)


@pytest.mark.parametrize("r", [3, 4, 5, 6])
def test_cylinder_modulus_is_r(r):
    p = build_dr_profile(r)
    assert modulus_revolution(p, r, p.rho_max) == pytest.approx(r, abs=1e-10)


def test_degenerate_annulus():
    assert modulus_revolution(hyperbolic_profile(), 1.3, 1.3) == 0.0


def test_domain_violations():
    with pytest.raises(ValueError):
        modulus_revolution(hyperbolic_profile(), 0.0, 1.0)
    with pytest.raises(ValueError):
        modulus_revolution(sphere_cap_profile(2.0), 1.0, 2.5)
    with pytest.raises(ValueError):
        modulus_revolution(hyperbolic_profile(), 2.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.01, 10))
def test_additivity(x, y, z):
    a, b, c = sorted((x, y, z))
    for p in (hyperbolic_profile(), build_dr_profile(4.0)):
        whole = modulus_revolution(p, a, c)
        assert whole == pytest.approx(modulus_revolution(p, a, b) + modulus_revolution(p, b, c),
                                      abs=1e-10)


def test_monotonicity_examples():
    p = hyperbolic_profile()
    assert monotonicity_check(p, (1, 2), (0.5, 3))
    assert modulus_revolution(p, 1, 2) < modulus_revolution(p, 0.5, 3)
    assert monotonicity_check(p, (1, 2), (1, 2))
    with pytest.raises(ValueError):
        monotonicity_check(p, (0.5, 3), (1, 2))


def test_monotone_increment_is_eps_over_f():
    p = build_dr_profile(3.0)
    a, b, eps = 1.0, 2.7, 1e-5
    inc = modulus_revolution(p, a, b + eps) - modulus_revolution(p, a, b)
    assert inc == pytest.approx(eps / float(p.f(b)), rel=1e-4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.01, 8), min_size=4, max_size=4, unique=True))
def test_nested_annuli_ordered(xs):
    a2, a1, b1, b2 = sorted(xs)
    assert monotonicity_check(hyperbolic_profile(), (a1, b1), (a2, b2))


def test_modulus_ignores_density():
    p = hyperbolic_profile()
    chart = flat_chart(16, 0, 1, 5)
    dens = ScalarField.constant(chart.grid, 7.0)
    plain = AnnulusSpec(profile=p, rho1=0.5, rho2=2.0)
    weighted = AnnulusSpec(profile=p, rho1=0.5, rho2=2.0, density=dens)
    assert plain.modulus() == weighted.modulus() == modulus_revolution(p, 0.5, 2.0)


def test_annulus_spec_validation():
    with pytest.raises(ValueError):
        AnnulusSpec()
    chart = flat_chart(16, 0, 1, 5)
    with pytest.raises(ValueError):
        AnnulusSpec(chart=chart, t1=0.5, t2=2.0)


def test_flat_loop_is_theta_circle():
    ann = flat_annulus(1.0, 64, 64)
    L = shortest_essential_loop(ann)
    assert abs(L - 2 * math.pi) <= 0.01 * 2 * math.pi
    assert L <= 2 * math.pi * (1 + METRICATION_BOUND)


def test_density_doubling_doubles_length():
    ann = flat_annulus(1.0, 32, 32)
    rng = np.random.default_rng(4)
    d = random_density(ann.chart.grid, rng)
    d2 = ScalarField(d.grid, 2 * d.values)
    assert shortest_essential_loop(ann, d2) == 2 * shortest_essential_loop(ann, d)


def test_loop_through_cheap_band():
    ann = flat_annulus(2.0, 64, 64)
    Theta, T = ann.chart.grid.mesh()
    d = ScalarField(ann.chart.grid, np.where(np.abs(T - 1.0) < 0.1, 0.05, 1.0))
    rep = extremal_length_check(ann, d)
    assert rep.lhs < 0.2 * rep.bound


def test_loop_follows_a_wavy_cheap_channel():
    # the cheap band is not a theta-ring, so the loop must use t and diagonal moves
    ann = flat_annulus(2.0, 64, 64)
    g = ann.chart.grid
    Theta, T = g.mesh()
    d = ScalarField(g, np.where(np.abs(T - 1 - 0.5 * np.sin(Theta)) < 0.15, 0.01, 1.0))
    L = shortest_essential_loop(ann, d)
    assert L < 0.05 * 2 * math.pi
    ring = 0.5 * (d.values[32] + np.roll(d.values[32], -1)).sum() * g.h_theta
    assert L < 0.2 * ring


@pytest.mark.parametrize("M", [0.5, 1.0, 3.0])
def test_flat_extremal_metric(M):
    rep = extremal_length_check(flat_annulus(M, 64, 64))
    assert rep.lhs == pytest.approx(1 / M, rel=0.02)
    assert abs(rep.slack) <= 0.02 * rep.bound


def test_flat_extremal_scaled_to_unit_area():
    # the extremal metric (1 / 2 pi M)(dtheta^2 + dt^2) has area 1 and L^2 / 2pi = 1/M
    M = 1.5
    ann = flat_annulus(M, 64, 64)
    dens = ScalarField.constant(ann.chart.grid, 1 / math.sqrt(2 * math.pi * M))
    rep = extremal_length_check(ann, dens)
    assert rep.area == pytest.approx(1.0, rel=1e-12)
    assert rep.L ** 2 / (2 * math.pi) == pytest.approx(1 / M, rel=0.02)


def test_random_trials_respect_inequality():
    for M in (0.5, 1.0, 3.0):
        for rep in extremal_trials(M, 20, seed=11, n_theta=32, n_t=32):
            assert rep.lhs <= rep.bound * 1.09


def test_chart_sub_annulus():
    chart = flat_chart(32, 0.0, 2.0, 41)
    ann = AnnulusSpec(chart=chart, t1=0.5, t2=1.5)
    grid, rows = ann.sub_grid()
    assert grid.t[0] == pytest.approx(0.5) and grid.t[-1] == pytest.approx(1.5)
    rep = extremal_length_check(ann)
    assert rep.bound == pytest.approx(1.0)


def test_extremal_csv(tmp_path):
    reps = extremal_trials(1.0, 3, seed=2, n_theta=16, n_t=16)
    path = tmp_path / "ext.csv"
    write_extremal_csv(path, reps)
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == EXTREMAL_COLUMNS
    assert len(rows) == 4
