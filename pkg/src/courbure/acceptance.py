"""End-to-end acceptance checks, numbered 1 to 12.

Each ``criterion_N`` returns a :class:`CriterionResult`; ``run_all`` runs
them in order.  Solves shared between criteria 2 to 5 are cached.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad, trapezoid

from .geometry import (build_dr_profile, chart_from_profile, conformal_change_curvature,
                       gaussian_curvature_chart, gaussian_curvature_profile, hyperbolic_profile,
                       poincare_cap_chart, sphere_cap_profile, uniformize_revolution)
from .grid import ScalarField
from .modulus import (METRICATION_BOUND, extremal_length_check, extremal_trials, flat_annulus,
                      modulus_revolution, monotonicity_check)
from .quasimax import random_trials
from .revolution_lab import derivative_at_center, dr_sweep, sweep_claims
from .solver import (PrescriptionProblem, apriori_c0_bounds, continuation_solve, interior_extrema,
                     newton_solve)

RESOLUTIONS = (64, 128, 256)
CAP_RADIUS = 4.0
TOL = 1e-9


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number: int, name: str):
    def wrap(fn: Callable[[], tuple[bool, str]]):
        def run() -> CriterionResult:
            start = time.perf_counter()
            ok, detail = fn()
            return CriterionResult(number, name, bool(ok), detail, time.perf_counter() - start)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


def sech_target(grid) -> ScalarField:
    return ScalarField.from_function(grid, lambda th, t: 1 + 0.5 * np.sin(th) / np.cosh(t))


def sandwich_ok(u: ScalarField, problem: PrescriptionProblem) -> bool:
    lo, hi = apriori_c0_bounds(problem.kappa0, problem.kappa)
    ext = interior_extrema(u)
    slack = 10 * u.grid.h ** 2
    return ext.size == 0 or bool(ext.min() >= lo - slack and ext.max() <= hi + slack)


@lru_cache(maxsize=None)
def sech_solve(n: int):
    """Criterion-2 problem at resolution n: (problem, u, report, seconds)."""
    start = time.perf_counter()
    chart, kappa0 = poincare_cap_chart(CAP_RADIUS, n, n)
    problem = PrescriptionProblem(chart, kappa0, sech_target(chart.grid))
    u, report = continuation_solve(problem)
    return problem, u, report, time.perf_counter() - start


def roundtrip_error(problem: PrescriptionProblem, u: ScalarField) -> float:
    """Interior sup error of the recomputed curvature, two rings dropped at each end.

    The recompute uses the fourth-order stencil so the measured error is
    the solver's and not the checker's.
    """
    rec = conformal_change_curvature(problem.kappa0, u, problem.chart, order=4)
    return float(np.abs(rec.values - problem.kappa.values)[2:-2].max())


@_timed(1, "constant-ratio exactness")
def criterion_1():
    worst, slowest, bounds = 0.0, 0.0, True
    for c in (0.25, 1.0, 4.0):
        start = time.perf_counter()
        chart, kappa0 = poincare_cap_chart(CAP_RADIUS, 128, 128)
        problem = PrescriptionProblem(chart, kappa0, ScalarField.constant(chart.grid, c))
        u, report = continuation_solve(problem)
        slowest = max(slowest, time.perf_counter() - start)
        worst = max(worst, float(np.abs(u.values + 0.5 * math.log(c)).max()))
        bounds &= bool(report.bounds_ok)
    ok = worst <= 1e-8 and slowest <= 10.0 and bounds
    return ok, f"sup error {worst:.2e} (<= 1e-8), slowest case {slowest:.1f}s (<= 10s)"


@_timed(2, "curvature round-trip convergence")
def criterion_2():
    errs = [roundtrip_error(*sech_solve(n)[:2]) for n in RESOLUTIONS]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    total = sum(sech_solve(n)[3] for n in RESOLUTIONS)
    ok = all(r >= 3.5 for r in ratios) and total <= 120.0
    return ok, (f"E = {', '.join(f'{e:.3e}' for e in errs)}; ratios "
                f"{', '.join(f'{r:.2f}' for r in ratios)} (>= 3.5); solves {total:.1f}s (<= 120s)")


def random_smooth_field(grid, rng, amplitude=0.5, modes=3) -> ScalarField:
    Theta, T = grid.mesh()
    s = (T - grid.t[0]) / (grid.t[-1] - grid.t[0])
    v = np.zeros(grid.shape)
    for k in range(modes):
        v += rng.uniform(-1, 1) * np.cos(k * Theta + rng.uniform(0, 2 * np.pi)) * \
            np.cos(np.pi * (k + 1) * s + rng.uniform(0, 2 * np.pi))
    return ScalarField(grid, amplitude * v / modes)


@_timed(3, "uniqueness from random starts")
def criterion_3():
    problem, u_ref, _, _ = sech_solve(RESOLUTIONS[0])
    rng = np.random.default_rng(20261015)
    gaps = []
    for _ in range(3):
        start = random_smooth_field(problem.grid, rng)
        u = newton_solve(problem, 1.0, start, tol=TOL, max_iter=60)
        gaps.append(float(np.abs(u.values - u_ref.values).max()))
    return max(gaps) <= 10 * TOL, f"max gap to continuation solution {max(gaps):.2e} (<= {10 * TOL:.0e})"


@_timed(4, "maximum-principle sandwich")
def criterion_4():
    checked, failed = 0, []
    for n in RESOLUTIONS:
        problem, u, report, _ = sech_solve(n)
        checked += 1
        if not (report.bounds_ok and sandwich_ok(u, problem)):
            failed.append(f"sech n={n}")
    for c in (0.25, 4.0):
        chart, kappa0 = poincare_cap_chart(CAP_RADIUS, 64, 64)
        problem = PrescriptionProblem(chart, kappa0, ScalarField.constant(chart.grid, c))
        u, report = continuation_solve(problem, diagnostics=False)
        checked += 1
        if not (report.bounds_ok and sandwich_ok(u, problem)):
            failed.append(f"c={c}")
    return not failed, f"{checked - len(failed)}/{checked} runs inside the a-priori bounds"


@_timed(5, "homotopy-uniform C0 and Hoelder bounds")
def criterion_5():
    c0 = [sech_solve(n)[2].max_c0() for n in RESOLUTIONS]
    hold = [sech_solve(n)[2].max_holder() for n in RESOLUTIONS]
    spread_c0 = (max(c0) - min(c0)) / min(c0)
    spread_h = (max(hold) - min(hold)) / min(hold)
    ok = spread_c0 <= 0.05 and spread_h <= 0.05
    return ok, f"C0 spread {100 * spread_c0:.2f}%, Hoelder-1/2 spread {100 * spread_h:.2f}% (<= 5%)"


@_timed(6, "cylinder modulus equals r")
def criterion_6():
    errs = []
    for r in (3, 4, 5, 6):
        p = build_dr_profile(r)
        errs.append(abs(modulus_revolution(p, p.params["cylinder_start"], p.rho_max) - r))
    return max(errs) <= 1e-10, f"max |M - r| {max(errs):.2e} (<= 1e-10)"


@_timed(7, "D_r discontinuity example")
def criterion_7():
    start = time.perf_counter()
    reports = dr_sweep([3, 4, 5, 6])
    elapsed = time.perf_counter() - start
    claims = sweep_claims(reports)
    wanted = ("cylinder_image_radius", "inner_ball_confined", "derivative_lower_bound",
              "derivative_increasing")
    ok = all(claims[k] for k in wanted) and elapsed <= 5.0
    worst = max(abs(rep.inner_radius_Cr - rep.e_minus_r) for rep in reports)
    norms = ", ".join(f"{rep.deriv_norm:.4g}" for rep in reports)
    failed = [k for k in wanted if not claims[k]]
    return ok, (f"radius error {worst:.1e}; deriv norms {norms}; "
                f"{'all claims hold' if not failed else 'failed: ' + ','.join(failed)}")


@_timed(8, "hyperbolic sanity")
def criterion_8():
    norm = derivative_at_center(uniformize_revolution(hyperbolic_profile(30.0)))
    return abs(norm - 1) <= 1e-6, f"derivative norm {norm:.12f} (1 +- 1e-6)"


@_timed(9, "extremal length on flat cylinders")
def criterion_9():
    worst_eq, worst_excess = 0.0, -math.inf
    for M in (0.5, 1.0, 3.0):
        rep = extremal_length_check(flat_annulus(M, 256, 256))
        worst_eq = max(worst_eq, abs(rep.lhs - rep.bound) / rep.bound)
        for trial in extremal_trials(M, 20, seed=int(100 * M)):
            worst_excess = max(worst_excess, trial.rel_excess)
    ok = worst_eq <= 0.02 and worst_excess <= 0.09
    return ok, (f"flat metric deviation {100 * worst_eq:.2e}% (<= 2%); worst random excess "
                f"{100 * worst_excess:.1f}% (<= 9%, lattice budget {100 * METRICATION_BOUND:.1f}%)")


@_timed(10, "modulus monotonicity and additivity")
def criterion_10():
    rng = np.random.default_rng(7)
    profiles = (hyperbolic_profile(), build_dr_profile(4.0), sphere_cap_profile(2.0))
    mono_fail, add_err = 0, 0.0
    for k in range(100):
        p = profiles[k % len(profiles)]
        hi = min(p.rho_max, 12.0)
        a2, a1, b1, b2 = np.sort(rng.uniform(1e-3, hi, 4))
        if not monotonicity_check(p, (a1, b1), (a2, b2)):
            mono_fail += 1
        a, b, c = np.sort(rng.uniform(1e-3, hi, 3))
        whole = modulus_revolution(p, a, c)
        add_err = max(add_err, abs(whole - modulus_revolution(p, a, b) - modulus_revolution(p, b, c)))
    ok = mono_fail == 0 and add_err <= 1e-10
    return ok, f"{100 - mono_fail}/100 nested pairs ordered; additivity error {add_err:.1e} (<= 1e-10)"


GB_FRACTIONS = (0.2, 0.35, 0.5, 0.65, 0.8)


def gauss_bonnet_defects(profile, rho_outer: float, n_t: int, n_theta: int = 16) -> tuple[np.ndarray, float]:
    """2 pi - (int_{B_rho} K dA + 2 pi f'(rho)) at five sampled rings.

    The small cap inside ring 1 is integrated exactly in rho; the rest uses
    the chart's finite-difference curvature and the trapezoid rule in t.
    """
    chart = chart_from_profile(profile, rho_outer, n_theta, n_t)
    K = gaussian_curvature_chart(chart).values[:, 0]
    area = chart.lam.values[:, 0] ** 2
    K_exact = gaussian_curvature_profile(profile)
    cap = 2 * math.pi * quad(lambda s: K_exact(s) * profile.f(s), 0.0, chart.rho[1],
                             epsabs=1e-13, epsrel=1e-13)[0]
    t = chart.grid.t
    out = []
    for frac in GB_FRACTIONS:
        j = int(round(frac * (n_t - 1)))
        total = cap + 2 * math.pi * trapezoid(K[1:j + 1] * area[1:j + 1], t[1:j + 1])
        out.append(2 * math.pi - total - 2 * math.pi * float(profile.df(chart.rho[j])))
    return np.array(out), chart.grid.h_t


@_timed(11, "discrete Gauss-Bonnet")
def criterion_11():
    cases = (("sinh", hyperbolic_profile(), 3.0), ("sin", sphere_cap_profile(2.0), 2.0),
             ("D_3", build_dr_profile(3.0), 4.0))
    parts, ok = [], True
    for name, p, rho_out in cases:
        coarse, _ = gauss_bonnet_defects(p, rho_out, 128)
        fine, h = gauss_bonnet_defects(p, rho_out, 256)
        e1, e2 = np.abs(coarse).max(), np.abs(fine).max()
        ok &= bool(e2 <= 10 * h ** 2 and e1 / e2 >= 3.5)
        parts.append(f"{name} {e2:.1e} (ratio {e1 / e2:.2f})")
    return ok, "; ".join(parts) + " (<= 10 h_t^2, ratio >= 3.5)"


@_timed(12, "quasi-maximum search")
def criterion_12():
    summary = random_trials(1000, seed=12)
    return summary.ok, f"{summary.passed}/{summary.trials} trials pass the exhaustive check"


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12)


def run_all(echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        res = crit()
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
