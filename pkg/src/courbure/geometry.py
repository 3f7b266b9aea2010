"""Rotationally symmetric disks, their conformal charts and curvature.

A disk of revolution carries the metric ``drho^2 + f(rho)^2 dtheta^2``.
With the conformal coordinate ``t(rho) = int_1^rho ds / f(s)`` it becomes
``f(rho(t))^2 (dtheta^2 + dt^2)``, so the conformal factor of the chart is
``lam = f(rho(t))``.

Curvature convention: fields called ``kappa`` store a nonnegative number
whose negative is the Gaussian curvature (kappa = 1 is the hyperbolic plane).
Functions returning a Gaussian curvature ``K`` say so explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

from .grid import CAPPED_DISK, ANNULUS, Grid, ScalarField, laplacian_flat

# innermost ring of a capped disk sits at this fraction of the outer radius
CAP_FRACTION = 0.008

_FD_STEP = 1e-4


class NotConformallyHyperbolic(ValueError):
    """The disk is conformally the plane: its conformal length diverges."""


@dataclass(frozen=True)
class RevolutionProfile:
    """Profile radius ``f`` of the metric ``drho^2 + f(rho)^2 dtheta^2``.

    ``f`` must accept numpy arrays.  Missing derivatives fall back to central
    finite differences.  ``breakpoints`` lists radii where ``f`` is only
    finitely smooth; quadratures split there.
    """

    f: Callable
    f_prime: Optional[Callable] = None
    f_second: Optional[Callable] = None
    rho_max: float = math.inf
    name: str = "profile"
    breakpoints: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.rho_max > 0:
            raise ValueError("rho_max must be positive")

    def df(self, rho):
        if self.f_prime is not None:
            return self.f_prime(rho)
        h = _FD_STEP * np.maximum(1.0, np.abs(rho))
        return (self.f(rho + h) - self.f(rho - h)) / (2 * h)

    def d2f(self, rho):
        if self.f_second is not None:
            return self.f_second(rho)
        h = _FD_STEP * np.maximum(1.0, np.abs(rho))
        return (self.f(rho + h) - 2 * self.f(rho) + self.f(rho - h)) / h ** 2

    def in_domain(self, rho) -> bool:
        return 0.0 < rho < self.rho_max


def hyperbolic_profile(rho_max: float = math.inf) -> RevolutionProfile:
    return RevolutionProfile(np.sinh, np.cosh, np.sinh, rho_max, "hyperbolic")


def euclidean_profile(rho_max: float = math.inf) -> RevolutionProfile:
    return RevolutionProfile(lambda s: np.asarray(s, dtype=float) * 1.0,
                             lambda s: np.ones_like(np.asarray(s, dtype=float)),
                             lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                             rho_max, "euclidean")


def sphere_cap_profile(rho_max: float = 2.0) -> RevolutionProfile:
    if not 0 < rho_max < math.pi:
        raise ValueError("a sphere cap needs 0 < rho_max < pi")
    return RevolutionProfile(np.sin, np.cos, lambda s: -np.sin(s), rho_max, "sphere-cap")


def _smoothstep(x):
    return x ** 3 * (10 - 15 * x + 6 * x ** 2)


def _smoothstep_d1(x):
    return 30 * x ** 2 * (1 - x) ** 2


def _smoothstep_d2(x):
    return 60 * x * (1 - x) * (1 - 2 * x)


def build_dr_profile(r: float, collar: float = 1.0) -> RevolutionProfile:
    """Hyperbolic cap of radius r glued to a flat cylinder of height r*sinh(r).

    Arclength parametrised: ``f = sinh`` up to ``r - collar``, a quintic
    smoothstep blend from ``sinh`` to the constant ``sinh(r)`` on
    ``[r - collar, r]`` (C^2 at both ends, nondecreasing), then ``sinh(r)``
    for a length ``r*sinh(r)``.  The cylinder's conformal length is exactly r.
    The outer end is left open; completing the metric there would not change
    any conformal quantity computed here.
    """
    if r < 2:
        raise ValueError("D_r needs r >= 2")
    if not 0 < collar <= 1:
        raise ValueError("collar must lie in (0, 1]")
    a = r - collar
    height = r * math.sinh(r)
    sr = math.sinh(r)

    def parts(s):
        s = np.asarray(s, dtype=float)
        x = np.clip((s - a) / collar, 0.0, 1.0)
        return s, x

    def f(s):
        s, x = parts(s)
        S = _smoothstep(x)
        return np.where(s >= r, sr, np.sinh(np.minimum(s, r)) * (1 - S) + sr * S)

    def fp(s):
        s, x = parts(s)
        S, S1 = _smoothstep(x), _smoothstep_d1(x) / collar
        sm = np.minimum(s, r)
        return np.where(s >= r, 0.0, np.cosh(sm) * (1 - S) + (sr - np.sinh(sm)) * S1)

    def fpp(s):
        s, x = parts(s)
        S = _smoothstep(x)
        S1 = _smoothstep_d1(x) / collar
        S2 = _smoothstep_d2(x) / collar ** 2
        sm = np.minimum(s, r)
        return np.where(s >= r, 0.0,
                        np.sinh(sm) * (1 - S) - 2 * np.cosh(sm) * S1 + (sr - np.sinh(sm)) * S2)

    return RevolutionProfile(f, fp, fpp, r + height, f"dr({r:g},{collar:g})", (a, r),
                             {"r": float(r), "collar": float(collar), "cylinder_start": float(r),
                              "cylinder_height": height})


def profile_preset(name: str, **params) -> RevolutionProfile:
    """Look up a named profile: hyperbolic, euclidean, sphere-cap, dr."""
    if name == "hyperbolic":
        return hyperbolic_profile(params.get("rho_max", math.inf))
    if name == "euclidean":
        return euclidean_profile(params.get("rho_max", math.inf))
    if name == "sphere-cap":
        return sphere_cap_profile(params.get("rho_max", 2.0))
    if name == "dr":
        return build_dr_profile(params.get("r", 4.0), params.get("collar", 1.0))
    raise KeyError(f"unknown profile preset {name!r}")


def _integrate_pieces(fn, a: float, b: float, points=()) -> float:
    """int_a^b fn, split at fixed breakpoints so repeated calls share pieces."""
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    cuts = [a] + [p for p in sorted(points) if a < p < b] + [b]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _ = quad(fn, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
        total += val
    return sign * total


def _inv_f(profile: RevolutionProfile):
    def inv(s):
        with np.errstate(over="ignore"):
            return 1.0 / float(profile.f(s))
    return inv


def conformal_coordinate(profile: RevolutionProfile, rho: float) -> float:
    """t(rho) = int_1^rho ds / f(s), by adaptive quadrature."""
    if not profile.in_domain(rho):
        raise ValueError(f"rho={rho} outside (0, {profile.rho_max})")
    return _integrate_pieces(_inv_f(profile), 1.0, rho, profile.breakpoints)


def gaussian_curvature_profile(profile: RevolutionProfile) -> Callable:
    """Return rho -> K(rho) = -f''(rho)/f(rho).

    At rho = 0 the limit -f'''(0) is used, with f''' taken by a one-sided
    difference of f''.
    """
    h = _FD_STEP

    def K(rho):
        rho = np.asarray(rho, dtype=float)
        safe = np.where(rho > 0, rho, 1.0)
        val = -profile.d2f(safe) / profile.f(safe)
        if np.any(rho <= 0):
            d3 = (-3 * profile.d2f(0.0) + 4 * profile.d2f(h) - profile.d2f(2 * h)) / (2 * h)
            val = np.where(rho > 0, val, -d3)
        return val if val.ndim else float(val)

    return K


@dataclass(frozen=True, eq=False)
class ConformalChart:
    """Lattice plus conformal factor: the metric is lam^2 (dtheta^2 + dt^2)."""

    grid: Grid
    lam: ScalarField
    profile: Optional[RevolutionProfile] = None
    rho: Optional[np.ndarray] = None  # geodesic radius of each ring, profile charts only

    def __post_init__(self):
        if not self.lam.grid.same_as(self.grid):
            raise ValueError("conformal factor lives on another grid")
        if np.any(self.lam.values <= 0):
            raise ValueError("conformal factor must be positive")

    @property
    def is_capped(self) -> bool:
        return self.grid.topology == CAPPED_DISK

    @property
    def rho_inner(self) -> Optional[float]:
        return None if self.rho is None else float(self.rho[0])

    def area_weights(self) -> ScalarField:
        return ScalarField(self.grid, self.lam.values ** 2)

    def rescaled(self, u: ScalarField) -> "ConformalChart":
        """Chart of the metric e^{2u} g on the same lattice."""
        return ConformalChart(self.grid, ScalarField(self.grid, self.lam.values * np.exp(u.values)),
                              None, self.rho)


def flat_chart(n_theta: int, t_min: float, t_max: float, n_t: int) -> ConformalChart:
    """The flat cylinder S^1 x [t_min, t_max] (lam = 1)."""
    grid = Grid.uniform(n_theta, t_min, t_max, n_t, ANNULUS)
    return ConformalChart(grid, ScalarField.constant(grid, 1.0))


def _rho_of_t(profile: RevolutionProfile, t_values: np.ndarray) -> np.ndarray:
    """Invert t(rho) by integrating d rho/dt = f(rho) from rho(0) = 1."""
    rhs = lambda t, y: np.atleast_1d(profile.f(y[0]))
    t_values = np.asarray(t_values, dtype=float)
    out = np.ones_like(t_values)
    for side, order in ((t_values > 0, 1), (t_values < 0, -1)):
        ts = np.sort(t_values[side])[::order]
        if ts.size == 0:
            continue
        sol = solve_ivp(rhs, (0.0, ts[-1]), [1.0], method="DOP853", t_eval=ts,
                        rtol=1e-13, atol=1e-14)
        if not sol.success:
            raise RuntimeError(f"conformal inversion failed: {sol.message}")
        out[side] = np.interp(t_values[side], ts[::order], sol.y[0][::order])
    return out


def chart_from_profile(profile: RevolutionProfile, rho_outer: float, n_theta: int, n_t: int,
                       rho_inner: Optional[float] = None) -> ConformalChart:
    """Conformal chart of the annulus rho_inner <= rho <= rho_outer.

    Without ``rho_inner`` the chart is a capped disk truncated at
    ``CAP_FRACTION * rho_outer``; the small cap it leaves out is handled
    analytically by callers that need it.
    """
    topology = ANNULUS
    if rho_inner is None:
        rho_inner = CAP_FRACTION * rho_outer
        topology = CAPPED_DISK
    if not (0 < rho_inner < rho_outer <= profile.rho_max):
        raise ValueError("need 0 < rho_inner < rho_outer <= rho_max")
    t_lo = _integrate_pieces(_inv_f(profile), 1.0, rho_inner, profile.breakpoints)
    t_hi = _integrate_pieces(_inv_f(profile), 1.0, rho_outer, profile.breakpoints)
    grid = Grid.uniform(n_theta, t_lo, t_hi, n_t, topology)
    rho = _rho_of_t(profile, grid.t)
    rho[0], rho[-1] = rho_inner, rho_outer
    lam = np.repeat(np.asarray(profile.f(rho), dtype=float)[:, None], n_theta, axis=1)
    return ConformalChart(grid, ScalarField(grid, lam), profile, rho)


def poincare_cap_chart(R: float, n_theta: int, n_t: int):
    """Hyperbolic disk of radius R as a capped-disk chart, with kappa0 = 1."""
    if not R > 0:
        raise ValueError("R must be positive")
    chart = chart_from_profile(hyperbolic_profile(), R, n_theta, n_t)
    return chart, ScalarField.constant(chart.grid, 1.0)


def laplace_beltrami(chart: ConformalChart, field: ScalarField, order: int = 2,
                     cap_closure: bool = False) -> ScalarField:
    """Laplace-Beltrami operator of lam^2 (dtheta^2 + dt^2): lam^-2 times the flat one."""
    flat = laplacian_flat(field, chart.grid, order, cap_closure)
    return ScalarField(chart.grid, flat.values / chart.lam.values ** 2)


def gaussian_curvature_chart(chart: ConformalChart, order: int = 2) -> ScalarField:
    """Gaussian curvature K = -lam^-2 * flat Laplacian of log lam (interior rings)."""
    lam = chart.lam.values
    if np.any(lam <= 0):
        raise ValueError("conformal factor must be positive")
    return ScalarField(chart.grid, -laplace_beltrami(chart, ScalarField(chart.grid, np.log(lam)),
                                                   order).values)


def conformal_change_curvature(kappa0: ScalarField, u: ScalarField, chart: ConformalChart,
                               order: int = 2) -> ScalarField:
    """kappa of e^{2u} g given kappa0 of g:  -kappa = e^{-2u} (-kappa0 - Lap_g u).

    Values are meaningful on the rings where the stencil of ``order`` is
    defined; the outer rings hold 0.
    """
    lap = laplace_beltrami(chart, u, order).values
    kappa = np.exp(-2 * u.values) * (kappa0.values + lap)
    width = 1 if order == 2 else 2
    kappa[:width] = 0.0
    kappa[-width:] = 0.0
    return ScalarField(chart.grid, kappa)


@dataclass(frozen=True)
class UniformizationData:
    """Rotationally symmetric uniformisation by the unit disk.

    The point at radius rho maps to |z| = exp(t(rho) - T); near the centre
    this is |z| ~ rho / conformal_radius.
    """

    T: float
    c0: float
    conformal_radius: float
    profile: RevolutionProfile

    def radius_map(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = np.empty(rho.shape)
        for k, r in np.ndenumerate(rho):
            if r <= 0:
                out[k] = 0.0
            elif r >= self.profile.rho_max:
                out[k] = 1.0
            else:
                out[k] = math.exp(conformal_coordinate(self.profile, float(r)) - self.T)
        return out if out.ndim else float(out)


def _total_conformal_length(profile: RevolutionProfile, max_doublings: int = 80) -> float:
    if math.isfinite(profile.rho_max):
        return _integrate_pieces(_inv_f(profile), 1.0, profile.rho_max, profile.breakpoints)
    inv = _inv_f(profile)
    last_finite = max(profile.breakpoints, default=1.0)
    total = _integrate_pieces(inv, 1.0, max(2.0, last_finite), profile.breakpoints)
    lo = max(2.0, last_finite)
    with np.errstate(over="ignore"):
        for _ in range(max_doublings):
            piece, _ = quad(inv, lo, 2 * lo, epsabs=1e-15, epsrel=1e-13, limit=200)
            total += piece
            lo *= 2
            if abs(piece) <= 1e-15 * max(1.0, abs(total)):
                return total
    raise NotConformallyHyperbolic(
        f"{profile.name}: conformal length diverges; the disk is not conformally hyperbolic")


def _center_offset(profile: RevolutionProfile, tol: float = 1e-9, kmax: int = 20) -> float:
    """lim_{rho->0} t(rho) - log(rho), Richardson-extrapolated over rho = 2^-k."""
    inv = _inv_f(profile)

    def g(rho):
        # t(rho) - log(rho) = -int_rho^1 (1/f(s) - 1/s) ds
        return -_integrate_pieces(lambda s: inv(s) - 1.0 / s, rho, 1.0, profile.breakpoints)

    prev_g = g(0.5)
    prev_rich = None
    rich = prev_g
    for k in range(2, kmax + 1):
        cur = g(2.0 ** -k)
        rich = (4 * cur - prev_g) / 3  # error is O(rho^2) for smooth caps
        if prev_rich is not None and abs(rich - prev_rich) < tol:
            return rich
        prev_g, prev_rich = cur, rich
    return rich


def uniformize_revolution(profile: RevolutionProfile) -> UniformizationData:
    """Uniformise a disk of revolution by the unit disk.

    Raises :class:`NotConformallyHyperbolic` when the total conformal length
    diverges (e.g. the complete Euclidean plane).
    """
    T = _total_conformal_length(profile)
    c0 = _center_offset(profile)
    return UniformizationData(T, c0, math.exp(T - c0), profile)
