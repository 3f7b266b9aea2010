"""Prescribed negative curvature in a conformal class.

Given a chart with curvature -kappa0 and a target kappa > 0, find u with

    Lap_g u = e^{2u} kappa - kappa0,

so that e^{2u} g has curvature -kappa.  The solve follows the continuity
path kappa_t = (1 - t) kappa0 + t kappa from the trivial solution u = 0 at
t = 0, with a damped Newton correction at each accepted parameter value.
The outer ring (and the inner one of an annulus) carries Dirichlet data, by
default u = -1/2 log(kappa/kappa0), the exact value whenever the ratio is
locally constant.  On a capped disk the innermost ring is an unknown ring,
closed by the harmonic extension into the small cap left out of the chart.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import ConformalChart, laplace_beltrami
from .output import write_csv
from .grid import CAPPED_DISK, ScalarField, cap_ghost_ring, graph_distance, holder_seminorm, laplacian_matrix, lattice_sources

log = logging.getLogger(__name__)

REPORT_COLUMNS = ("t", "newton_iters", "residual_sup", "u_c0", "u_holder_half")


class ProblemError(ValueError):
    """The data violate the hypotheses of the prescription problem."""


class NewtonDidNotConverge(RuntimeError):
    def __init__(self, message, u=None, residual_norm=float("nan"), report=None):
        super().__init__(message)
        self.u = u
        self.residual_norm = residual_norm
        self.report = report


class ContinuationFailed(NewtonDidNotConverge):
    """The continuation step size fell below its floor."""


@dataclass(frozen=True, eq=False)
class PrescriptionProblem:
    chart: ConformalChart
    kappa0: ScalarField
    kappa: ScalarField
    boundary: Optional[ScalarField] = None

    def __post_init__(self):
        g = self.chart.grid
        for name in ("kappa0", "kappa"):
            fld = getattr(self, name)
            if not fld.grid.same_as(g):
                raise ProblemError(f"{name} lives on another grid")
            if not np.min(fld.values) > 0:
                raise ProblemError(f"inf {name} must be positive (got {np.min(fld.values):.3g})")
        if self.boundary is not None:
            if not self.boundary.grid.same_as(g):
                raise ProblemError("boundary data live on another grid")
            if not np.all(np.isfinite(self.boundary.values)):
                raise ProblemError("boundary data must be finite")

    @property
    def grid(self):
        return self.chart.grid

    def kappa_t(self, t: float) -> ScalarField:
        return ScalarField(self.grid, (1 - t) * self.kappa0.values + t * self.kappa.values)

    def boundary_at(self, t: float = 1.0) -> np.ndarray:
        """Dirichlet data along the path: -1/2 log(kappa_t/kappa0), or t * boundary."""
        if self.boundary is None:
            return -0.5 * np.log(self.kappa_t(t).values / self.kappa0.values)
        return t * self.boundary.values

    def with_boundary(self, u: np.ndarray, t: float = 1.0) -> np.ndarray:
        """Copy of ``u`` with the Dirichlet rings overwritten by their data at ``t``."""
        u = np.array(u, dtype=float).reshape(self.grid.shape)
        b = self.boundary_at(t)
        for j in self.grid.dirichlet_rings:
            u[j] = b[j]
        return u


def residual(u: ScalarField, problem: PrescriptionProblem, t: float) -> ScalarField:
    """K_t u = Lap_g u - e^{2u} kappa_t + kappa0 on unknown nodes (Dirichlet rings hold 0)."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    lap = laplace_beltrami(problem.chart, u, cap_closure=True).values
    res = lap - np.exp(2 * u.values) * problem.kappa_t(t).values + problem.kappa0.values
    for j in problem.grid.dirichlet_rings:
        res[j] = 0.0
    return ScalarField(problem.grid, res)


def unknown_rings(grid) -> np.ndarray:
    return np.setdiff1d(np.arange(grid.n_t), grid.dirichlet_rings)


def _interior_index(grid):
    rings = unknown_rings(grid)
    return (rings[:, None] * grid.n_theta + np.arange(grid.n_theta)[None, :]).ravel()


def assemble_linearized(u: ScalarField, kappa_t: ScalarField, chart: ConformalChart) -> sp.csr_matrix:
    """Sparse matrix of v -> Lap_g v - 2 e^{2u} kappa_t v on interior nodes.

    Dirichlet rings are eliminated (v = 0 there), so rows and columns are
    the unknown nodes in flat order.  On a capped disk the innermost ring
    couples to itself through the dense circulant of the cap closure.
    """
    if not np.min(kappa_t.values) > 0:
        raise ProblemError("kappa_t must be positive")
    grid = chart.grid
    inner = _interior_index(grid)
    lap = laplacian_matrix(grid, cap_closure=True)[inner][:, inner]
    inv_lam2 = 1.0 / chart.lam.flat[inner] ** 2
    shift = 2 * np.exp(2 * u.flat[inner]) * kappa_t.flat[inner]
    return (sp.diags(inv_lam2) @ lap - sp.diags(shift)).tocsc()


def _sup(res: ScalarField) -> float:
    return float(np.abs(res.values).max())


def newton_solve(problem: PrescriptionProblem, t: float, u_init: ScalarField | None = None,
                 tol: float = 1e-9, max_iter: int = 30, return_iterations: bool = False):
    """Damped Newton for K_t u = 0 with the problem's Dirichlet rings.

    Each full Newton step is halved until the residual sup-norm decreases.
    Raises :class:`NewtonDidNotConverge` (carrying the last iterate) when
    ``max_iter`` is exhausted or no damped step reduces the residual.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    grid = problem.grid
    u0 = np.zeros(grid.shape) if u_init is None else u_init.values
    u = ScalarField(grid, problem.with_boundary(u0, t))
    kt = problem.kappa_t(t)
    inner = _interior_index(grid)
    res = residual(u, problem, t)
    norm = _sup(res)
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise NewtonDidNotConverge(f"no convergence in {max_iter} iterations "
                                       f"(residual {norm:.3e})", u, norm)
        J = assemble_linearized(u, kt, problem.chart)
        try:
            delta = spla.spsolve(J, -res.flat[inner])
        except RuntimeError as exc:  # singular factor
            raise NewtonDidNotConverge(f"linear solve failed: {exc}", u, norm) from exc
        if not np.all(np.isfinite(delta)):
            raise NewtonDidNotConverge("linear solve produced non-finite update", u, norm)
        step = 1.0
        while True:
            trial = u.flat.copy()
            trial[inner] += step * delta
            with np.errstate(over="ignore", invalid="ignore"):
                ok = np.all(np.isfinite(np.exp(2 * trial)))
            if ok:
                u_new = ScalarField(grid, trial)
                res_new = residual(u_new, problem, t)
                new_norm = _sup(res_new)
                if new_norm < norm:
                    break
            step *= 0.5
            if step < 1e-10:
                raise NewtonDidNotConverge(f"line search stalled at residual {norm:.3e}", u, norm)
        u, res, norm = u_new, res_new, new_norm
        it += 1
    return (u, it) if return_iterations else u


def apriori_c0_bounds(kappa0: ScalarField, kappa: ScalarField) -> tuple[float, float]:
    """Maximum-principle bounds on interior extrema of u.

    At an interior maximum Lap u <= 0 forces e^{2u} kappa <= kappa0, and at an
    interior minimum the reverse, giving
    [1/2 log(inf kappa0 / sup kappa), 1/2 log(sup kappa0 / inf kappa)].
    """
    k0, k = kappa0.values, kappa.values
    if not (k0.min() > 0 and k.min() > 0):
        raise ProblemError("curvature data must be positive")
    return 0.5 * np.log(k0.min() / k.max()), 0.5 * np.log(k0.max() / k.min())


def interior_extrema(u: ScalarField) -> np.ndarray:
    """Values of u at unknown nodes that are >= or <= all four stencil neighbours.

    On a capped disk the innermost ring counts, with its ghost ring below.
    """
    grid = u.grid
    v = u.values
    if grid.topology == CAPPED_DISK:
        v = np.vstack([cap_ghost_ring(v[0], grid)[None, :], v])
    c = v[1:-1]
    nbrs = (v[:-2], v[2:], np.roll(c, 1, axis=1), np.roll(c, -1, axis=1))
    is_max = np.logical_and.reduce([c >= n for n in nbrs])
    is_min = np.logical_and.reduce([c <= n for n in nbrs])
    return c[is_max | is_min]


@dataclass
class StepControl:
    initial: float = 0.25
    min_step: float = 1e-4
    max_step: float = 0.25
    tol: float = 1e-9
    max_newton: int = 30
    holder_sources: int = 16  # sub-lattice points per axis for the Hoelder diagnostic


@dataclass
class ContinuationStep:
    t: float
    newton_iters: int
    residual_sup: float
    u_c0: float
    u_holder_half: float


@dataclass
class ContinuationReport:
    steps: list = field(default_factory=list)
    converged: bool = False
    control: Optional[StepControl] = None
    bounds: Optional[tuple] = None
    bounds_ok: Optional[bool] = None
    rejected_steps: int = 0

    def max_c0(self) -> float:
        return max(s.u_c0 for s in self.steps)

    def max_holder(self) -> float:
        return max(s.u_holder_half for s in self.steps)

    def rows(self):
        return [(s.t, s.newton_iters, s.residual_sup, s.u_c0, s.u_holder_half) for s in self.steps]

    def to_csv(self, path):
        return write_csv(path, REPORT_COLUMNS, self.rows())


def _diagnostics(u: ScalarField, chart: ConformalChart, dist, sources):
    c0 = float(np.abs(u.values).max())
    hold = holder_seminorm(u, chart.grid, 0.5, dist, 1.0, sources)
    return c0, hold


def continuation_solve(problem: PrescriptionProblem, control: StepControl | None = None,
                       diagnostics: bool = True):
    """Follow kappa_t from t = 0 (u = 0) to t = 1.

    Step size starts at ``control.initial``, halves after a Newton failure
    (floor ``min_step``) and doubles after a success (cap ``max_step``).
    When kappa equals kappa0 the path is constant and is taken in one step.
    Returns ``(u, report)``.
    """
    control = control or StepControl()
    chart = problem.chart
    dist = graph_distance(chart.grid, chart.lam) if diagnostics else None
    sources = lattice_sources(chart.grid, control.holder_sources)
    report = ContinuationReport(control=control,
                                bounds=apriori_c0_bounds(problem.kappa0, problem.kappa))

    u = ScalarField.constant(chart.grid, 0.0)
    report.steps.append(ContinuationStep(0.0, 0, _sup(residual(u, problem, 0.0)),
                                         *(_diagnostics(u, chart, dist, sources) if diagnostics
                                           else (0.0, 0.0))))

    t = 0.0
    step = 1.0 if np.array_equal(problem.kappa.values, problem.kappa0.values) else control.initial
    while t < 1.0:
        t_next = min(1.0, t + step)
        try:
            u_next, iters = newton_solve(problem, t_next, u, control.tol, control.max_newton,
                                         return_iterations=True)
        except NewtonDidNotConverge as exc:
            report.rejected_steps += 1
            step *= 0.5
            log.debug("rejected t=%.6g (%s); step -> %.3g", t_next, exc, step)
            if step < control.min_step:
                raise ContinuationFailed(f"step underflow at t={t:.6g}", u, exc.residual_norm,
                                         report) from exc
            continue
        t, u = t_next, u_next
        diag = _diagnostics(u, chart, dist, sources) if diagnostics else (float(np.abs(u.values).max()), 0.0)
        report.steps.append(ContinuationStep(t, iters, _sup(residual(u, problem, t)), *diag))
        step = min(2 * step, control.max_step)

    lo, hi = report.bounds
    ext = interior_extrema(u)
    slack = 10 * chart.grid.h ** 2
    report.bounds_ok = bool(ext.size == 0 or (ext.min() >= lo - slack and ext.max() <= hi + slack))
    report.converged = True
    return u, report

