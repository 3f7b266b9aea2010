"""Conformal modulus of annuli and extremal-length experiments.

Normalisation: the flat cylinder S^1 x (0, M) with circumference 2*pi has
modulus M (Ahlfors' modulus divided by 2*pi), so that

    1 / M(A) = sup over unit-area conformal metrics of L(A, g)^2 / (2*pi),

where L is the length of the shortest essential loop.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .geometry import RevolutionProfile, _integrate_pieces, _inv_f, flat_chart
from .grid import ANNULUS, Grid, ScalarField, integrate

EXTREMAL_COLUMNS = ("trial_id", "L", "area", "lhs", "bound", "slack")

# worst-case overestimate of Euclidean length by 8-neighbour lattice paths
METRICATION_BOUND = math.sqrt(4 - 2 * math.sqrt(2)) - 1


@dataclass(frozen=True, eq=False)
class AnnulusSpec:
    """A revolution annulus (profile, rho1, rho2) or a chart sub-annulus (chart, t1, t2).

    ``density`` is an optional conformal density on the chart lattice for
    extremal-length experiments; it never enters the modulus itself.
    """

    profile: Optional[RevolutionProfile] = None
    rho1: float = 0.0
    rho2: float = 0.0
    chart: Optional[ConformalChart] = None
    t1: float = 0.0
    t2: float = 0.0
    density: Optional[ScalarField] = None

    def __post_init__(self):
        if (self.profile is None) == (self.chart is None):
            raise ValueError("give exactly one of profile or chart")
        if self.profile is not None:
            if not (0 < self.rho1 <= self.rho2 <= self.profile.rho_max):
                raise ValueError("need 0 < rho1 <= rho2 <= rho_max")
        else:
            t = self.chart.grid.t
            if not (t[0] <= self.t1 < self.t2 <= t[-1]):
                raise ValueError("t1 < t2 must lie inside the chart")

    def modulus(self) -> float:
        if self.profile is not None:
            return modulus_revolution(self.profile, self.rho1, self.rho2)
        return self.t2 - self.t1

    def sub_grid(self) -> tuple[Grid, np.ndarray]:
        """Lattice rings within [t1, t2] and their indices in the chart."""
        t = self.chart.grid.t
        tol = 1e-9 * self.chart.grid.h_t
        rows = np.flatnonzero((t >= self.t1 - tol) & (t <= self.t2 + tol))
        return Grid(self.chart.grid.n_theta, t[rows]), rows


def flat_annulus(M: float, n_theta: int = 256, n_t: int = 256) -> AnnulusSpec:
    """S^1 x [0, M] with the flat product metric."""
    chart = flat_chart(n_theta, 0.0, M, n_t)
    return AnnulusSpec(chart=chart, t1=0.0, t2=M)


def modulus_revolution(profile: RevolutionProfile, rho1: float, rho2: float) -> float:
    """M = int_{rho1}^{rho2} d rho / f(rho): conformal length of the annulus rho1 < rho < rho2."""
    if not (0 < rho1 <= rho2 <= profile.rho_max):
        raise ValueError(f"[{rho1}, {rho2}] is not an annulus of {profile.name}")
    return _integrate_pieces(_inv_f(profile), rho1, rho2, profile.breakpoints)


def _unrolled_graph(grid: Grid, density: np.ndarray):
    """8-neighbour graph on the annulus cut open along theta = 0.

    Column n_theta is a twin of column 0.  Returns the sparse graph and the
    node index function idx(j, i) for ring j, column i in 0..n_theta.
    """
    n_t, m = grid.n_t, grid.n_theta
    cols = m + 1
    rho = np.concatenate([density, density[:, :1]], axis=1)
    idx = np.arange(n_t * cols).reshape(n_t, cols)
    ht, hth = grid.h_t, grid.h_theta
    diag = math.hypot(ht, hth)
    pieces = [
        (idx[:, :-1], idx[:, 1:], rho[:, :-1], rho[:, 1:], hth),
        (idx[:-1, :], idx[1:, :], rho[:-1, :], rho[1:, :], ht),
        (idx[:-1, :-1], idx[1:, 1:], rho[:-1, :-1], rho[1:, 1:], diag),
        (idx[1:, :-1], idx[:-1, 1:], rho[1:, :-1], rho[:-1, 1:], diag),
    ]
    a = np.concatenate([p[0].ravel() for p in pieces])
    b = np.concatenate([p[1].ravel() for p in pieces])
    w = np.concatenate([(0.5 * (p[2] + p[3]) * p[4]).ravel() for p in pieces])
    n = n_t * cols
    return sp.csr_matrix((w, (a, b)), shape=(n, n)), idx


def _loop_length(grid: Grid, dens: np.ndarray, chunk: int) -> float:
    if np.any(dens <= 0):
        raise ValueError("density must be positive")
    graph, idx = _unrolled_graph(grid, dens)
    starts, ends = idx[:, 0], idx[:, -1]
    best = math.inf
    for k in range(0, starts.size, chunk):
        d = dijkstra(graph, directed=False, indices=starts[k:k + chunk])
        lengths = d[np.arange(d.shape[0]), ends[k:k + chunk]]
        best = min(best, float(lengths.min()))
    return best


def _restrict(annulus, density: Optional[ScalarField]):
    if isinstance(annulus, AnnulusSpec):
        if annulus.chart is None:
            raise ValueError("loop lengths need a chart annulus")
        grid, rows = annulus.sub_grid()
        density = annulus.density if density is None else density
        dens = np.ones(grid.shape) if density is None else density.values[rows]
    else:
        grid = annulus.grid
        dens = np.ones(grid.shape) if density is None else density.values
    if grid.topology != ANNULUS:
        raise ValueError("essential loops need annulus topology")
    return grid, dens


def shortest_essential_loop(annulus, density: Optional[ScalarField] = None,
                            chunk: int = 32) -> float:
    """Length of the shortest loop winding once around the annulus.

    ``annulus`` is an :class:`AnnulusSpec` or a chart.  The metric is
    ``density^2 (dtheta^2 + dt^2)``.  The annulus is cut along theta = 0 and,
    for every cut node, the shortest 8-neighbour lattice path to its twin is
    found; edge weights are the mean density of the two endpoints times the
    coordinate edge length.  The minimum over cut nodes is returned.
    """
    grid, dens = _restrict(annulus, density)
    return _loop_length(grid, dens, chunk)


@dataclass
class ExtremalReport:
    L: float
    area: float
    lhs: float
    bound: float
    slack: float

    @property
    def rel_excess(self) -> float:
        """(lhs - bound) / bound; positive means the inequality looks violated."""
        return (self.lhs - self.bound) / self.bound


def extremal_length_check(annulus: AnnulusSpec, density: Optional[ScalarField] = None,
                          tolerance: float = 0.09) -> ExtremalReport:
    """Compare L^2 / (2 pi area) for a conformal density with 1 / M.

    ``L`` and ``area`` refer to the metric ``density^2 (dtheta^2 + dt^2)``;
    ``slack = bound - lhs``.  Raises ``AssertionError`` if lhs exceeds the
    bound by more than the relative ``tolerance``.
    """
    grid, dens = _restrict(annulus, density)
    area = integrate(ScalarField(grid, dens ** 2))
    # normalise to area 1 before measuring loops
    L1 = _loop_length(grid, dens / math.sqrt(area), 32)
    lhs = L1 ** 2 / (2 * math.pi)
    bound = 1.0 / float(grid.t[-1] - grid.t[0])
    assert lhs <= bound * (1 + tolerance), f"extremal length bound violated: {lhs} > {bound}"
    return ExtremalReport(L1 * math.sqrt(area), area, lhs, bound, bound - lhs)


def monotonicity_check(profile: RevolutionProfile, inner: tuple, outer: tuple) -> bool:
    """True when M(inner) <= M(outer) + 1e-12 for nested intervals of radii.

    Identical intervals must give bit-equal moduli; distinct ones must not
    compare equal.
    """
    (a1, b1), (a2, b2) = inner, outer
    if not (a2 <= a1 <= b1 <= b2):
        raise ValueError(f"[{a1}, {b1}] is not nested in [{a2}, {b2}]")
    m1 = modulus_revolution(profile, a1, b1)
    m2 = modulus_revolution(profile, a2, b2)
    if (a1, b1) == (a2, b2):
        return m1 == m2
    return m1 <= m2 + 1e-12


def random_density(grid: Grid, rng: np.random.Generator, modes: int = 4,
                   amplitude: float = 1.0, roughness: float = 0.2) -> ScalarField:
    """A positive random density: exp of a random trigonometric field plus node noise."""
    Theta, T = grid.mesh()
    s = (T - grid.t[0]) / (grid.t[-1] - grid.t[0])
    logd = np.zeros(grid.shape)
    for _ in range(modes):
        k, l = rng.integers(0, 4, size=2)
        phase = rng.uniform(0, 2 * np.pi, size=2)
        logd += rng.normal(0, amplitude / modes ** 0.5) * \
            np.cos(k * Theta + phase[0]) * np.cos(np.pi * l * s + phase[1])
    logd += roughness * rng.normal(size=grid.shape)
    return ScalarField(grid, np.exp(logd))


def extremal_trials(M: float, n_trials: int, seed: int, n_theta: int = 64, n_t: int = 64):
    """Random-density extremal-length trials on S^1 x (0, M); returns a list of ExtremalReport."""
    rng = np.random.default_rng(seed)
    ann = flat_annulus(M, n_theta, n_t)
    out = []
    for _ in range(n_trials):
        dens = random_density(ann.chart.grid, rng)
        out.append(extremal_length_check(ann, dens))
    return out


def write_extremal_csv(path, reports):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EXTREMAL_COLUMNS)
        for i, r in enumerate(reports):
            w.writerow([i] + [f"{x:.15e}" for x in (r.L, r.area, r.lhs, r.bound, r.slack)])
