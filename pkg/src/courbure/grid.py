"""Periodic conformal lattices and the discrete operators living on them.

Nodes are stored ring by ring: ``values[j, i]`` is the value at height
``t[j]`` and angle ``theta[i] = 2*pi*i/n_theta``.  The flat index of a node
is ``j * n_theta + i``, which is also the lexicographic order used wherever
ties need breaking.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import trapezoid
from scipy.sparse.csgraph import dijkstra

ANNULUS = "annulus"
CAPPED_DISK = "capped-disk"

MIN_THETA_NODES = 8


class GridError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Grid:
    """Product lattice S^1 x [t_0, t_last] with uniform spacing in both directions.

    For ``CAPPED_DISK`` topology the innermost ring stands in for the centre
    of a disk whose conformal coordinate (t -> -inf at the centre) was
    truncated.  Operators that need it close the stencil there with the
    harmonic cap of :func:`cap_ghost_ring`; otherwise it is treated as a
    boundary ring.
    """

    n_theta: int
    t: np.ndarray
    topology: str = ANNULUS

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        if int(self.n_theta) != self.n_theta or self.n_theta < MIN_THETA_NODES:
            raise GridError(f"n_theta must be an integer >= {MIN_THETA_NODES}")
        if t.ndim != 1 or t.size < 2:
            raise GridError("t must be a 1-d sequence with at least two values")
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise GridError("t values must be strictly increasing")
        # linspace rounding is absolute, so allow a few ulps of |t| on top
        slack = 1e-12 * dt.mean() + 8 * np.finfo(float).eps * np.abs(t).max()
        if np.max(np.abs(dt - dt.mean())) > slack:
            raise GridError("t spacing must be uniform")
        if self.topology not in (ANNULUS, CAPPED_DISK):
            raise GridError(f"unknown topology {self.topology!r}")
        t.flags.writeable = False
        object.__setattr__(self, "n_theta", int(self.n_theta))
        object.__setattr__(self, "t", t)

    @classmethod
    def uniform(cls, n_theta: int, t_min: float, t_max: float, n_t: int,
                topology: str = ANNULUS) -> "Grid":
        return cls(n_theta, np.linspace(t_min, t_max, n_t), topology)

    @property
    def n_t(self) -> int:
        return self.t.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_t, self.n_theta)

    @property
    def size(self) -> int:
        return self.n_t * self.n_theta

    @property
    def h_theta(self) -> float:
        return 2.0 * np.pi / self.n_theta

    @property
    def h_t(self) -> float:
        return (self.t[-1] - self.t[0]) / (self.n_t - 1)

    @property
    def h(self) -> float:
        """Coarsest of the two coordinate spacings."""
        return max(self.h_theta, self.h_t)

    @cached_property
    def theta(self) -> np.ndarray:
        return self.h_theta * np.arange(self.n_theta)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(Theta, T) arrays of shape ``self.shape``."""
        T, Theta = np.meshgrid(self.t, self.theta, indexing="ij")
        return Theta, T

    @property
    def dirichlet_rings(self) -> tuple[int, ...]:
        """Rings carrying boundary data: both ends of an annulus, the outer end of a disk."""
        return (self.n_t - 1,) if self.topology == CAPPED_DISK else (0, self.n_t - 1)

    def interior_mask(self, margin: int = 1) -> np.ndarray:
        """Boolean mask of nodes at least ``margin`` rings away from both ends."""
        mask = np.zeros(self.shape, dtype=bool)
        if self.n_t > 2 * margin:
            mask[margin:self.n_t - margin, :] = True
        return mask

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            self.n_theta == other.n_theta
            and self.topology == other.topology
            and self.t.shape == other.t.shape
            and np.array_equal(self.t, other.t)
        )


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real values attached to every node of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            if v.size == self.grid.size:
                v = v.reshape(self.grid.shape)
            else:
                raise GridError(f"field has {v.size} values, grid has {self.grid.size} nodes")
        if not np.all(np.isfinite(v)):
            raise GridError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(c)))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable) -> "ScalarField":
        """Sample ``fn(theta, t)`` (broadcasting arrays) on the grid nodes."""
        Theta, T = grid.mesh()
        return cls(grid, np.broadcast_to(fn(Theta, T), grid.shape))

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.grid, values)

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()


def _check_same_grid(a: Grid, b: Grid):
    if not a.same_as(b):
        raise GridError("fields live on different grids")


def cap_multipliers(grid: Grid) -> np.ndarray:
    """Per-Fourier-mode decay factors 1/mu_k of the discrete harmonic cap.

    A bounded discrete harmonic function on the half-infinite lattice
    cylinder below the first ring has modes u_{j,k} = mu_k^j u_{0,k} with
    mu_k + 1/mu_k = 2 + 4 (h_t/h_theta)^2 sin^2(k h_theta / 2), mu_k >= 1.
    Mode 0 gets factor 1, a zero-flux condition.
    """
    k = np.arange(grid.n_theta // 2 + 1)
    sigma = 4 * (grid.h_t / grid.h_theta) ** 2 * np.sin(k * grid.h_theta / 2) ** 2
    mu = 1 + sigma / 2 + np.sqrt(sigma + sigma ** 2 / 4)
    return 1.0 / mu


def cap_ghost_ring(ring0: np.ndarray, grid: Grid) -> np.ndarray:
    """Values one ring below the innermost ring of a capped disk.

    This is the harmonic continuation into the truncated cap (see
    :func:`cap_multipliers`); it closes the 5-point stencil at the centre.
    """
    return np.fft.irfft(np.fft.rfft(ring0) * cap_multipliers(grid), grid.n_theta)


def cap_kernel(grid: Grid) -> np.ndarray:
    """Circulant kernel c with ghost_i = sum_j c[(i - j) % n] ring0_j."""
    return np.fft.irfft(cap_multipliers(grid), grid.n_theta)


def laplacian_flat(field: ScalarField, grid: Optional[Grid] = None, order: int = 2,
                   cap_closure: bool = False) -> ScalarField:
    """Coordinate Laplacian d^2/dtheta^2 + d^2/dt^2, periodic in theta.

    ``order=2`` is the 5-point stencil used by the solver; it is defined on
    every ring but the first and last.  ``order=4`` is the fourth-order
    9-point cross, defined two rings in from each end, and is only used to
    cross-check second-order results.  Rings where the stencil is undefined
    hold 0.  With ``cap_closure`` on a capped disk the 5-point stencil is
    also applied on the innermost ring, using :func:`cap_ghost_ring`.
    """
    grid = field.grid if grid is None else grid
    _check_same_grid(field.grid, grid)
    width = {2: 1, 4: 2}.get(order)
    if width is None:
        raise ValueError("order must be 2 or 4")
    if grid.n_t < 2 * width + 1:
        raise GridError(f"need at least {2 * width + 1} t-rings for order {order}")
    f = field.values
    ht2, hth2 = grid.h_t ** 2, grid.h_theta ** 2
    out = np.zeros(grid.shape)
    if order == 2:
        d_th = (np.roll(f, 1, axis=1) - 2 * f + np.roll(f, -1, axis=1)) / hth2
        out[1:-1] = (f[:-2] - 2 * f[1:-1] + f[2:]) / ht2 + d_th[1:-1]
        if cap_closure and grid.topology == CAPPED_DISK:
            ghost = cap_ghost_ring(f[0], grid)
            out[0] = (ghost - 2 * f[0] + f[1]) / ht2 + d_th[0]
    else:
        d_th = (-np.roll(f, 2, axis=1) + 16 * np.roll(f, 1, axis=1) - 30 * f
                + 16 * np.roll(f, -1, axis=1) - np.roll(f, -2, axis=1)) / (12 * hth2)
        out[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * ht2) \
            + d_th[2:-2]
    return ScalarField(grid, out)


def laplacian_matrix(grid: Grid, cap_closure: bool = False) -> sp.csr_matrix:
    """5-point flat Laplacian on all nodes; first and last ring rows are empty.

    With ``cap_closure`` on a capped disk the first ring gets the closed
    stencil of :func:`laplacian_flat` (a dense circulant block on that ring).
    """
    n, m = grid.n_t, grid.n_theta
    idx = np.arange(grid.size).reshape(n, m)
    rows, cols, vals = [], [], []
    inner = idx[1:-1].ravel()
    a_t, a_th = 1.0 / grid.h_t ** 2, 1.0 / grid.h_theta ** 2
    for nbr, w in ((idx[:-2], a_t), (idx[2:], a_t),
                   (np.roll(idx, 1, axis=1)[1:-1], a_th), (np.roll(idx, -1, axis=1)[1:-1], a_th)):
        rows.append(inner)
        cols.append(nbr.ravel())
        vals.append(np.full(inner.size, w))
    rows.append(inner)
    cols.append(inner)
    vals.append(np.full(inner.size, -2 * (a_t + a_th)))
    if cap_closure and grid.topology == CAPPED_DISK:
        ring = idx[0]
        for nbr, w in ((idx[1], a_t), (np.roll(ring, 1), a_th), (np.roll(ring, -1), a_th),
                       (ring, -2 * (a_t + a_th))):
            rows.append(ring)
            cols.append(nbr)
            vals.append(np.full(m, w))
        c = cap_kernel(grid)
        ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        rows.append(ring[ii].ravel())
        cols.append(ring[jj].ravel())
        vals.append(a_t * c[(ii - jj) % m].ravel())
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(grid.size, grid.size))


def integrate(field: ScalarField, weights: Optional[ScalarField] = None) -> float:
    """Integral of field*weights over the chart in (theta, t) coordinates.

    Rectangle rule in theta (exact for trigonometric polynomials of degree
    below n_theta), trapezoid rule in t.
    """
    f = field.values
    if weights is not None:
        _check_same_grid(field.grid, weights.grid)
        f = f * weights.values
    grid = field.grid
    ring = f.sum(axis=1) * grid.h_theta
    return float(trapezoid(ring, grid.t))


def _edge_list(grid: Grid, neighbors: int = 8):
    """Undirected lattice edges (a, b, coordinate length), periodic in theta."""
    n, m = grid.n_t, grid.n_theta
    idx = np.arange(grid.size).reshape(n, m)
    right = np.roll(idx, -1, axis=1)
    edges = [(idx.ravel(), right.ravel(), np.full(idx.size, grid.h_theta)),
             (idx[:-1].ravel(), idx[1:].ravel(), np.full(idx[:-1].size, grid.h_t))]
    if neighbors == 8:
        diag = np.hypot(grid.h_theta, grid.h_t)
        edges.append((idx[:-1].ravel(), right[1:].ravel(), np.full(idx[:-1].size, diag)))
        edges.append((idx[1:].ravel(), right[:-1].ravel(), np.full(idx[:-1].size, diag)))
    elif neighbors != 4:
        raise ValueError("neighbors must be 4 or 8")
    a = np.concatenate([e[0] for e in edges])
    b = np.concatenate([e[1] for e in edges])
    length = np.concatenate([e[2] for e in edges])
    return a, b, length


def graph_distance(grid: Grid, lam: Optional[ScalarField] = None, neighbors: int = 8):
    """Return ``dist(sources, limit)`` computing lattice-graph distances.

    Edge weights are the mean of ``lam`` at the two endpoints times the
    coordinate edge length, a first-order approximation of the distance of
    ``lam^2 (dtheta^2 + dt^2)``.  The callable returns an array of shape
    ``(len(sources), grid.size)`` with ``inf`` beyond ``limit``.
    """
    a, b, length = _edge_list(grid, neighbors)
    if lam is None:
        w = length
    else:
        _check_same_grid(grid, lam.grid)
        lv = lam.flat
        w = 0.5 * (lv[a] + lv[b]) * length
    graph = sp.csr_matrix((w, (a, b)), shape=(grid.size, grid.size))

    def dist(sources, limit=np.inf):
        return dijkstra(graph, directed=False, indices=np.asarray(sources), limit=limit)

    return dist


def holder_seminorm(field: ScalarField, grid: Optional[Grid] = None, alpha: float = 0.5,
                    metric_distance=None, radius: float = 1.0, sources=None,
                    chunk: int = 64) -> float:
    """Localised Hoelder seminorm sup |f(x)-f(y)| / d(x,y)^alpha over 0 < d <= radius.

    ``metric_distance(sources, limit)`` supplies distances (see
    :func:`graph_distance`, the default with unit conformal factor).  When
    ``sources`` is given, x ranges over those node indices only and y over
    all nodes, which gives a lower estimate at a fraction of the cost.
    """
    grid = field.grid if grid is None else grid
    _check_same_grid(field.grid, grid)
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if metric_distance is None:
        metric_distance = graph_distance(grid)
    f = field.flat
    if np.ptp(f) == 0.0:
        return 0.0
    src = np.arange(grid.size) if sources is None else np.asarray(sources)
    best = 0.0
    for k in range(0, src.size, chunk):
        s = src[k:k + chunk]
        d = metric_distance(s, radius)
        ok = np.isfinite(d) & (d > 0) & (d <= radius)
        if not ok.any():
            continue
        diff = np.abs(f[s][:, None] - f[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(ok, diff / np.where(ok, d, 1.0) ** alpha, 0.0)
        best = max(best, float(q.max()))
    return best


def lattice_sources(grid: Grid, per_axis: int = 32) -> np.ndarray:
    """Node indices of a coarse sub-lattice, roughly ``per_axis`` per direction.

    The theta positions are nested across power-of-two refinements, so
    diagnostics sampled here are comparable between resolutions.
    """
    step_th = max(1, grid.n_theta // per_axis)
    js = np.unique(np.round(np.linspace(0, grid.n_t - 1, min(per_axis, grid.n_t))).astype(int))
    iis = np.arange(0, grid.n_theta, step_th)
    return (js[:, None] * grid.n_theta + iis[None, :]).ravel()
