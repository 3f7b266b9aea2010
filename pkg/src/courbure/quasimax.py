"""Quasi-maximum search on finite metric spaces.

Given f >= 0 and constants C > 1, A > 0, alpha > 0, find x with
f(x) >= f(x0) such that f(y) <= C f(x) whenever d(x, y) <= A f(x)^(-alpha).
Starting from x0, move to the largest value in the current ball while that
value beats C f(x).  Each move multiplies f by more than C, so on a finite
space the walk stops.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import shortest_path


class QuasiMaxError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Points 0..n-1 with a distance matrix and a nonnegative function."""

    distance: np.ndarray
    values: np.ndarray
    tolerance: float = 1e-9

    def __post_init__(self):
        d = np.array(self.distance, dtype=float)
        f = np.array(self.values, dtype=float).ravel()
        n = f.size
        if d.shape != (n, n):
            raise QuasiMaxError(f"distance matrix shape {d.shape} does not match {n} points")
        if not np.all(np.isfinite(f)) or np.any(f < 0):
            raise QuasiMaxError("f must be finite and nonnegative")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise QuasiMaxError("distances must be finite and nonnegative")
        if np.any(np.diag(d) != 0):
            raise QuasiMaxError("d(x, x) must vanish")
        if not np.array_equal(d, d.T):
            raise QuasiMaxError("distance matrix is not symmetric")
        # d(i, k) <= d(i, j) + d(j, k), one intermediate point at a time
        for j in range(n):
            if np.any(d > d[:, j:j + 1] + d[j:j + 1, :] + self.tolerance):
                raise QuasiMaxError("triangle inequality fails")
        d.flags.writeable = False
        f.flags.writeable = False
        object.__setattr__(self, "distance", d)
        object.__setattr__(self, "values", f)

    @property
    def size(self) -> int:
        return self.values.size

    def with_values(self, values) -> "FiniteMetricSpace":
        """Same metric, new function; only the values are revalidated."""
        f = np.array(values, dtype=float).ravel()
        if f.size != self.size or not np.all(np.isfinite(f)) or np.any(f < 0):
            raise QuasiMaxError("f must be finite, nonnegative, one value per point")
        f.flags.writeable = False
        out = object.__new__(FiniteMetricSpace)
        for name, v in (("distance", self.distance), ("values", f), ("tolerance", self.tolerance)):
            object.__setattr__(out, name, v)
        return out

    @classmethod
    def from_graph(cls, adjacency, values) -> "FiniteMetricSpace":
        """Shortest-path metric of a connected weighted graph."""
        d = shortest_path(adjacency, directed=False)
        if not np.all(np.isfinite(d)):
            raise QuasiMaxError("graph is not connected")
        return cls(d, values)


def ball_radius(fx: float, A: float, alpha: float) -> float:
    """A f(x)^(-alpha), infinite when f(x) = 0."""
    if fx == 0:
        return math.inf
    with np.errstate(over="ignore"):
        return float(A * np.float64(fx) ** (-alpha))


def _check_params(C, A, alpha):
    if not C > 1:
        raise QuasiMaxError("C must exceed 1")
    if not A > 0:
        raise QuasiMaxError("A must be positive")
    if not alpha > 0:
        raise QuasiMaxError("alpha must be positive")


def quasi_maximum(space: FiniteMetricSpace, x0: int, C: float, A: float, alpha: float,
                  return_path: bool = False):
    """Run the search from point ``x0``; ties go to the lowest index."""
    _check_params(C, A, alpha)
    if not 0 <= x0 < space.size:
        raise QuasiMaxError(f"x0={x0} is not a point of the space")
    f, d = space.values, space.distance
    x = int(x0)
    path = [x]
    while True:
        ball = d[x] <= ball_radius(f[x], A, alpha)
        cand = np.where(ball, f, -np.inf)
        best = int(np.argmax(cand))  # argmax returns the first maximiser
        if not cand[best] > C * f[x]:
            break
        x = best
        path.append(x)
    return (x, path) if return_path else x


def is_quasi_maximum(space: FiniteMetricSpace, x: int, x0: int, C: float, A: float,
                     alpha: float) -> bool:
    """Exhaustive check of the postcondition, point by point."""
    f, d = space.values, space.distance
    if f[x] < f[x0]:
        return False
    radius = ball_radius(f[x], A, alpha)
    for y in range(space.size):
        if d[x, y] <= radius and f[y] > C * f[x]:
            return False
    return True


def grid_graph_space(rows: int, cols: int, values) -> FiniteMetricSpace:
    """Unit-weight 4-neighbour grid graph with its path metric."""
    n = rows * cols
    idx = np.arange(n).reshape(rows, cols)
    a = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    b = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    adj = np.zeros((n, n))
    adj[a, b] = adj[b, a] = 1.0
    return FiniteMetricSpace.from_graph(adj, values)


@dataclass
class TrialSummary:
    trials: int
    passed: int
    failures: list

    @property
    def ok(self) -> bool:
        return self.passed == self.trials


def random_trials(n_trials: int, seed: int, n_points: int = 200) -> TrialSummary:
    """Randomised trials on random point clouds and grid graphs.

    Each trial draws a space, a function f (with occasional zeros and heavy
    tails), a start point and constants (C, A, alpha), then verifies the
    result exhaustively together with the geometric growth along the path.
    """
    rng = np.random.default_rng(seed)
    side = int(round(math.sqrt(n_points)))
    grid = grid_graph_space(side, n_points // side, np.zeros(side * (n_points // side)))
    failures = []
    for k in range(n_trials):
        if k % 2 == 0:
            dist = grid.distance
            n = dist.shape[0]
        else:
            n = int(rng.integers(2, n_points + 1))
            pts = rng.uniform(0, rng.uniform(1, 20), size=(n, int(rng.integers(1, 4))))
            dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        f = rng.lognormal(0, rng.uniform(0.1, 3), size=n)
        f[rng.random(n) < 0.05] = 0.0
        space = grid.with_values(f) if k % 2 == 0 else FiniteMetricSpace(dist, f)
        C = float(rng.choice([1.01, 1.5, 2.0, 4.0]))
        A = float(rng.uniform(0.1, 5))
        alpha = float(rng.uniform(0.1, 2))
        x0 = int(rng.integers(n))
        x, path = quasi_maximum(space, x0, C, A, alpha, return_path=True)
        ok = is_quasi_maximum(space, x, x0, C, A, alpha)
        ok &= all(f[b] > C * f[a] for a, b in zip(path, path[1:]))
        if not ok:
            failures.append(k)
    return TrialSummary(n_trials, n_trials - len(failures), failures)
