"""
Quasi-maxima on a grid graph
============================

Climb from a starting point towards a point whose value is not beaten by
more than a factor C anywhere in a ball of radius A f^(-alpha).  The ball
shrinks as f grows, so the walk stops well before the global maximum.
"""

import numpy as np

from courbure.quasimax import grid_graph_space, is_quasi_maximum, quasi_maximum

# values grow along the rows, with some noise
rng = np.random.default_rng(1)
columns = np.tile(np.arange(20), 10)
values = np.exp(0.4 * columns) * rng.uniform(0.5, 1.5, 200)
space = grid_graph_space(10, 20, values)

C, A, alpha = 2.0, 3.0, 0.3
x, path = quasi_maximum(space, 0, C, A, alpha, return_path=True)
print("path:", path)
print("values:", np.round(space.values[path], 3))
print("ball radius at the end:", round(A * space.values[x] ** -alpha, 3))
print("global maximum:", round(space.values.max(), 1))
print("postcondition holds:", is_quasi_maximum(space, x, 0, C, A, alpha))
