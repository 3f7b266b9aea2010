"""
Extremal length of a flat cylinder
==================================

For S^1 x (0, M) the flat metric scaled to unit area is extremal:
L^2 / 2pi = 1/M.  Any other conformal metric of area one does worse.
"""

import numpy as np

from courbure.grid import ScalarField
from courbure.modulus import extremal_length_check, flat_annulus, random_density

for M in (0.5, 1.0, 3.0):
    rep = extremal_length_check(flat_annulus(M, 128, 128))
    print(f"M={M}: L^2/(2 pi area) = {rep.lhs:.6f}, 1/M = {rep.bound:.6f}")

# Random densities stay below the bound.
ann = flat_annulus(1.0, 64, 64)
rng = np.random.default_rng(0)
ratios = [extremal_length_check(ann, random_density(ann.chart.grid, rng)).lhs for _ in range(10)]
print("random densities:", np.round(ratios, 4))

# A cheap band around t = 1/2 gives short loops and a tiny ratio.
_, T = ann.chart.grid.mesh()
band = ScalarField(ann.chart.grid, np.where(np.abs(T - 0.5) < 0.05, 0.1, 1.0))
print("cheap band:", round(extremal_length_check(ann, band).lhs, 4))
