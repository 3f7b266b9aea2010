"""
How uniformisation degenerates along the D_r family
===================================================

D_r glues a flat cylinder of conformal length r to a hyperbolic ball of
radius r.  Seen from the unit disk, the cylinder fills the annulus
e^{-r} <= |z| < 1 and everything else is squeezed into the tiny centre.
"""

import math

from courbure.revolution_lab import dr_sweep, sweep_claims

reports = dr_sweep([3, 4, 5, 6, 8, 10])
print(" r   cylinder image   e^-r            B_{r-1} image   |DPi(0)|")
for rep in reports:
    print(f"{rep.r:4.0f} {rep.inner_radius_Cr:.9e} {rep.e_minus_r:.9e} "
          f"{rep.image_radius_Brm1:.9e} {rep.deriv_norm:12.4f}")

# The derivative at the centre grows roughly like e^r.
for rep in reports:
    print(f"r={rep.r:g}: log|DPi(0)| - r = {math.log(rep.deriv_norm) - rep.r:+.4f}")

print(sweep_claims(reports))
