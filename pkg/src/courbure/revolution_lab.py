"""Degeneration of uniformising maps along the D_r family.

D_r is a hyperbolic cap of radius r with a flat cylinder of conformal length
r attached.  Uniformising D_r by the unit disk sends the cylinder onto the
round annulus e^{-r} <= |z| < 1, squeezes the hyperbolic ball of radius r - 1
inside |z| < e^{-r}, and so the inverse map has an exploding derivative at
the centre.

Derivative normalisation: ``deriv_norm`` is the norm of the inverse map's
differential at 0, measured with the Poincare metric 4|dz|^2/(1-|z|^2)^2 on
the disk and the surface metric (flat to first order) at the centre.  It
equals e^{T - c0} / 2.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass
from typing import Sequence

import numpy as np

from .geometry import (UniformizationData, build_dr_profile, conformal_coordinate,
                       gaussian_curvature_profile, uniformize_revolution)
from .modulus import modulus_revolution
from .output import svg_lineplot, write_atomic, write_csv

DR_COLUMNS = ("r", "modulus_cylinder", "inner_radius_Cr", "image_radius_Brm1",
              "e_minus_r", "deriv_norm", "T", "c0")


@dataclass(frozen=True)
class DrReport:
    r: float
    modulus_cylinder: float
    inner_radius_Cr: float
    image_radius_Brm1: float
    e_minus_r: float
    deriv_norm: float
    T: float
    c0: float
    collar: float = 1.0
    T_cap: float = math.nan  # conformal coordinate of the collar's inner edge
    cylinder_curvature_max: float = math.nan  # sup |K| sampled on the cylinder

    def __post_init__(self):
        for name in ("inner_radius_Cr", "image_radius_Brm1"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name}={v} outside (0, 1)")
        if not self.deriv_norm > 0:
            raise ValueError("derivative norm must be positive")

    def row(self) -> tuple:
        return astuple(self)[:len(DR_COLUMNS)]

    def cap_error(self) -> float:
        """Distance between T_cap and its closed form for the pure hyperbolic cap."""
        a = self.r - self.collar
        return abs(self.T_cap - math.log(math.tanh(a / 2)) + math.log(math.tanh(0.5)))


def derivative_at_center(unif: UniformizationData) -> float:
    return math.exp(unif.T - unif.c0) / 2


def dr_report(r: float, collar: float = 1.0) -> DrReport:
    profile = build_dr_profile(r, collar)
    unif = uniformize_revolution(profile)
    cyl_lo = profile.params["cylinder_start"]
    modulus_cyl = modulus_revolution(profile, cyl_lo, profile.rho_max)
    K = gaussian_curvature_profile(profile)
    samples = np.linspace(cyl_lo, profile.rho_max, 257)[:-1]
    return DrReport(
        r=float(r),
        modulus_cylinder=modulus_cyl,
        inner_radius_Cr=unif.radius_map(cyl_lo),
        image_radius_Brm1=unif.radius_map(r - 1.0),
        e_minus_r=math.exp(-r),
        deriv_norm=derivative_at_center(unif),
        T=unif.T,
        c0=unif.c0,
        collar=float(collar),
        T_cap=conformal_coordinate(profile, r - collar),
        cylinder_curvature_max=float(np.max(np.abs(K(samples)))),
    )


def dr_sweep(r_values: Sequence[float], collar: float = 1.0, workers: int = 1) -> list[DrReport]:
    """One report per r, in input order."""
    r_values = [float(r) for r in r_values]
    if any(r < 2 for r in r_values):
        raise ValueError("every r must be >= 2")
    if workers <= 1 or len(r_values) < 2:
        return [dr_report(r, collar) for r in r_values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: dr_report(r, collar), r_values))


def sweep_claims(reports: Sequence[DrReport], tol: float = 1e-9) -> dict:
    """Evaluate the quantitative claims about the family; each value is a bool."""
    derivs = [rep.deriv_norm for rep in reports]
    return {
        "cylinder_modulus_is_r": all(abs(rep.modulus_cylinder - rep.r) <= 1e-10 for rep in reports),
        "cylinder_image_radius": all(abs(rep.inner_radius_Cr - rep.e_minus_r) <= tol for rep in reports),
        "modulus_radius_consistent": all(
            abs(rep.inner_radius_Cr - math.exp(-rep.modulus_cylinder)) <= 1e-12 for rep in reports),
        "inner_ball_confined": all(rep.image_radius_Brm1 < rep.e_minus_r for rep in reports),
        "derivative_lower_bound": all(rep.deriv_norm >= math.exp(rep.r - 2) for rep in reports),
        "derivative_increasing": all(b > a for a, b in zip(derivs, derivs[1:])),
        "cap_is_hyperbolic": all(rep.cap_error() <= 1e-9 for rep in reports),
        "cylinder_is_flat": all(rep.cylinder_curvature_max == 0.0 for rep in reports),
    }


def write_dr_csv(path, reports: Sequence[DrReport]):
    return write_csv(path, DR_COLUMNS, (rep.row() for rep in reports))


def write_dr_svg(path, reports: Sequence[DrReport]):
    rs = [rep.r for rep in reports]
    svg = svg_lineplot(
        {
            "deriv_norm": (rs, [rep.deriv_norm for rep in reports]),
            "inner_radius_Cr": (rs, [rep.inner_radius_Cr for rep in reports]),
            "image_radius_Brm1": (rs, [rep.image_radius_Brm1 for rep in reports]),
        },
        xlabel="r", ylabel="log10 value", title="D_r uniformisation", logy=True)
    return write_atomic(path, svg)
