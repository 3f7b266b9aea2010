"""Prescribed negative curvature, conformal moduli and uniformisation of disks of revolution."""
import os as _os

# COURBURE_THREADS caps BLAS threads too; it must be set before numpy loads
_threads = _os.environ.get("COURBURE_THREADS")
if _threads and _threads.isdigit():
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .geometry import (ConformalChart, NotConformallyHyperbolic, RevolutionProfile,  # noqa: E402
                       UniformizationData, build_dr_profile, chart_from_profile,
                       conformal_change_curvature, conformal_coordinate, euclidean_profile,
                       flat_chart, gaussian_curvature_chart, hyperbolic_profile, laplace_beltrami,
                       poincare_cap_chart, profile_preset, sphere_cap_profile,
                       uniformize_revolution)
from .grid import Grid, ScalarField, holder_seminorm, integrate, laplacian_flat  # noqa: E402
from .modulus import (AnnulusSpec, extremal_length_check, modulus_revolution,  # noqa: E402
                      monotonicity_check, shortest_essential_loop)
from .quasimax import FiniteMetricSpace, quasi_maximum  # noqa: E402
from .revolution_lab import DrReport, derivative_at_center, dr_sweep  # noqa: E402
from .solver import (ContinuationReport, NewtonDidNotConverge, PrescriptionProblem,  # noqa: E402
                     apriori_c0_bounds, assemble_linearized, continuation_solve, newton_solve,
                     residual)

__version__ = "0.1.0"
