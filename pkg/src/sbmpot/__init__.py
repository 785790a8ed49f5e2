"""Exit-path Monte Carlo and boundary-kernel numerics for subordinate
Brownian motions with a Gaussian component on smooth bounded domains."""

from .bernstein import FAMILIES, Subordinator
from .fatou import (BoundaryData, ConvergenceReport, G_boundedness_check,
                    affine_in_angle, exit_locality_check, fatou_trace,
                    hemisphere_indicator, littlewood_arcs,
                    littlewood_counterexample, maximal_inequality_check,
                    near_one_check, near_one_margin, relative_fatou_trace,
                    representation_check, surrogate_trace, trace_stats)
from .geometry import BoundaryMesh, ConeSpec, Domain, cone_sequence, \
    tangential_curve
from .kernels import (KernelGrid, boundary_density, envelope_ratio_stats,
                      green_envelope, harnack_check, levy_system_check,
                      martin_estimate, martin_surrogate, poisson_K)
from .levy import JumpKernel
from .pathsim import (CellAccum, ExitBatch, ExitRecord, PathConfig,
                      SpatialGrid, estimate_F, exit_functional,
                      functional_stats, occupation_green, simulate_exit,
                      simulate_exits, subseed, trace_path)

__version__ = "0.1.0"

__all__ = [
    "FAMILIES", "Subordinator", "JumpKernel",
    "Domain", "BoundaryMesh", "ConeSpec", "cone_sequence", "tangential_curve",
    "PathConfig", "ExitBatch", "ExitRecord", "CellAccum", "SpatialGrid",
    "simulate_exit", "simulate_exits", "exit_functional", "functional_stats",
    "estimate_F", "occupation_green", "trace_path", "subseed",
    "KernelGrid", "green_envelope", "martin_surrogate", "martin_estimate",
    "poisson_K", "levy_system_check", "boundary_density",
    "envelope_ratio_stats", "harnack_check",
    "BoundaryData", "ConvergenceReport", "hemisphere_indicator",
    "affine_in_angle", "trace_stats", "fatou_trace", "relative_fatou_trace",
    "maximal_inequality_check", "G_boundedness_check", "exit_locality_check",
    "representation_check", "littlewood_arcs", "littlewood_counterexample",
    "surrogate_trace", "near_one_check", "near_one_margin",
    "__version__",
]
