"""Accelerated inexact proximal point methods for nonconvex composite problems."""

from .acg import (AcgCertificate, AcgProblem, AcgState, acg_init, acg_run,
                  acg_step, b_lower_bound, hpe_check, min_inner_iterations)
from .errors import (DomainError, EstimationError, NonconvergenceError,
                     ParameterError)
from .problems import (AffineModel, CompositeProblem, ProxOracle, SmoothOracle,
                       composite_value, estimate_curvature, linearize,
                       project_simplex, simplex_indicator)
from .refinement import StationaryPair, refine, stationarity_residual
from .solver import (DaippParams, ProxApproxSolution, SolveReport,
                     build_inner_problem, compute_x_tilde, daipp_run,
                     default_params, final_refine, inner_iteration_floor,
                     map_tolerances, outer_coefficients, outer_x_update,
                     stop_inner_test, stop_outer_test)

__all__ = [name for name in dir() if not name.startswith("_")]
