"""Bifurcation analysis for the two-phase Serrin-type overdetermined problem."""

from .analytic import (TwoPhaseConfig, beta, beta_slope, bifurcation_value,
                       radial_solution, sigma_set)
from .continuation import (Branch, BranchPoint, corrector, trace_branch,
                           verify_crandall_rabinowitz)
from .errors import (ConvergenceError, DomainError, GeometryError, SolverError,
                     TwoPhaseError)
from .fieldsolver import boundary_flux, residual, solve, transmission_ratio
from .geometry import FourierBoundary, boundary_point, measures, normal_and_jacobian
from .linearization import (assemble_jacobian, detect_bifurcation,
                            directional_derivative, spectrum_at_trivial)

__all__ = [
    "TwoPhaseConfig", "beta", "beta_slope", "bifurcation_value", "radial_solution",
    "sigma_set", "Branch", "BranchPoint", "corrector", "trace_branch",
    "verify_crandall_rabinowitz", "ConvergenceError", "DomainError", "GeometryError",
    "SolverError", "TwoPhaseError", "boundary_flux", "residual", "solve",
    "transmission_ratio", "FourierBoundary", "boundary_point", "measures",
    "normal_and_jacobian", "assemble_jacobian", "detect_bifurcation",
    "directional_derivative", "spectrum_at_trivial",
]
