"""Variational solvers for steady Clebsch-form Euler flows and a weakly elliptic toy PDE."""

__version__ = "0.1.0"

from .euler import EulerProblem, euler_residual, euler_solve, make_scenario, quadratic_bound_check
from .flux import Background, BernoulliFn, BoundaryData, ConfigurationError, hydro_flux, hydro_jacobian, make_toy_flux
from .grid import Grid, GridSizeError
from .solver import SolveOptions, SolveReport, gradient_check, hessian_symmetry_defect, minimize
from .toy import ToyProblem, manufactured_rhs, toy_solve

__all__ = [
    "Background",
    "BernoulliFn",
    "BoundaryData",
    "ConfigurationError",
    "EulerProblem",
    "Grid",
    "GridSizeError",
    "SolveOptions",
    "SolveReport",
    "ToyProblem",
    "euler_residual",
    "euler_solve",
    "gradient_check",
    "hessian_symmetry_defect",
    "hydro_flux",
    "hydro_jacobian",
    "make_scenario",
    "make_toy_flux",
    "manufactured_rhs",
    "minimize",
    "quadratic_bound_check",
    "toy_solve",
]
