"""Numerical lab for regularized p-Laplacian evolution with capillary-type
boundary conditions on intervals, balls and annuli."""

from .geometry import Interval, RadialAnnulus, RadialBall, build_grid
from .field_ops import GridFunction
from .boundary import BoundaryCondition
from .parabolic import ProblemSpec, SolverConfig, evolve, slope_lambda
from .elliptic_eigen import eigen_pair, solve_penalized
from .config import RunConfig, load_config
from .scenarios import list_scenarios, run_scenario

__version__ = "0.1.0"

__all__ = [
    "Interval", "RadialAnnulus", "RadialBall", "build_grid", "GridFunction",
    "BoundaryCondition", "ProblemSpec", "SolverConfig", "evolve", "slope_lambda",
    "eigen_pair", "solve_penalized", "RunConfig", "load_config", "list_scenarios",
    "run_scenario",
]
