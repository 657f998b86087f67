"""Thin-film Stokes flow with a power-law slip wall.

Two solver levels over one shared model: the finite-thickness saddle-point
problem on the dilated box, and the reduced (Reynolds-type) pressure problem
whose wall law depends on the slip-scaling exponent relative to the critical
value 3 - 2s.  An analysis layer verifies the thin-film scaling estimates,
the convergence of the rescaled velocity to the reduced solution, and the
effective wall-law trichotomy.
"""

__version__ = "0.1.0"

from .analysis import (SweepReport, check_apriori_metrics, compare_limit, fit_slope,
                       regime_identify, run_eps_sweep, velocity_distance, verify_apriori)
from .errors import (ConfigError, DataError, NewtonError, ParameterError,
                     SolverError, UsageError)
from .fields import Field, FieldKind, norms, zero_mean_project
from .fullorder import FullOrderSolution, boundary_term_energy, solve_full
from .geometry import Domain, Grid3, HeightField
from .operators import StaggeredOps, apply_deps, apply_diveps
from .params import FluidParams, Regime, classify_regime, critical_exponent
from .presets import make_forcing, make_height
from .profile import ProfileSolution, power_traction, slip_traction, solve_profile
from .reynolds import LimitSolution, reconstruct_velocity, solve_limit

__all__ = [
    "__version__",
    "SweepReport", "check_apriori_metrics", "compare_limit", "fit_slope",
    "regime_identify", "run_eps_sweep", "velocity_distance", "verify_apriori",
    "ConfigError", "DataError", "NewtonError", "ParameterError",
    "SolverError", "UsageError",
    "Field", "FieldKind", "norms", "zero_mean_project",
    "FullOrderSolution", "boundary_term_energy", "solve_full",
    "Domain", "Grid3", "HeightField",
    "StaggeredOps", "apply_deps", "apply_diveps",
    "FluidParams", "Regime", "classify_regime", "critical_exponent",
    "make_forcing", "make_height",
    "ProfileSolution", "power_traction", "slip_traction", "solve_profile",
    "LimitSolution", "reconstruct_velocity", "solve_limit",
]
