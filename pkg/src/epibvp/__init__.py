"""Multiple radial steady states of an epitaxial thin-film model.

The package solves the reduced boundary-value problem

    u''(t) = u(t)^2 / (8 t^2) + lambda / 2,   0 < t <= 1/2,

with one of three conditions at t = 1/2 (value, slope, or their
difference) and a vanishing weighted slope at the origin.  A decomposed
power series in sqrt(t) produces every solution branch, an integral
kernel with a sign property drives an independent two-sided iteration,
and a bisection over lambda locates the fold past which no steady state
exists.  Radial profiles, residual tables, deterministic JSON/CSV
artifacts and figures are produced by the `epibvp` command-line tool.
"""

from .adm import (AdmBranch, AdmConfig, ProblemKind, c_equation,
                  default_grid, problem_from_tag, residual, solve_branches)
from .errors import (BracketFailure, ConfigError, DomainError, EpibvpError,
                     NegativeExponent, NoAdmissibleSeed, NoRealRoot,
                     OrderingViolation, OutOfValidity)
from .greens import (GreensKernel, apply_kernel, kernel_value,
                     positive_k_limit, sign_check)
from .lambda_scan import (CriticalReport, bound_interval, existence_profile,
                          find_critical)
from .monotone import (IterationTrace, SeedFunction, default_ts, iterate,
                       relaxed_seed, seed_lambda_max, seed_upper,
                       verify_lower_upper)
from .powerseries import PowerSeries
from .radial import (RadialProfile, boundary_report, profile_csv_name,
                     residual_table, to_radial)

__version__ = "0.1.0"

__all__ = [
    "AdmBranch", "AdmConfig", "ProblemKind", "c_equation", "default_grid",
    "problem_from_tag", "residual", "solve_branches",
    "BracketFailure", "ConfigError", "DomainError", "EpibvpError",
    "NegativeExponent", "NoAdmissibleSeed", "NoRealRoot",
    "OrderingViolation", "OutOfValidity",
    "GreensKernel", "apply_kernel", "kernel_value", "positive_k_limit",
    "sign_check",
    "CriticalReport", "bound_interval", "existence_profile", "find_critical",
    "IterationTrace", "SeedFunction", "default_ts", "iterate",
    "relaxed_seed", "seed_lambda_max", "seed_upper", "verify_lower_upper",
    "PowerSeries",
    "RadialProfile", "boundary_report", "profile_csv_name",
    "residual_table", "to_radial",
    "__version__",
]
