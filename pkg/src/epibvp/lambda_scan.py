"""Critical deposition intensity: bisection on branch existence.

For each boundary condition there is a fold value of lambda: below it
the series engine finds two branches, above it the self-consistency
function has no real root and the solver reports nonexistence.  The
fold is bracketed by proven existence windows

    P1: [144, 307]      P2: [256/9, 384/11]      P3: [9, 11.63]

and located here by bisecting the existence predicate.  The detected
value depends (weakly) on the series truncation order, so the scan
pins n_terms = 15 and reports it with the result; the acceptance
windows around the detected folds are wide enough to absorb that
dependence.

No negative fold exists: for lambda < 0 the branch pair persists (one
positive, one negative solution), so the scanner refuses negative
brackets outright instead of bisecting an unbounded interval.
"""

import dataclasses
import math

import numpy as np

from .adm import AdmConfig, ProblemKind, solve_branches
from .errors import BracketFailure, ConfigError, NoRealRoot

__all__ = ["CriticalReport", "find_critical", "existence_profile",
           "bound_interval"]

_BOUNDS = {
    ProblemKind.P1_Dirichlet: (144.0, 307.0),
    ProblemKind.P2_NeumannAtHalf: (256.0 / 9.0, 384.0 / 11.0),
    ProblemKind.P3_Robin: (9.0, 11.63),
}

_SCAN_N_TERMS = 15


def bound_interval(problem):
    """Proven existence window (lo, hi) for the problem's fold."""
    return _BOUNDS[problem]


@dataclasses.dataclass
class CriticalReport:
    """Outcome of one existence bisection."""

    problem: ProblemKind
    lambda_lo: float          # largest probed lambda with two branches
    lambda_hi: float          # smallest probed lambda with none
    bound_interval: tuple
    within_bounds: bool
    n_terms: int
    tol_lambda: float
    probes: list              # (lambda, branch_count, c_gap) in probe order

    @property
    def midpoint(self):
        return 0.5 * (self.lambda_lo + self.lambda_hi)


def _probe(problem, lam, config):
    """(branch count, |c_max - c_min| over nontrivial branches)."""
    try:
        branches = solve_branches(problem, lam, config)
    except NoRealRoot:
        return 0, float("nan")
    cs = [b.c for b in branches if b.branch_label != "trivial"]
    gap = max(cs) - min(cs) if len(cs) >= 2 else 0.0
    return len(branches), gap


def find_critical(problem, config=None, tol_lambda=0.05, lambda_max=None):
    """Bisect the existence predicate down to an interval of width tol_lambda.

    The bracket starts at [0, bound_hi + 10] (or [0, lambda_max] when
    given).  If branches still exist at the upper end the bracket is
    useless and BracketFailure is raised: either lambda_max undershoots
    the fold or the truncation order is too low to lose the roots.
    """
    if tol_lambda <= 0 or not math.isfinite(tol_lambda):
        raise ConfigError("tol_lambda must be a positive real")
    base = config if config is not None else AdmConfig()
    cfg = AdmConfig(
        n_terms=_SCAN_N_TERMS,
        c_bracket=base.c_bracket,
        grid=base.grid,
        tol_c=base.tol_c,
        tol_residual=base.tol_residual,
    )
    lo_bound, hi_bound = _BOUNDS[problem]
    hi = float(lambda_max) if lambda_max is not None else hi_bound + 10.0
    if hi <= 0 or not math.isfinite(hi):
        raise ConfigError(
            "bracket end must be positive (no negative fold exists; "
            "use existence_profile for lambda < 0)"
        )

    probes = []
    count_hi, _ = _probe(problem, hi, cfg)
    if count_hi >= 2:
        raise BracketFailure(
            "two branches persist at lambda=%.17g for %s; raise the "
            "bracket end or the truncation order" % (hi, problem.short)
        )
    lo = 0.0
    count_lo, gap_lo = _probe(problem, lo, cfg)
    probes.append((lo, count_lo, gap_lo))
    probes.append((hi, count_hi, float("nan")))

    while hi - lo > tol_lambda:
        mid = 0.5 * (lo + hi)
        count, gap = _probe(problem, mid, cfg)
        probes.append((mid, count, gap))
        if count >= 2:
            lo = mid
        else:
            hi = mid

    midpoint = 0.5 * (lo + hi)
    return CriticalReport(
        problem=problem,
        lambda_lo=lo,
        lambda_hi=hi,
        bound_interval=(lo_bound, hi_bound),
        within_bounds=bool(lo_bound <= midpoint <= hi_bound),
        n_terms=_SCAN_N_TERMS,
        tol_lambda=float(tol_lambda),
        probes=probes,
    )


def existence_profile(problem, lambdas, config=None):
    """Branch count and root constants for each lambda in the list.

    Rows keep the input order.  Over increasing lambda >= 0 the count is
    non-increasing and once it hits zero it stays there; the profile is
    the data behind that claim, not an enforcement of it.
    """
    cfg = config if config is not None else AdmConfig()
    rows = []
    for lam in lambdas:
        lam = float(lam)
        try:
            branches = solve_branches(problem, lam, cfg)
            rows.append({
                "lambda": lam,
                "count": len(branches),
                "c_values": [b.c for b in branches],
                "labels": [b.branch_label for b in branches],
            })
        except NoRealRoot:
            rows.append({"lambda": lam, "count": 0, "c_values": [], "labels": []})
    return rows
