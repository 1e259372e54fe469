"""Map reduced-variable branches back to radial film profiles.

A branch lives in the half-line variable t; the physical state is the
surface slope w and height phi on the unit disk radius r in [0, 1].
The change of variables is

    t = r^2 / 2,    w(r) = u(r^2 / 2),    phi(r) = -int_r^1 w(rho)/rho drho,

so phi(1) = 0 by construction and phi'(r) = w(r)/r.  Near the origin
w ~ c t = c r^2/2, hence w/rho extends continuously by 0 to rho = 0 and
the height integral is regular.

The boundary behaviour at the disk edge is checked with one-sided
finite differences of phi itself (not the analytic shortcut
phi' = w/r), giving an independent confirmation that the reduced
boundary condition carries over:

    p1: phi'(1) = 0          p2: phi'(1) + phi''(1) = 0
    p3: phi''(1) = 0
"""

import dataclasses

import numpy as np
from scipy.integrate import cumulative_simpson

from .adm import AdmBranch, ProblemKind
from .errors import ConfigError

__all__ = ["RadialProfile", "to_radial", "residual_table",
           "boundary_report", "profile_csv_name", "RESIDUAL_R_POINTS"]

RESIDUAL_R_POINTS = tuple(np.arange(10) / 10.0)

# tolerance on the edge condition, estimated by one-sided differences
_BC_TOL = {
    ProblemKind.P1_Dirichlet: 1e-6,
    ProblemKind.P2_NeumannAtHalf: 1e-4,
    ProblemKind.P3_Robin: 1e-4,
}


@dataclasses.dataclass
class RadialProfile:
    """Sampled radial state (r, w, phi) with the branch's identity."""

    problem: ProblemKind
    lam: float
    c: float
    branch_label: str
    n_terms: int
    r: np.ndarray
    w: np.ndarray
    phi: np.ndarray
    residual: np.ndarray


def _default_r_grid():
    return np.linspace(0.0, 1.0, 1001)


def _branch_residual_series(branch):
    u = branch.solution
    from .powerseries import PowerSeries
    return (u.second_derivative()
            - 0.125 * ((u * u).scale_div_t2())
            - PowerSeries.from_terms([(0, branch.lam / 2.0)]))


def to_radial(branch, r_grid=None):
    """Sample w and phi of one branch on a radial grid ending at r = 1.

    The default grid is 1001 uniform points on [0, 1].  A custom grid
    must be strictly increasing, start at r >= 0 and end at 1 so the
    zero height reference phi(1) = 0 is on the grid.
    """
    r = _default_r_grid() if r_grid is None else np.asarray(r_grid, float)
    if r.ndim != 1 or r.size < 3:
        raise ConfigError("radial grid needs at least three points")
    if np.any(np.diff(r) <= 0) or r[0] < 0 or abs(r[-1] - 1.0) > 1e-12:
        raise ConfigError("radial grid must increase from r >= 0 to r = 1")

    t = 0.5 * r * r
    w = branch.eval_grid(t)

    # w/rho -> 0 at the origin since w = O(rho^2); off-origin it is exact
    g = np.zeros_like(r)
    nz = r > 0
    g[nz] = w[nz] / r[nz]
    inner = cumulative_simpson(g, x=r, initial=0.0)
    phi = inner - inner[-1]

    res_series = _branch_residual_series(branch)
    residual = res_series.eval_grid(t)
    if r[0] == 0.0:
        residual[0] = 0.0

    return RadialProfile(
        problem=branch.problem,
        lam=branch.lam,
        c=branch.c,
        branch_label=branch.branch_label,
        n_terms=branch.n_terms,
        r=r,
        w=w,
        phi=phi,
        residual=residual,
    )


def residual_table(branch, r_points=None):
    """Defect of the reduced equation at selected radii.

    Returns [(r, residual)] with the r = 0 row pinned to 0: the defect
    is defined through t = r^2/2 > 0 and its limit at the origin is
    zero for any solution with w(0) = 0.
    """
    pts = RESIDUAL_R_POINTS if r_points is None else r_points
    res_series = _branch_residual_series(branch)
    rows = []
    for r in pts:
        r = float(r)
        if r < 0 or r > 1:
            raise ConfigError("residual table radius outside [0, 1]")
        if r == 0.0:
            rows.append((0.0, 0.0))
        else:
            rows.append((r, res_series.eval(0.5 * r * r)))
    return rows


def _derivs_at_end(x, y, npts=7):
    """(f', f'') at x[-1] from a local polynomial through the last points.

    Fitting an interpolating polynomial on the trailing window and
    differentiating it is the one-sided finite-difference estimate of
    arbitrary stencil width; with seven points the truncation error is
    O(h^6) and the edge tolerances below are comfortably resolvable on
    the default 1001-point grid.
    """
    if len(x) < npts:
        npts = len(x)
    xs = np.asarray(x[-npts:], float)
    ys = np.asarray(y[-npts:], float)
    h = xs[-1] - xs[-2]
    z = (xs - xs[-1]) / h            # trailing window in units of h, ends at 0
    coef = np.linalg.solve(np.vander(z, increasing=True), ys)
    d1 = coef[1] / h if len(coef) > 1 else 0.0
    d2 = 2.0 * coef[2] / h ** 2 if len(coef) > 2 else 0.0
    return float(d1), float(d2)


def boundary_report(profile):
    """Check the disk-edge condition of phi by one-sided differences.

    The residual combination and tolerance depend on the problem:
    p1 measures |phi'(1)| against 1e-6, p2 measures |phi'(1) + phi''(1)|
    against 1e-4 and p3 measures |phi''(1)| against 1e-4.
    """
    d1, d2 = _derivs_at_end(profile.r, profile.phi)
    problem = profile.problem
    if problem is ProblemKind.P1_Dirichlet:
        value = d1
        expr = "phi'(1)"
    elif problem is ProblemKind.P2_NeumannAtHalf:
        value = d1 + d2
        expr = "phi'(1) + phi''(1)"
    else:
        value = d2
        expr = "phi''(1)"
    tol = _BC_TOL[problem]
    return {
        "problem": problem.short,
        "expression": expr,
        "value": value,
        "dphi": d1,
        "d2phi": d2,
        "tol": tol,
        "pass": bool(abs(value) <= tol),
    }


def profile_csv_name(profile):
    """Canonical file name {problem}_{lambda}_{label}.csv."""
    return "%s_%g_%s.csv" % (profile.problem.short, profile.lam,
                             profile.branch_label)
