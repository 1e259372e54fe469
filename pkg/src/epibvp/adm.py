"""Decomposition engine for the reduced boundary-value problem.

The reduced equation

    u''(t) = u(t)^2 / (8 t^2) + lambda / 2,    t in (0, 1/2],

with sqrt(t)*u'(t) -> 0 as t -> 0, is posed with one of three outer
boundary conditions:

    P1:  u(1/2) = 0
    P2:  u'(1/2) = 0
    P3:  u(1/2) = u'(1/2)

Each problem is equivalent to a Fredholm integral equation whose kernel
splits into a Volterra part plus a rank-one part proportional to t.  The
solution is expanded as u = sum_i u_i with the quadratic nonlinearity
expanded in Adomian polynomials A_n = -(1/2) sum_j u_j u_{n-j}.  The
seed term is

    u_0(t) = -c*t - (lambda/4) * t * (a - t),    a in {1/2, 1, 3/2},

and every correction term applies the same Volterra map

    u_{n+1}(t) = integral_0^t (s - t) * A_n(s) / (4 s^2) ds.

The free constant c is fixed by the rank-one part of the kernel: it must
satisfy c = -integral_0^{1/2} W(s) * sum_i A_i(s) ds with a weight W
depending on the boundary condition.  We expose that as the scalar
function F(c) = c - RHS(c); the roots of F are the solution branches.
All series stay inside the half-integer-exponent polynomial class, so
the whole scheme is exact apart from the floating-point coefficients.

Root finding follows a dense scan over a c-bracket, bisection on each
sign change, and a short Newton polish.  A vectorized evaluator computes
F on a whole batch of c values at once (the scan cost is one FFT
convolution cascade instead of a thousand scalar builds).
"""

import dataclasses
import enum
import math

import numpy as np
from scipy.signal import fftconvolve

from .errors import ConfigError, NoRealRoot
from .powerseries import PowerSeries

__all__ = [
    "ProblemKind",
    "AdmConfig",
    "AdmBranch",
    "adomian_poly",
    "u0_template",
    "iterate_terms",
    "c_equation",
    "solve_branches",
    "residual",
    "default_grid",
]


class ProblemKind(enum.Enum):
    """The three outer boundary conditions of the reduced problem."""

    P1_Dirichlet = "p1"       # u(1/2) = 0
    P2_NeumannAtHalf = "p2"   # u'(1/2) = 0
    P3_Robin = "p3"           # u(1/2) = u'(1/2)

    @property
    def short(self):
        """Compact tag used in file names and CLI arguments."""
        return self.value

    @property
    def bc_text(self):
        return {
            ProblemKind.P1_Dirichlet: "u(1/2) = 0",
            ProblemKind.P2_NeumannAtHalf: "u'(1/2) = 0",
            ProblemKind.P3_Robin: "u(1/2) = u'(1/2)",
        }[self]

    @property
    def radial_bc_text(self):
        """Boundary condition satisfied by the radial potential phi."""
        return {
            ProblemKind.P1_Dirichlet: "phi'(1) = 0",
            ProblemKind.P2_NeumannAtHalf: "phi'(1) + phi''(1) = 0",
            ProblemKind.P3_Robin: "phi''(1) = 0",
        }[self]


def problem_from_tag(tag):
    """Parse 'p1' / 'p2' / 'p3' (case-insensitive) into a ProblemKind."""
    try:
        return ProblemKind(str(tag).strip().lower())
    except ValueError:
        raise ConfigError("unknown problem tag %r (expected p1, p2 or p3)" % (tag,))


# Second factor of the seed template u0 = -c t - (lambda/4) t (a - t).
_U0_A = {
    ProblemKind.P1_Dirichlet: 0.5,
    ProblemKind.P2_NeumannAtHalf: 1.0,
    ProblemKind.P3_Robin: 1.5,
}

_N_TERMS_MAX = 100


def default_grid(n=101):
    """Uniform sample points in (0, 1/2], avoiding the singular origin."""
    return np.linspace(0.5 / n, 0.5, n)


@dataclasses.dataclass
class AdmConfig:
    """Knobs for branch solving.

    n_terms      number of correction terms u_1..u_n (series truncation)
    c_bracket    interval scanned for roots of F(c)
    grid         sample points in (0, 1/2] for sign/residual reporting
    tol_c        accept a root c* once |F(c*)| <= tol_c
    tol_residual threshold used when flagging poorly converged branches
    """

    n_terms: int = 15
    c_bracket: tuple = (-60.0, 60.0)
    grid: np.ndarray = None
    tol_c: float = 1e-10
    tol_residual: float = 1e-8

    def __post_init__(self):
        if self.grid is None:
            self.grid = default_grid()
        self.grid = np.asarray(self.grid, dtype=float)
        self.validate()

    def validate(self):
        if not isinstance(self.n_terms, (int, np.integer)):
            raise ConfigError("n_terms must be an integer")
        if self.n_terms < 1 or self.n_terms > _N_TERMS_MAX:
            raise ConfigError(
                "n_terms must be in [1, %d], got %d" % (_N_TERMS_MAX, self.n_terms)
            )
        lo, hi = self.c_bracket
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ConfigError("c_bracket must be a finite interval (lo, hi) with lo < hi")
        if self.tol_c <= 0 or self.tol_residual <= 0:
            raise ConfigError("tolerances must be positive")
        if self.grid.size == 0 or np.any(self.grid <= 0) or np.any(self.grid > 0.5):
            raise ConfigError("grid points must lie in (0, 1/2]")


@dataclasses.dataclass
class AdmBranch:
    """One solution branch: the series, its constant and its diagnostics."""

    problem: ProblemKind
    lam: float
    c: float
    terms: list
    solution: PowerSeries
    branch_label: str
    n_terms: int
    f_value: float = 0.0          # F(c) at the accepted root
    bc_residual: float = 0.0      # boundary-condition defect of the sum
    residual_max: float = float("nan")
    near_critical: bool = False

    def eval(self, t):
        return self.solution.eval(t)

    def eval_grid(self, ts):
        return self.solution.eval_grid(ts)


def u0_template(problem, lam, c):
    """Seed term u_0(t) = -c t - (lambda/4) t (a - t) for the problem."""
    a = _U0_A[problem]
    return PowerSeries.from_terms([(2, -c - lam * a / 4.0), (4, lam / 4.0)])


def adomian_poly(terms, n):
    """A_n = -(1/2) * sum_{j=0}^{n} u_j * u_{n-j} for N(u) = -u^2/2."""
    acc = PowerSeries.zero()
    for j in range(n + 1):
        acc = acc + terms[j] * terms[n - j]
    return (-0.5) * acc


def _volterra(poly):
    """Apply u -> integral_0^t (s - t) poly(s) / (4 s^2) ds in closed form.

    Split as (1/4) [ integral_0^t s*g2 ds - t * integral_0^t g2 ds ] with
    g2 = poly / s^2; both pieces stay inside the series class.
    """
    g2 = poly.scale_div_t2()
    return 0.25 * (g2.mul_t().integrate() - g2.integrate().mul_t())


def _c_weight(problem, poly):
    """integral_0^{1/2} W(s) poly(s) ds with the problem's rank-one weight.

    W is (1/2-s)/(2s^2) for P1, 1/(4s^2) for P2 and (1/2+s)/(2s^2) for P3.
    """
    g2 = poly.scale_div_t2()
    if problem is ProblemKind.P1_Dirichlet:
        integrand = 0.25 * g2 - 0.5 * g2.mul_t()
    elif problem is ProblemKind.P2_NeumannAtHalf:
        integrand = 0.25 * g2
    else:
        integrand = 0.25 * g2 + 0.5 * g2.mul_t()
    return integrand.integrate().eval(0.5)


def iterate_terms(problem, lam, c, n_terms):
    """Build [u_0, ..., u_{n_terms}] by the shared Volterra recurrence."""
    if n_terms < 1:
        raise ConfigError("n_terms must be >= 1")
    terms = [u0_template(problem, lam, c)]
    for n in range(n_terms):
        terms.append(_volterra(adomian_poly(terms, n)))
    return terms


def c_equation(problem, lam, c, n_terms):
    """Self-consistency function F(c); a root of F yields a branch.

    F(c) = c + sum_{i=0}^{n_terms-1} integral_0^{1/2} W(s) A_i(s) ds,
    which is zero exactly when the assembled series satisfies the
    problem's outer boundary condition.
    """
    terms = [u0_template(problem, lam, c)]
    total = 0.0
    for n in range(n_terms):
        poly = adomian_poly(terms, n)
        total += _c_weight(problem, poly)
        terms.append(_volterra(poly))
    return c + total


# ---------------------------------------------------------------------------
# Raw-array scalar evaluation of F: identical arithmetic to the PowerSeries
# path but without object overhead.  Used by the root-finding machinery,
# where F is evaluated thousands of times.
# ---------------------------------------------------------------------------

def _raw_pad_add(a, b):
    k = max(a.size, b.size)
    out = np.zeros(k)
    out[: a.size] += a
    out[: b.size] += b
    return out


def _raw_mul_t(a):
    return np.concatenate([np.zeros(2), a])


def _raw_integrate(a):
    k = np.arange(a.size)
    return np.concatenate([np.zeros(2), a / (k / 2.0 + 1.0)])


def _raw_eval(a, t):
    x = math.sqrt(t)
    out = 0.0
    for v in a[::-1]:
        out = out * x + v
    return out


def _raw_volterra(a):
    g2 = a[4:]
    return 0.25 * (_raw_integrate(_raw_mul_t(g2)) - _raw_mul_t(_raw_integrate(g2)))


def _raw_c_weight(problem, a):
    g2 = a[4:]
    if problem is ProblemKind.P1_Dirichlet:
        integrand = _raw_pad_add(0.25 * g2, -0.5 * _raw_mul_t(g2))
    elif problem is ProblemKind.P2_NeumannAtHalf:
        integrand = 0.25 * g2
    else:
        integrand = _raw_pad_add(0.25 * g2, 0.5 * _raw_mul_t(g2))
    return _raw_eval(_raw_integrate(integrand), 0.5)


def _c_equation_fast(problem, lam, c, n_terms):
    """Scalar F(c) on plain coefficient arrays; agrees with c_equation."""
    a = _U0_A[problem]
    u0 = np.zeros(5)
    u0[2] = -c - lam * a / 4.0
    u0[4] = lam / 4.0
    terms = [u0]
    total = 0.0
    for n in range(n_terms):
        acc = np.zeros(1)
        for j in range(n + 1):
            acc = _raw_pad_add(acc, np.convolve(terms[j], terms[n - j]))
        acc = -0.5 * acc
        total += _raw_c_weight(problem, acc)
        terms.append(_raw_volterra(acc))
    return c + total


# ---------------------------------------------------------------------------
# Vectorized F evaluation: series coefficients over a whole batch of c values
# are kept in (K, B) arrays (row k = coefficient of t^(k/2) for each c).
# ---------------------------------------------------------------------------

def _bpad_add(a, b):
    k = max(a.shape[0], b.shape[0])
    out = np.zeros((k, a.shape[1]))
    out[: a.shape[0]] += a
    out[: b.shape[0]] += b
    return out


def _bmul_t(a):
    return np.vstack([np.zeros((2, a.shape[1])), a])


def _bintegrate(a):
    k = np.arange(a.shape[0])[:, None]
    return np.vstack([np.zeros((2, a.shape[1])), a / (k / 2.0 + 1.0)])


def _beval(a, t):
    x = math.sqrt(t)
    out = np.zeros(a.shape[1])
    for row in a[::-1]:
        out = out * x + row
    return out


def _bvolterra(a):
    g2 = a[4:]
    return 0.25 * (_bintegrate(_bmul_t(g2)) - _bmul_t(_bintegrate(g2)))


def _bc_weight(problem, a):
    g2 = a[4:]
    if problem is ProblemKind.P1_Dirichlet:
        integrand = _bpad_add(0.25 * g2, -0.5 * _bmul_t(g2))
    elif problem is ProblemKind.P2_NeumannAtHalf:
        integrand = 0.25 * g2
    else:
        integrand = _bpad_add(0.25 * g2, 0.5 * _bmul_t(g2))
    return _beval(_bintegrate(integrand), 0.5)


def c_equation_batch(problem, lam, cs, n_terms):
    """F(c) for every c in `cs` at once; equals c_equation pointwise.

    Convolutions run through an FFT, whose absolute rounding error scales
    with the largest coefficient in the cascade.  That is negligible for
    moderate truncation orders but becomes visible once n_terms grows
    past ~30 with large |c|; the root finder therefore double-checks
    every candidate bracket with the direct scalar evaluator.
    """
    cs = np.asarray(cs, dtype=float)
    a = _U0_A[problem]
    u0 = np.zeros((5, cs.size))
    u0[2] = -cs - lam * a / 4.0
    u0[4] = lam / 4.0
    terms = [u0]
    total = np.zeros(cs.size)
    for n in range(n_terms):
        acc = None
        for j in range(n + 1):
            prod = fftconvolve(terms[j], terms[n - j], axes=0)
            acc = prod if acc is None else _bpad_add(acc, prod)
        acc = -0.5 * acc
        total += _bc_weight(problem, acc)
        terms.append(_bvolterra(acc))
    return cs + total


# ---------------------------------------------------------------------------
# Root finding and branch assembly
# ---------------------------------------------------------------------------

_BATCH_N_MAX = 30  # beyond this, scan with the direct scalar evaluator


def _bisect_root(problem, lam, n_terms, a, b, fa, fb):
    """Bisection until the bracket collapses to rounding width."""
    for _ in range(90):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = _c_equation_fast(problem, lam, m, n_terms)
        if fa * fm <= 0.0:
            b, fb = m, fm
        else:
            a, fa = m, fm
        if b - a < 1e-14 * max(1.0, abs(m)):
            break
    return 0.5 * (a + b)


def _newton_polish(problem, lam, c, n_terms, tol_c, steps=3, h=1e-6):
    """A few guarded Newton steps; keep the best |F| seen."""
    best_c = c
    best_f = abs(_c_equation_fast(problem, lam, c, n_terms))
    cur = c
    for _ in range(steps):
        if best_f <= tol_c:
            break
        f0 = _c_equation_fast(problem, lam, cur, n_terms)
        df = (_c_equation_fast(problem, lam, cur + h, n_terms)
              - _c_equation_fast(problem, lam, cur - h, n_terms)) / (2.0 * h)
        if df == 0.0 or not math.isfinite(df):
            break
        nxt = cur - f0 / df
        if not math.isfinite(nxt) or abs(nxt - cur) > 1.0:
            break
        fn = abs(_c_equation_fast(problem, lam, nxt, n_terms))
        if fn < best_f:
            best_c, best_f = nxt, fn
        cur = nxt
    return best_c, best_f


def _find_roots(problem, lam, config):
    """Dense scan + bisection + Newton polish over config.c_bracket."""
    lo, hi = config.c_bracket
    cs = np.linspace(lo, hi, 1001)
    if config.n_terms <= _BATCH_N_MAX:
        fs = c_equation_batch(problem, lam, cs, config.n_terms)
    else:
        fs = np.array([_c_equation_fast(problem, lam, c, config.n_terms)
                       for c in cs])
    roots = []
    for i in np.where(fs == 0.0)[0]:
        roots.append(float(cs[i]))
    sign = np.sign(fs)
    for i in np.where(sign[:-1] * sign[1:] < 0)[0]:
        a, b = float(cs[i]), float(cs[i + 1])
        # re-evaluate the endpoints directly; an FFT-noise artifact from
        # the batched scan has no sign change here and is dropped
        fa = _c_equation_fast(problem, lam, a, config.n_terms)
        fb = _c_equation_fast(problem, lam, b, config.n_terms)
        if fa == 0.0:
            roots.append(a)
            continue
        if fb == 0.0:
            roots.append(b)
            continue
        if fa * fb > 0.0:
            continue
        c0 = _bisect_root(problem, lam, config.n_terms, a, b, fa, fb)
        c0, _ = _newton_polish(problem, lam, c0, config.n_terms, config.tol_c)
        roots.append(c0)
    roots.sort()
    merged = []
    for c0 in roots:
        if merged and abs(c0 - merged[-1]) < 1e-8 * max(1.0, abs(c0)):
            continue
        merged.append(c0)
    return merged


def _build_branch(problem, lam, c, config, label):
    terms = iterate_terms(problem, lam, c, config.n_terms)
    solution = PowerSeries.zero()
    for term in terms:
        solution = solution + term
    if problem is ProblemKind.P1_Dirichlet:
        bc = solution.eval(0.5)
    elif problem is ProblemKind.P2_NeumannAtHalf:
        bc = solution.deriv_at(0.5)
    else:
        bc = solution.eval(0.5) - solution.deriv_at(0.5)
    branch = AdmBranch(
        problem=problem,
        lam=lam,
        c=c,
        terms=terms,
        solution=solution,
        branch_label=label,
        n_terms=config.n_terms,
        f_value=c_equation(problem, lam, c, config.n_terms),
        bc_residual=bc,
    )
    residual(branch, config.grid)
    return branch


def solve_branches(problem, lam, config=None):
    """All solution branches of the problem at this lambda.

    Scans F(c) over the configured bracket, refines every sign change,
    and assembles one branch per root.  Labels:

      lambda = 0   {trivial, upper}
      lambda > 0   {lower, upper} (lower = the shallower branch,
                   i.e. smaller c; it is the branch the monotone
                   iteration converges to)
      lambda < 0   {positive, negative} by the sign of the solution

    Raises NoRealRoot when the scan finds no root (lambda beyond the
    fold where the branch pair merges and disappears).
    """
    lam = float(lam)
    if config is None:
        config = AdmConfig()
    else:
        config.validate()
    roots = _find_roots(problem, lam, config)

    if lam == 0.0 and not any(abs(c) <= 1e-9 for c in roots):
        # c = 0 solves F exactly at lambda 0 even if the bracket skips it.
        roots.insert(0, 0.0)
        roots.sort()

    if not roots:
        raise NoRealRoot(
            "no real self-consistency constant for %s at lambda=%.17g "
            "within c in [%g, %g]; the branch pair has merged and vanished"
            % (problem.short, lam, config.c_bracket[0], config.c_bracket[1])
        )

    branches = []
    if lam == 0.0:
        for c in roots:
            label = "trivial" if abs(c) <= 1e-9 else "upper"
            branches.append(_build_branch(problem, lam, c, config, label))
    elif lam > 0.0:
        for i, c in enumerate(roots):
            label = "lower" if i == 0 and len(roots) > 1 else "upper"
            if len(roots) == 1:
                label = "lower"
            branches.append(_build_branch(problem, lam, c, config, label))
    else:
        for c in roots:
            branch = _build_branch(problem, lam, c, config, "positive")
            vals = branch.eval_grid(config.grid)
            peak = vals[np.argmax(np.abs(vals))]
            branch.branch_label = "positive" if peak > 0 else "negative"
            branches.append(branch)

    nontrivial = [b for b in branches if b.branch_label != "trivial"]
    if len(nontrivial) >= 2:
        gaps = [abs(nontrivial[i + 1].c - nontrivial[i].c)
                for i in range(len(nontrivial) - 1)]
        if min(gaps) < 1e-4:
            for b in nontrivial:
                b.near_critical = True
    return branches


def residual(branch, grid=None):
    """Pointwise defect r(t) = u'' - u^2/(8 t^2) - lambda/2 of the series.

    The second derivative and the quotient are formed term-wise, so the
    only error in r is the floating arithmetic of the coefficients.
    Updates branch.residual_max and returns [(t, r(t)), ...].  Without
    an explicit grid the default uniform grid on (0, 1/2] is used.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    u = branch.solution
    r_series = (u.second_derivative()
                - 0.125 * (u * u).scale_div_t2()
                + PowerSeries.from_terms([(0, -branch.lam / 2.0)]))
    values = r_series.eval_grid(grid)
    branch.residual_max = float(np.max(np.abs(values))) if grid.size else float("nan")
    return list(zip(grid.tolist(), values.tolist()))
