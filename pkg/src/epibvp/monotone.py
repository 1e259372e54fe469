"""Monotone iteration between ordered pairs of lower/upper solutions.

With a non-positive shifted kernel the comparison principle runs in
reverse: upper solutions sit below lower solutions.  Starting from the
lower solution alpha_0 = 0 and an upper solution seed

    beta_0(t) = -C t (A - sqrt(2 t)),   A in {1, 3/2, 2} per problem,

each sweep solves the shifted linear problem

    u'' + k u = u_prev^2 / (8 t^2) + lambda / 2 + k u_prev

through the kernel quadrature.  The alpha chain descends, the beta
chain ascends, every alpha stays above every beta, and both converge to
solutions of the nonlinear problem (for the problems here, to the same
shallow branch that the series engine labels "lower").

Admissible seeds exist for 0 <= lambda <= 144 (P1), <= 256/9 (P2) and
<= 9 (P3): the seed constant is C = lambda/3, lambda/2 or 2*lambda/3
respectively, capped at 48, 128/9 and 6.  The smallest admissible C is
used so the initial sandwich is as tight as possible.

For negative lambda the zero function is no longer a lower solution and
the ordering theory does not apply; iterate() still runs as a plain
fixed-point sweep when ordering enforcement is switched off, which is
how the command-line front end handles lambda < 0.
"""

import dataclasses
import math

import numpy as np

from .adm import ProblemKind
from .errors import NoAdmissibleSeed, OrderingViolation
from .greens import GreensKernel, apply_kernel, positive_k_limit
from .powerseries import PowerSeries

__all__ = [
    "SeedFunction",
    "IterationTrace",
    "seed_upper",
    "relaxed_seed",
    "iterate",
    "verify_lower_upper",
    "default_ts",
]

_SEED_A = {
    ProblemKind.P1_Dirichlet: 1.0,
    ProblemKind.P2_NeumannAtHalf: 1.5,
    ProblemKind.P3_Robin: 2.0,
}
_SEED_C_FACTOR = {
    ProblemKind.P1_Dirichlet: 1.0 / 3.0,
    ProblemKind.P2_NeumannAtHalf: 1.0 / 2.0,
    ProblemKind.P3_Robin: 2.0 / 3.0,
}
_SEED_C_CAP = {
    ProblemKind.P1_Dirichlet: 48.0,
    ProblemKind.P2_NeumannAtHalf: 128.0 / 9.0,
    ProblemKind.P3_Robin: 6.0,
}

ORDER_TOL = 1e-8


def seed_lambda_max(problem):
    """Largest lambda with an admissible upper-solution seed."""
    return _SEED_C_CAP[problem] / _SEED_C_FACTOR[problem]


def default_ts(n=2049, t_min=1e-6):
    """Uniform iteration grid on [t_min, 1/2].

    The integrand u^2/(8 s^2) is bounded because u ~ c s near the
    origin, but evaluating it still needs s > 0; t_min keeps the grid
    clear of the singular endpoint.
    """
    return np.linspace(t_min, 0.5, n)


@dataclasses.dataclass(frozen=True)
class SeedFunction:
    """Upper-solution seed beta(t) = -C t (A - sqrt(2 t))."""

    problem: ProblemKind
    C: float

    @property
    def A(self):
        return _SEED_A[self.problem]

    def series(self):
        return PowerSeries.from_terms(
            [(2, -self.C * self.A), (3, self.C * math.sqrt(2.0))]
        )

    def sample(self, ts):
        ts = np.asarray(ts, dtype=float)
        return -self.C * ts * (self.A - np.sqrt(2.0 * ts))

    def second_derivative(self, ts):
        """beta''(t) = 3C / (2 sqrt(2 t)); the linear part drops out."""
        ts = np.asarray(ts, dtype=float)
        return 3.0 * self.C / (2.0 * np.sqrt(2.0 * ts))

    def inequality_margin(self, ts, lam):
        """beta'' - beta^2/(8 t^2) - lambda/2, pointwise (>= 0 if admissible)."""
        ts = np.asarray(ts, dtype=float)
        beta = self.sample(ts)
        return self.second_derivative(ts) - beta * beta / (8.0 * ts * ts) - lam / 2.0


def seed_upper(problem, lam):
    """Smallest admissible upper-solution seed for this lambda.

    Raises NoAdmissibleSeed outside 0 <= lambda <= seed_lambda_max(problem),
    or if the constructed seed fails the upper-solution inequality on the
    default grid (which would indicate a broken constant table).
    """
    lam = float(lam)
    lam_max = seed_lambda_max(problem)
    if lam < 0.0 or lam > lam_max:
        raise NoAdmissibleSeed(
            "no admissible seed for %s at lambda=%.17g (range is [0, %.17g])"
            % (problem.short, lam, lam_max)
        )
    seed = SeedFunction(problem, _SEED_C_FACTOR[problem] * lam)
    margin = seed.inequality_margin(default_ts(), lam)
    if np.min(margin) < -1e-9:
        raise NoAdmissibleSeed(
            "seed for %s at lambda=%.17g violates the upper-solution "
            "inequality by %g" % (problem.short, lam, -float(np.min(margin)))
        )
    return seed


def relaxed_seed(problem, lam):
    """Seed for runs outside the ordered theory (negative lambda).

    Uses the same template with C = factor * |lambda|; no inequality is
    claimed, it just starts the fixed-point sweep below zero.
    """
    return SeedFunction(problem, _SEED_C_FACTOR[problem] * abs(float(lam)))


@dataclasses.dataclass
class IterationTrace:
    """Everything one iterate() run produced."""

    problem: ProblemKind
    k: float
    lam: float
    ts: np.ndarray
    alphas: list
    betas: list
    converged: bool
    iterations: int
    final_gap: float
    alpha_changes: list
    beta_changes: list
    ordering_margin: float       # most negative margin seen (>= -ORDER_TOL ok)
    ordering_checked: bool
    k_prime_window: float        # smallest admissible positive shift seen
    seed_C: float

    @property
    def alpha(self):
        return self.alphas[-1]

    @property
    def beta(self):
        return self.betas[-1]


def _rhs(u, ts, lam, k):
    return u * u / (8.0 * ts * ts) + lam / 2.0 + k * u


def iterate(problem, k, lam, seed, max_iter=200, tol=1e-10, ts=None,
            enforce_ordering=True):
    """Run the alpha and beta chains until both settle.

    alpha starts from 0, beta from the seed.  Each sweep applies the
    shifted kernel to h(u) = u^2/(8t^2) + lambda/2 + k u.  Stops when
    the sup change of both chains drops below tol, or after max_iter
    sweeps.  With enforce_ordering the chain inequalities

        beta_n <= beta_{n+1},  alpha_{n+1} <= alpha_n,  beta_n <= alpha_n

    are checked to ORDER_TOL and a breach raises OrderingViolation.

    For k > 0 the iteration also tracks the window min(limit, -max u/(2t))
    per sweep; taken literally with alpha_0 = 0 the window is empty, so
    it is recorded in the trace rather than enforced.
    """
    lam = float(lam)
    k = float(k)
    kern = GreensKernel(problem, k)
    if ts is None:
        ts = default_ts()
    ts = np.asarray(ts, dtype=float)

    alpha = np.zeros_like(ts)
    beta = seed.sample(ts)
    alphas, betas = [alpha], [beta]
    alpha_changes, beta_changes = [], []
    worst_margin = 0.0
    k_window = positive_k_limit(problem)
    converged = False
    n_done = 0

    if enforce_ordering and np.min(alpha - beta) < -ORDER_TOL:
        raise OrderingViolation(
            "seed lies above the zero lower solution by %g"
            % -float(np.min(alpha - beta))
        )

    for n_done in range(1, max_iter + 1):
        new_alpha = apply_kernel(kern, ts, _rhs(alpha, ts, lam, k))
        new_beta = apply_kernel(kern, ts, _rhs(beta, ts, lam, k))
        da = float(np.max(np.abs(new_alpha - alpha)))
        db = float(np.max(np.abs(new_beta - beta)))
        alpha_changes.append(da)
        beta_changes.append(db)

        if enforce_ordering:
            margins = (
                float(np.min(alpha - new_alpha)),    # alpha descends
                float(np.min(new_beta - beta)),      # beta ascends
                float(np.min(new_alpha - new_beta)), # sandwich
            )
            worst_margin = min(worst_margin, *margins)
            if worst_margin < -ORDER_TOL:
                raise OrderingViolation(
                    "ordering chain breached by %g at sweep %d (k=%g, "
                    "lambda=%g): bad quadrature or inadmissible shift"
                    % (-worst_margin, n_done, k, lam)
                )
        if k > 0.0:
            with np.errstate(divide="ignore"):
                k_window = min(k_window,
                               float(-np.max(new_alpha / (2.0 * ts))))

        alpha, beta = new_alpha, new_beta
        alphas.append(alpha)
        betas.append(beta)
        if da < tol and db < tol:
            converged = True
            break

    return IterationTrace(
        problem=problem,
        k=k,
        lam=lam,
        ts=ts,
        alphas=alphas,
        betas=betas,
        converged=converged,
        iterations=n_done,
        final_gap=float(np.max(np.abs(alpha - beta))),
        alpha_changes=alpha_changes,
        beta_changes=beta_changes,
        ordering_margin=worst_margin,
        ordering_checked=bool(enforce_ordering),
        k_prime_window=float(k_window),
        seed_C=float(seed.C),
    )


def _second_diff(values, h):
    """Centered second difference on a uniform grid (interior points)."""
    return (values[2:] - 2.0 * values[1:-1] + values[:-2]) / (h * h)


def _one_sided_deriv_end(values, h):
    """Second-order one-sided first derivative at the last grid point."""
    return (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * h)


def verify_lower_upper(problem, ts, values, lam, kind, interior_min=0.01,
                       margin_tol=1e-4):
    """Check the defining differential inequality of a lower/upper candidate.

    kind='lower' requires u'' <= u^2/(8t^2) + lambda/2 with the relaxed
    boundary (u(1/2) <= 0, u'(1/2) <= 0 or u(1/2) <= u'(1/2) per
    problem); kind='upper' requires the reversed inequalities.  Both
    derivatives come from finite differences on the sample grid, so the
    check skips t < interior_min where difference noise on sqrt(t)-type
    seeds would dominate, and passes margins down to -margin_tol.

    Returns a report dict with the worst interior and boundary margins.
    """
    if kind not in ("lower", "upper"):
        raise ValueError("kind must be 'lower' or 'upper'")
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    steps = np.diff(ts)
    if not np.allclose(steps, steps[0], rtol=1e-8, atol=0.0):
        raise ValueError("verification needs a uniform grid")
    h = float(steps[0])

    d2 = _second_diff(values, h)
    mid_t = ts[1:-1]
    mid_u = values[1:-1]
    rhs = mid_u * mid_u / (8.0 * mid_t * mid_t) + lam / 2.0
    keep = mid_t >= interior_min
    if kind == "lower":
        interior = rhs[keep] - d2[keep]
    else:
        interior = d2[keep] - rhs[keep]
    worst_interior = float(np.min(interior))

    u_end = float(values[-1])
    du_end = float(_one_sided_deriv_end(values, h))
    if problem is ProblemKind.P1_Dirichlet:
        bc = -u_end
    elif problem is ProblemKind.P2_NeumannAtHalf:
        bc = -du_end
    else:
        bc = du_end - u_end
    if kind == "upper":
        bc = -bc
    passed = worst_interior >= -margin_tol and bc >= -margin_tol
    return {
        "problem": problem.short,
        "kind": kind,
        "lambda": float(lam),
        "worst_interior_margin": worst_interior,
        "boundary_margin": float(bc),
        "margin_tol": float(margin_tol),
        "pass": bool(passed),
    }
