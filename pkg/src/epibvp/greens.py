"""Closed-form kernels of the shifted linear problems u'' + k u = h.

For k != 0 the two-point problem

    u'' + k u = h(t),   t in (0, 1/2],
    sqrt(t) u'(t) -> 0 as t -> 0,   plus one of
    u(1/2) = 0  (P1),  u'(1/2) = 0  (P2),  u(1/2) = u'(1/2)  (P3),

is inverted by u(t) = integral_0^{1/2} G(s,t) h(s) ds with a separable
piecewise kernel

    G(s,t) = -a(max(s,t)) * b(min(s,t)) / D.

The inner factor b vanishes at the origin (sinh for k < 0, sin for
k > 0) and the outer factor a carries the boundary condition at 1/2.
On their validity ranges all six kernels are non-positive, which is the
comparison principle driving the monotone iteration: a non-negative
right-hand side produces a non-positive solution.

Validity ranges for k > 0: P1 needs k < 4*pi^2, P2 needs k < pi^2, and
P3 needs k <= pi^2/4 together with sqrt(k)*cos(sqrt(k)/2) - sin(sqrt(k)/2) > 0.
For k < 0, P3 needs the hyperbolic version of the same expression to be
positive (it always is, but the guard stays explicit).  k = 0 is not a
shifted problem and is rejected.

The quadrature in apply_kernel exploits separability: on a grid of n
panels it forms the two cumulative integrals around the kink at s = t
once, giving the whole sampled solution in O(n) instead of O(n^2).
"""

import dataclasses
import math

import numpy as np
from scipy.integrate import cumulative_simpson

from .adm import ProblemKind
from .errors import ConfigError, OutOfValidity

__all__ = ["GreensKernel", "kernel_value", "apply_kernel", "sign_check",
           "positive_k_limit"]

_POS_K_LIMIT = {
    ProblemKind.P1_Dirichlet: 4.0 * math.pi ** 2,
    ProblemKind.P2_NeumannAtHalf: math.pi ** 2,
    ProblemKind.P3_Robin: math.pi ** 2 / 4.0,
}


def positive_k_limit(problem):
    """Largest admissible positive shift for the problem's kernel."""
    return _POS_K_LIMIT[problem]


def _check_validity(problem, k):
    if k == 0.0 or not math.isfinite(k):
        raise OutOfValidity("shift k must be a finite nonzero real, got %r" % (k,))
    if k > 0.0:
        limit = _POS_K_LIMIT[problem]
        q = math.sqrt(k)
        if problem is ProblemKind.P3_Robin:
            if k > limit:
                raise OutOfValidity(
                    "k=%g outside (0, pi^2/4] for the p3 kernel" % k)
            if q * math.cos(q / 2.0) - math.sin(q / 2.0) <= 0.0:
                raise OutOfValidity(
                    "k=%g violates sqrt(k)cos(sqrt(k)/2) > sin(sqrt(k)/2)" % k)
        elif k >= limit:
            raise OutOfValidity(
                "k=%g outside (0, %g) for the %s kernel"
                % (k, limit, problem.short))
    else:
        if problem is ProblemKind.P3_Robin:
            w = math.sqrt(-k)
            if w * math.cosh(w / 2.0) - math.sinh(w / 2.0) <= 0.0:
                raise OutOfValidity(
                    "k=%g violates sqrt(|k|)cosh(sqrt(|k|)/2) > sinh(sqrt(|k|)/2)" % k)


@dataclasses.dataclass(frozen=True)
class GreensKernel:
    """Kernel of the shifted problem for one (problem, k) pair."""

    problem: ProblemKind
    k: float

    def __post_init__(self):
        _check_validity(self.problem, float(self.k))

    @property
    def variant(self):
        return "hyperbolic" if self.k < 0 else "trigonometric"

    def parts(self):
        """(a, b, D) with G(s,t) = -a(max)*b(min)/D; a, b accept arrays."""
        prob, k = self.problem, float(self.k)
        if k < 0.0:
            w = math.sqrt(-k)
            b = lambda x: np.sinh(w * np.asarray(x, dtype=float))
            if prob is ProblemKind.P1_Dirichlet:
                a = lambda x: np.sinh(w * (0.5 - np.asarray(x, dtype=float)))
                D = w * math.sinh(w / 2.0)
            elif prob is ProblemKind.P2_NeumannAtHalf:
                a = lambda x: np.cosh(w * (0.5 - np.asarray(x, dtype=float)))
                D = w * math.cosh(w / 2.0)
            else:
                def a(x):
                    y = w * (0.5 - np.asarray(x, dtype=float))
                    return w * np.cosh(y) - np.sinh(y)
                D = w * (w * math.cosh(w / 2.0) - math.sinh(w / 2.0))
        else:
            q = math.sqrt(k)
            b = lambda x: np.sin(q * np.asarray(x, dtype=float))
            if prob is ProblemKind.P1_Dirichlet:
                a = lambda x: np.sin(q * (0.5 - np.asarray(x, dtype=float)))
                D = q * math.sin(q / 2.0)
            elif prob is ProblemKind.P2_NeumannAtHalf:
                a = lambda x: np.cos(q * (0.5 - np.asarray(x, dtype=float)))
                D = q * math.cos(q / 2.0)
            else:
                # mirrored branch uses sin, matching the s <= t branch by
                # the symmetry of the construction
                def a(x):
                    y = q * (0.5 - np.asarray(x, dtype=float))
                    return q * np.cos(y) - np.sin(y)
                D = q * (q * math.cos(q / 2.0) - math.sin(q / 2.0))
        return a, b, D

    def __call__(self, s, t):
        return kernel_value(self, s, t)


def kernel_value(kern, s, t):
    """G(s, t), elementwise over broadcast arrays.

    Piecewise: -a(t)b(s)/D when s <= t and -a(s)b(t)/D when t <= s,
    which is -a(max(s,t))*b(min(s,t))/D in either case.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(s > 0.5) or np.any(t < 0) or np.any(t > 0.5):
        raise OutOfValidity("kernel arguments must lie in [0, 1/2]")
    a, b, D = kern.parts()
    hi = np.maximum(s, t)
    lo = np.minimum(s, t)
    out = -a(hi) * b(lo) / D
    if out.ndim == 0:
        return float(out)
    return out


def apply_kernel(kern, ts, h):
    """u(t_i) = integral_0^{1/2} G(s, t_i) h(s) ds on the sample grid.

    `ts` must be increasing points in (0, 1/2] ending at 1/2; `h` holds
    the integrand samples h(t_i).  The kink at s = t splits the integral
    into b-weighted mass below t and a-weighted mass above t; both parts
    come from one cumulative Simpson pass.  The sliver [0, ts[0]] uses
    h ~ h(ts[0]) with the exact antiderivative of b, which is adequate
    because the iteration only ever supplies bounded integrands there.
    """
    ts = np.asarray(ts, dtype=float)
    h = np.asarray(h, dtype=float)
    if ts.ndim != 1 or ts.size < 3 or h.shape != ts.shape:
        raise ConfigError("need matching 1-d sample arrays with >= 3 points")
    if ts[0] <= 0.0 or abs(ts[-1] - 0.5) > 1e-9 or np.any(np.diff(ts) <= 0):
        raise ConfigError("grid must increase within (0, 1/2] and end at 1/2")
    a, b, D = kern.parts()
    at = a(ts)
    bt = b(ts)
    below = cumulative_simpson(bt * h, x=ts, initial=0.0)
    k = float(kern.k)
    if k < 0.0:
        w = math.sqrt(-k)
        sliver = h[0] * (math.cosh(w * ts[0]) - 1.0) / w
    else:
        q = math.sqrt(k)
        sliver = h[0] * (1.0 - math.cos(q * ts[0])) / q
    below = below + sliver
    above_cum = cumulative_simpson(at * h, x=ts, initial=0.0)
    above = above_cum[-1] - above_cum
    return -(at * below + bt * above) / D


def sign_check(kern, resolution=200):
    """Sample G on a resolution^2 grid and report the largest value.

    The check passes when max G <= 1e-12: the kernels are non-positive
    on their validity ranges, so anything above rounding noise signals
    a formula or range error.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    pts = np.linspace(0.0, 0.5, resolution)
    a, b, D = kern.parts()
    hi = np.maximum.outer(pts, pts)
    lo = np.minimum.outer(pts, pts)
    gmax = float(np.max(-a(hi) * b(lo) / D))
    return {
        "problem": kern.problem.short,
        "k": float(kern.k),
        "resolution": int(resolution),
        "max_value": gmax,
        "pass": bool(gmax <= 1e-12),
    }
