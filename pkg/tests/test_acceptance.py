"""Acceptance gate: the seven headline claims, one pass/fail line each.

Every test prints a single summary line (visible with -s or in failure
reports) and asserts the claim at its stated tolerance.  Shared solves
are cached at module scope so the suite stays well under the runtime
budget.
"""

import math
import time

import numpy as np
import pytest

from epibvp.adm import AdmConfig, ProblemKind, solve_branches
from epibvp.errors import NoRealRoot
from epibvp.greens import GreensKernel, kernel_value, positive_k_limit, sign_check
from epibvp.lambda_scan import bound_interval, existence_profile, find_critical
from epibvp.monotone import iterate, seed_upper
from epibvp.radial import boundary_report, residual_table, to_radial

P1 = ProblemKind.P1_Dirichlet
P2 = ProblemKind.P2_NeumannAtHalf
P3 = ProblemKind.P3_Robin

FOLD_WINDOWS = {P1: (160.0, 178.0), P2: (31.4, 32.4), P3: (10.8, 11.63)}

_CACHE = {}


def _branches(prob, lam, n, bracket=(-60.0, 60.0)):
    key = (prob, lam, n, bracket)
    if key not in _CACHE:
        _CACHE[key] = solve_branches(prob, lam,
                                     AdmConfig(n_terms=n, c_bracket=bracket))
    return _CACHE[key]


def _report(ok, text):
    print("%s  %s" % ("PASS" if ok else "FAIL", text))
    assert ok, text


def test_criterion_1_critical_intensity():
    """Bisected fold inside the target window and the proven bounds."""
    details = []
    ok = True
    for prob in (P1, P2, P3):
        t0 = time.time()
        rep = find_critical(prob)
        elapsed = time.time() - t0
        lo, hi = FOLD_WINDOWS[prob]
        blo, bhi = bound_interval(prob)
        good = (lo <= rep.midpoint <= hi and blo <= rep.midpoint <= bhi
                and rep.n_terms == 15 and elapsed < 120.0)
        ok = ok and good
        details.append("%s=%.4f(%.0fs)" % (prob.short, rep.midpoint, elapsed))
    _report(ok, "criterion 1 critical intensities: " + ", ".join(details))


def test_criterion_2_residual_tables():
    """Defect tables: exact zeros for the trivial branch, tight bounds
    for the converged branches at the recorded near-critical intensities."""
    ok = True
    notes = []

    for prob in (P1, P2, P3):
        trivial = _branches(prob, 0.0, 10)[0]
        rows = residual_table(trivial)
        exact = all(v == 0.0 for _, v in rows)
        ok = ok and exact
        notes.append("%s trivial %s" % (prob.short,
                                        "=0" if exact else "NONZERO"))

    for prob, lam in ((P2, 31.94), (P3, 11.34)):
        for b in _branches(prob, lam, 30, bracket=(0.0, 20.0)):
            worst = max(abs(v) for _, v in residual_table(b))
            good = worst <= 1e-8
            ok = ok and good
            notes.append("%s@%g %s %.1e" % (prob.short, lam,
                                            b.branch_label, worst))

    # steep problem: acceptance restricted to r <= 0.7
    for lam, bracket in ((0.0, (55.0, 75.0)), (168.76, (28.0, 36.0))):
        for b in _branches(P1, lam, 51, bracket=bracket):
            if b.branch_label == "trivial":
                continue
            rows = [(r, v) for r, v in residual_table(b) if r <= 0.7]
            worst = max(abs(v) for _, v in rows)
            good = worst <= 1e-6
            ok = ok and good
            notes.append("p1@%g %s %.1e" % (lam, b.branch_label, worst))

    _report(ok, "criterion 2 residual tables: " + "; ".join(notes))


def test_criterion_3_branch_structure():
    """Exact branch multiplicities and signs across the lambda regimes."""
    ok = True
    notes = []
    ts = np.linspace(1e-4, 0.5, 400)

    for prob in (P1, P2, P3):
        labels = [b.branch_label for b in _branches(prob, 0.0, 15)]
        good = labels == ["trivial", "upper"]
        ok = ok and good
        notes.append("%s@0 %s" % (prob.short, labels))

    for prob, lam in ((P1, 100.0), (P2, 20.0), (P3, 5.0)):
        bs = _branches(prob, lam, 15)
        nontrivial = [b for b in bs if b.branch_label != "trivial"]
        signs_ok = all(float(np.max(b.eval_grid(ts))) <= 1e-8
                       for b in nontrivial)
        good = len(nontrivial) == 2 and signs_ok
        ok = ok and good
        notes.append("%s@%g n=%d nonpos=%s" % (prob.short, lam,
                                               len(nontrivial), signs_ok))

    for prob in (P1, P2, P3):
        for lam in (-1.0, -15.0):
            bs = _branches(prob, lam, 15)
            labels = sorted(b.branch_label for b in bs)
            good = labels == ["negative", "positive"]
            ok = ok and good
            notes.append("%s@%g %s" % (prob.short, lam, "+/-" if good
                                       else str(labels)))

    _report(ok, "criterion 3 branch structure: " + "; ".join(notes))


def _ode_jump_bc_invariants(kern):
    """Worst violations of the three kernel invariants for one kernel."""
    k = kern.k
    h_ode, h_jump, h_bc = 1e-3, 1e-5, 1e-4
    worst_ode = worst_jump = worst_bc = 0.0
    for s, t in ((0.45, 0.2), (0.1, 0.35), (0.3, 0.12)):
        g = lambda x: kernel_value(kern, s, x)
        fd2 = (-g(t + 2 * h_ode) + 16 * g(t + h_ode) - 30 * g(t)
               + 16 * g(t - h_ode) - g(t - 2 * h_ode)) / (12 * h_ode ** 2)
        scale = max(1.0, abs(k * g(t)))
        worst_ode = max(worst_ode, abs(fd2 + k * g(t)) / scale)
    for s in (0.15, 0.3, 0.42):
        g = lambda x: kernel_value(kern, s, x)
        right = (-3 * g(s) + 4 * g(s + h_jump) - g(s + 2 * h_jump)) \
            / (2 * h_jump)
        left = (3 * g(s) - 4 * g(s - h_jump) + g(s - 2 * h_jump)) \
            / (2 * h_jump)
        worst_jump = max(worst_jump, abs(right - left - 1.0))
    for s in (0.12, 0.31, 0.47):
        g = lambda x: kernel_value(kern, s, x)
        worst_bc = max(worst_bc, abs(g(0.0)))
        d_end = (25 * g(0.5) - 48 * g(0.5 - h_bc) + 36 * g(0.5 - 2 * h_bc)
                 - 16 * g(0.5 - 3 * h_bc) + 3 * g(0.5 - 4 * h_bc)) \
            / (12 * h_bc)
        if kern.problem is P1:
            worst_bc = max(worst_bc, abs(g(0.5)))
        elif kern.problem is P2:
            worst_bc = max(worst_bc, abs(d_end))
        else:
            worst_bc = max(worst_bc, abs(g(0.5) - d_end))
    return worst_ode, worst_jump, worst_bc


def test_criterion_4_greens_kernels():
    """Nonpositivity on 200x200 grids at five shifts per problem, plus
    the ODE, unit-jump, and boundary invariants."""
    ok = True
    notes = []
    for prob in (P1, P2, P3):
        limit = positive_k_limit(prob)
        for k in (-50.0, -10.0, -1.0, 0.5 * limit, 0.9 * limit):
            kern = GreensKernel(prob, k)
            rep = sign_check(kern, resolution=200)
            worst_ode, worst_jump, worst_bc = _ode_jump_bc_invariants(kern)
            good = (rep["pass"] and rep["max_value"] <= 1e-12
                    and worst_ode <= 1e-6 and worst_jump <= 1e-4
                    and worst_bc <= 1e-6)
            ok = ok and good
            if not good:
                notes.append("%s k=%.3g sign=%.1e ode=%.1e jump=%.1e bc=%.1e"
                             % (prob.short, k, rep["max_value"], worst_ode,
                                worst_jump, worst_bc))
    _report(ok, "criterion 4 kernel checks: "
            + ("all 15 shift samples clean" if ok else "; ".join(notes)))


def test_criterion_5_monotone_engine():
    """Ordered two-sided iteration lands on the series lower branch."""
    ok = True
    notes = []
    for prob, lam in ((P1, 100.0), (P2, 20.0), (P3, 5.0)):
        trace = iterate(prob, -1.0, lam, seed_upper(prob, lam))
        lower = _branches(prob, lam, 25)[0]
        gap = float(np.max(np.abs(lower.eval_grid(trace.ts) - trace.alpha)))
        good = (trace.converged and trace.iterations <= 200
                and trace.ordering_checked
                and trace.ordering_margin <= 1e-8 and gap <= 1e-4)
        ok = ok and good
        notes.append("%s@%g sweeps=%d gap=%.1e" % (prob.short, lam,
                                                   trace.iterations, gap))
    _report(ok, "criterion 5 monotone engine: " + "; ".join(notes))


def test_criterion_6_existence_monotonicity():
    """Branch count never increases with lambda and stays at zero."""
    ok = True
    notes = []
    cfg = AdmConfig(n_terms=15)
    stops = {P1: 185, P2: 45, P3: 20}
    for prob in (P1, P2, P3):
        lams = np.arange(0, stops[prob] + 1, 5, dtype=float)
        counts = [r["count"] for r in existence_profile(prob, lams, cfg)]
        non_increasing = all(b <= a for a, b in zip(counts, counts[1:]))
        hits_zero = 0 in counts
        stays_zero = all(c == 0 for c in
                         counts[counts.index(0):]) if hits_zero else False
        good = non_increasing and hits_zero and stays_zero
        ok = ok and good
        notes.append("%s 2->0 at %g" % (prob.short,
                                        lams[counts.index(0)]
                                        if hits_zero else math.nan))
    _report(ok, "criterion 6 existence monotonicity: " + "; ".join(notes))


def test_criterion_7_radial_back_transform():
    """phi(1)=0 exactly, edge conditions hold, slope is nonpositive."""
    ok = True
    notes = []
    cases = [(P1, 100.0, 30, (-60.0, 60.0)),
             (P2, 20.0, 25, (-60.0, 60.0)),
             (P3, 5.0, 25, (-60.0, 60.0)),
             (P2, 31.94, 30, (0.0, 20.0)),
             (P3, 11.34, 30, (0.0, 20.0))]
    for prob, lam, n, bracket in cases:
        for b in _branches(prob, lam, n, bracket=bracket):
            p = to_radial(b)
            edge = boundary_report(p)
            good = (p.phi[-1] == 0.0 and edge["pass"]
                    and float(np.max(p.w)) <= 1e-8)
            ok = ok and good
            if not good:
                notes.append("%s@%g %s edge=%.1e wmax=%.1e"
                             % (prob.short, lam, b.branch_label,
                                edge["value"], float(np.max(p.w))))
    _report(ok, "criterion 7 radial transform: "
            + ("all branches clean" if ok else "; ".join(notes)))
