"""Radial back-transform: round trip, edge conditions, residual tables.

phi is defined so that phi'(r) = w(r)/r; the round-trip test recovers
that identity from the sampled phi with its own centered differences.
"""

import numpy as np
import pytest

from epibvp.adm import AdmConfig, ProblemKind, solve_branches
from epibvp.errors import ConfigError
from epibvp.radial import (RESIDUAL_R_POINTS, boundary_report,
                           profile_csv_name, residual_table, to_radial)

P1 = ProblemKind.P1_Dirichlet
P2 = ProblemKind.P2_NeumannAtHalf
P3 = ProblemKind.P3_Robin


def _fd4(x, y):
    h = x[1] - x[0]
    d = np.full_like(y, np.nan)
    d[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)
    return d


def _branches(prob, lam, n):
    return solve_branches(prob, lam, AdmConfig(n_terms=n))


def test_profile_anchors():
    for b in _branches(P2, 20.0, 25):
        p = to_radial(b)
        assert p.r[0] == 0.0 and p.r[-1] == 1.0
        assert p.phi[-1] == 0.0            # exact by construction
        assert p.w[0] == 0.0               # w = O(r^2) at the origin
        assert p.residual[0] == 0.0        # r = 0 row pinned by convention
        assert p.r.shape == (1001,)


def test_round_trip_slope_identity():
    for prob, lam, n in ((P1, 100.0, 30), (P2, 20.0, 25), (P3, 5.0, 25)):
        for b in _branches(prob, lam, n):
            p = to_radial(b)
            dphi = _fd4(p.r, p.phi)
            m = (p.r >= 0.1) & (p.r <= 0.9)
            worst = np.max(np.abs(p.r[m] * dphi[m] - p.w[m]))
            assert worst <= 1e-5, (prob, b.branch_label, worst)


def test_origin_flatness():
    b = _branches(P3, 5.0, 25)[1]
    p = to_radial(b)
    wmax = np.max(np.abs(p.w))
    near = np.abs(p.w[p.r <= 0.01])
    assert np.max(near) <= 1e-3 * wmax


def test_edge_conditions_per_problem():
    for prob, lam, n in ((P1, 100.0, 30), (P2, 20.0, 25), (P3, 5.0, 25)):
        for b in _branches(prob, lam, n):
            rep = boundary_report(to_radial(b))
            assert rep["pass"], (prob, b.branch_label, rep)
    # expressions are wired to the right problem
    reps = [boundary_report(to_radial(_branches(p, 5.0, 20)[0]))
            for p in (P1, P2, P3)]
    assert reps[0]["expression"] == "phi'(1)"
    assert reps[1]["expression"] == "phi'(1) + phi''(1)"
    assert reps[2]["expression"] == "phi''(1)"
    assert reps[0]["tol"] == 1e-6
    assert reps[1]["tol"] == 1e-4


def test_trivial_branch_maps_to_zero_state():
    b = _branches(P1, 0.0, 10)[0]
    assert b.branch_label == "trivial"
    p = to_radial(b)
    assert np.max(np.abs(p.w)) == 0.0
    assert np.max(np.abs(p.phi)) == 0.0
    rows = residual_table(b)
    assert all(v == 0.0 for _, v in rows)


def test_nonpositive_slope_for_nonnegative_intensity():
    for prob, lam, n in ((P1, 100.0, 15), (P2, 20.0, 15), (P3, 5.0, 15)):
        for b in _branches(prob, lam, n):
            p = to_radial(b)
            assert float(np.max(p.w)) <= 1e-8


def test_residual_table_points_and_convention():
    assert RESIDUAL_R_POINTS == tuple(np.arange(10) / 10.0)
    b = _branches(P2, 20.0, 25)[0]
    rows = residual_table(b)
    assert [r for r, _ in rows] == list(RESIDUAL_R_POINTS)
    assert rows[0] == (0.0, 0.0)
    assert max(abs(v) for _, v in rows) <= 1e-10
    custom = residual_table(b, (0.25, 0.75))
    assert len(custom) == 2 and custom[0][0] == 0.25
    with pytest.raises(ConfigError):
        residual_table(b, (0.5, 1.2))


def test_custom_grid_validation():
    b = _branches(P3, 5.0, 12)[0]
    with pytest.raises(ConfigError):
        to_radial(b, np.array([0.0, 0.5, 0.9]))        # must end at 1
    with pytest.raises(ConfigError):
        to_radial(b, np.array([0.5, 0.2, 1.0]))        # must increase
    p = to_radial(b, np.linspace(0.0, 1.0, 501))
    assert p.r.shape == (501,)


def test_csv_naming():
    bs = _branches(P2, 20.0, 12)
    assert profile_csv_name(to_radial(bs[0])) == "p2_20_lower.csv"
    assert profile_csv_name(to_radial(bs[1])) == "p2_20_upper.csv"
    b = _branches(P1, -1.0, 15)[0]
    name = profile_csv_name(to_radial(b))
    assert name in ("p1_-1_positive.csv", "p1_-1_negative.csv")
