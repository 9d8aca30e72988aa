"""Smoke tests for the python bindings: each public entry point is exercised
once with a small workload and checked against an independently computable
value."""

import json
import math

import numpy as np
import pytest

import entroprox as ep

PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])
ZERO2 = np.zeros(2)


def test_md_update_matches_closed_form():
    z = np.array([0.5, 0.5])
    b = np.array([1.0, 0.0])
    eta = 0.7
    out = ep.md_update(z, b, eta)
    w = np.array([0.5 * math.exp(-0.7), 0.5])
    np.testing.assert_allclose(out, w / w.sum(), rtol=0, atol=1e-15)
    assert math.isclose(out.sum(), 1.0, abs_tol=1e-12)


def test_md_update_rejects_non_simplex_input():
    with pytest.raises(ValueError):
        ep.md_update(np.array([0.5, 0.6]), ZERO2, 0.1)


def test_duality_gap_zero_at_equilibrium():
    gap = ep.duality_gap(PENNIES, ZERO2, np.array([0.5, 0.5]), np.array([0.5, 0.5]))
    assert 0.0 <= gap < 1e-12


def test_duality_gap_positive_off_equilibrium():
    # Best responses to (p, q) = ((0.9, 0.1), (0.9, 0.1)): the maximizer
    # gains |<a_row, p>| = 0.8 and the minimizer saves the same, so the gap
    # is 1.6 exactly.
    skew = np.array([0.9, 0.1])
    gap = ep.duality_gap(PENNIES, ZERO2, skew, skew)
    assert math.isclose(gap, 1.6, abs_tol=1e-12)


def test_solve_matrix_game_converges_and_reports_constants():
    res = ep.solve_matrix_game(
        PENNIES, ZERO2, T=2000, method="md", p0=np.array([0.9, 0.1]),
        q0=np.array([0.9, 0.1]),
    )
    assert res["step_rule"] == "md_deterministic"
    # M = max column sup-norm of the gradient fields = 1; eta follows the
    # deterministic schedule (2 / M) * sqrt(D0 / T).
    d0 = 2.0 * math.log(2.0)
    assert math.isclose(res["eta"], 2.0 * math.sqrt(d0 / 2000.0), rel_tol=1e-12)
    gaps = res["gap_ergodic"]
    assert gaps[-1] < 0.05 * gaps[0]
    fit = ep.fit_rate(res["t"], gaps, t_min=10, t_max=2000)
    assert not fit["indeterminate"]
    assert fit["slope"] < -0.3
    np.testing.assert_allclose(res["p_bar"].sum(), 1.0, atol=1e-12)


def test_solve_matrix_game_stochastic_is_seeded():
    kw = dict(T=200, method="mp", noise_bound=0.5)
    a = ep.solve_matrix_game(PENNIES, ZERO2, seed=7, **kw)
    b = ep.solve_matrix_game(PENNIES, ZERO2, seed=7, **kw)
    c = ep.solve_matrix_game(PENNIES, ZERO2, seed=8, **kw)
    assert a["gap_ergodic"][-1] == b["gap_ergodic"][-1]
    assert a["gap_ergodic"][-1] != c["gap_ergodic"][-1]
    assert a["step_rule"] == "mp_stochastic"


def test_run_config_roundtrip():
    cfg = """
    [experiment]
    solver = md
    label = smoke
    T = 500
    seeds = 3

    [game]
    source = random
    m = 4
    n = 6
    seed = 2
    """
    res = ep.run_config(cfg, out="")
    assert res["exit_code"] == 0
    assert res["bounds_checked"] and res["bounds_ok"]
    summary = json.loads(res["summary_json"])
    assert summary["config"]["experiment"]["solver"] == "md"
    assert summary["seeds"][0]["seed"] == 3
    assert res["trace_paths"] == []


def test_run_config_rejects_unknown_keys():
    with pytest.raises(RuntimeError, match="experiment.TT"):
        ep.run_config("[experiment]\nsolver = md\nTT = 10\n")


def test_foundations_report_items():
    items = ep.foundations_report(points=16, trials=25, seed=1)
    assert [it["key"] for it in items] == list("abcdefghij")
    identities = [it for it in items if not it["has_inequality"]]
    assert identities and all(it["worst_residual"] < 1e-9 for it in identities)


def test_gaussian_chain_check_small():
    res = ep.gaussian_chain_check(
        total_steps=20000, burn_in=2000, n_samples=1000, gamma=1e-2, eps=1.0,
        seed=1,
    )
    assert abs(res["mean"]) < 0.3
    assert 0.5 < res["variance"] < 1.5
    assert len(res["samples"]) == 1000
