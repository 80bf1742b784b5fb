# Copyright 2026 The scenario-hull Authors
# SPDX-License-Identifier: Apache-2.0

import json
import math

import numpy as np
import pytest

import scenario_hull as sh


def affine_problem(half_width=1.0):
    return sh.ProblemInstance(
        sh.AdmissibleSet.box([-half_width, -half_width], [half_width, half_width]),
        sh.UncertaintySpace.uniform_box([0.0, 0.0], [1.0, 1.0]),
        sh.ConstraintSpec.affine([0.0, 0.0], np.eye(2), 1.0, [0.0, 0.0]),
    )


def test_certificates():
    assert sh.hull_sample_size(0.1, 0.1, 2, 8, 1) == 208
    assert sh.sample_size_single(0.05, 0.01, 3) == 209
    assert sh.admissible_mpc_sample_size(0.1, 2, 6) == 179
    # Φ(0.1, 1, 10) = 0.9^10
    assert sh.binomial_tail(0.1, 1, 10) == pytest.approx(0.9**10, rel=1e-13)
    assert sh.hull_bound(0.1, 2, 8, 1, 208) <= 0.1
    with pytest.raises(ValueError):
        sh.binomial_tail(1.5, 1, 10)


def test_hull_and_membership():
    prob = affine_problem()
    hull = sh.build_hull(prob, 208, seed=3)
    assert len(hull) == 8
    verts = hull.vertices
    assert verts.shape == (8, 2)
    inside, weights, dist = sh.hull_membership(hull, hull.centroid())
    assert inside and dist <= 1e-9
    assert weights.sum() == pytest.approx(1.0)
    outside, _, dist = sh.hull_membership(hull, np.array([5.0, 5.0]))
    assert not outside and dist > 1.0

    point, value = sh.optimize_over_hull(lambda x: -x.sum(), hull, budget=64, seed=1)
    assert value == pytest.approx(-verts.sum(axis=1).max())
    assert sh.hull_membership(hull, point, 1e-7)[0]


def test_infeasible_raises():
    prob = sh.ProblemInstance(
        sh.AdmissibleSet.box([-1.0, -1.0], [1.0, 1.0]),
        sh.UncertaintySpace.uniform_box([0.0, 0.0], [1.0, 1.0]),
        sh.ConstraintSpec.affine([0.0, 0.0], np.eye(2), -5.0, [0.0, 0.0]),
    )
    with pytest.raises(sh.InfeasibleError):
        sh.build_hull(prob, 10, seed=0)


def test_violation_and_trials():
    est = sh.estimate_point_violation(affine_problem(3.0), np.array([2.0, 0.0]), 100000, 9)
    assert est["ci_low"] <= 0.5 <= est["ci_high"]
    low, high = sh.clopper_pearson(0, 100)
    assert low == 0.0 and 0.0 < high < 0.05
    rep = sh.run_feasibility_trials(affine_problem(), T=5, n_probe=10, K_mc=2000, seed=2)
    assert rep["N"] == 208 and rep["failures"] == 0


def test_counterexample():
    x, y, z = sh.counterexample_optimum(5)
    assert z == pytest.approx(x - 1.0)
    assert z == pytest.approx(-math.hypot(x, y))
    rep = sh.verify_support_constraints(5, 400)
    assert rep["all_support"]
    assert abs(rep["grid_value"] - rep["closed_form_value"]) < 1e-3


def test_run_command_matches_cli_layout():
    cfg = json.dumps({"command": "certify", "master_seed": 1, "certify": {"n": 2, "directions": 8}})
    rep = sh.run_command(cfg)
    rows = dict((r[0], r[1]) for r in rep["tables"]["bounds"]["rows"])
    assert rows["hull_sample_size"] == 208
    csv = rep["files"]["certify_bounds.csv"]
    assert csv.startswith("# command=certify table=bounds config_hash=" + rep["config_hash"])
    assert json.loads(rep["files"]["certify.json"])["tables"]["bounds"]["rows"][0][0] == "sample_size_single"
    with pytest.raises(sh.ConfigError):
        sh.run_command('{"command": "certify", "certify": {"bogus": 1}}')
