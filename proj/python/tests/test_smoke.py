# Copyright 2026 The parshoot Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import numpy as np
import pytest

import parshoot


def test_registry_lists_builtin_problems():
    names = parshoot.available_problems()
    assert "ds-example" in names and "ds-reduced" in names
    with pytest.raises(parshoot.UnknownProblem):
        parshoot.problem("nope")


def test_problem_dimensions():
    ds = parshoot.problem("ds-example")
    assert (ds.n, ds.l, ds.m, ds.d_eta) == (3, 1, 1, 3)
    assert ds.shooting_unknowns == 9
    assert parshoot.problem("ds-reduced").shooting_unknowns == 2


def test_elimination_closed_form():
    ds = parshoot.problem("ds-example")
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = rng.uniform(-1, 1, 3)
        p = np.array([*rng.uniform(-1, 1, 2), 1.0])
        u, v = parshoot.eliminate_controls(ds, x, p)
        assert u[0] == pytest.approx(-p[0] / 2, abs=1e-9)
        assert v[0] == pytest.approx(x[0], abs=1e-9)


def test_gauss_newton_reaches_origin():
    red = parshoot.problem("ds-reduced")
    rep = parshoot.gauss_newton(red, np.array([0.5, -0.7]), grid=200)
    assert rep["converged"]
    assert max(abs(c) for c in rep["solution"]) < 1e-8


def test_trajectory_shapes():
    red = parshoot.problem("ds-reduced")
    traj = parshoot.trajectory(red, np.zeros(2), grid=50)
    assert traj["t"].shape == (51,)
    assert traj["x"].shape == (51, 3)
    assert traj["u"].shape == (51, 1)
    assert traj["v"].shape == (51, 1)


def test_coercivity_sign():
    red = parshoot.problem("ds-reduced")
    rep = parshoot.coercivity_check(red, np.zeros(2), grid=100)
    assert rep["verdict"] == "coercive" and rep["rho_hat"] > 0
    neg = parshoot.coercivity_check(red.negated_cost(), np.zeros(2), grid=100)
    assert neg["rho_hat"] < 0


def test_validate_builtin():
    assert parshoot.validate(parshoot.problem("ds-example"), samples=20, seed=1)["passed"]


def test_wrong_dimension_raises():
    red = parshoot.problem("ds-reduced")
    with pytest.raises(parshoot.ParshootError):
        parshoot.shooting_residual(red, np.zeros(3), grid=10)
