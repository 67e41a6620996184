"""Cross-check of the relaxation value against a general conic solver."""

import numpy as np
import pytest

from conftest import problem
from whub.instance import gen_random
from whub.solver import solve

cp = pytest.importorskip("cvxpy")


def dnn_value(edm, basis, gang):
    V = basis.dense
    N, k = edm.N, edm.k
    R = cp.Variable((N + 1 - k, N + 1 - k), PSD=True)
    Y = V @ R @ V.T
    cons = [Y >= 0, Y <= 1, Y[0, 0] == 1, cp.trace(R) == k + 1]
    cons += [Y[i, i] == Y[0, i] for i in range(1, N + 1)]
    cons += [Y[i, j] == 0 for i, j in gang.pairs]
    prob = cp.Problem(cp.Minimize(cp.trace(edm.Dhat @ Y)), cons)
    prob.solve(solver="CLARABEL")
    return prob.value


def test_wheel_relaxation_value(wheel3_problem):
    edm, basis, gang = wheel3_problem
    ref = dnn_value(edm, basis, gang)
    assert ref == pytest.approx(10.8246, abs=1e-2)
    rep = solve(edm, basis, gang)
    assert rep.lb <= ref + 1e-6
    assert rep.lb == pytest.approx(ref, abs=1e-5)


@pytest.mark.parametrize("seed", range(3))
def test_random_relaxation_value(seed):
    edm, basis, gang = problem(gen_random(4, 3, 2, True, seed))
    ref = dnn_value(edm, basis, gang)
    rep = solve(edm, basis, gang)
    assert rep.lb <= ref + 1e-6 * (1 + abs(ref))
    assert rep.lb == pytest.approx(ref, rel=1e-5)
