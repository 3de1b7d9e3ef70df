import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coughscreen.errors import DimensionMismatch, InvalidParams, SingleClassData
from coughscreen.models import SVMParams, dumps, kernel_matrix, loads, smo_solve, svm_decision, svm_train_smo
from coughscreen.models.svm import SVMModel, dual_objective, kkt_violations
from oracles import rbf_gram, svm_dual_qp


def random_problem(seed, n=None, d=2):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(2, 9))
    X = rng.standard_normal((n, d))
    y = rng.choice([-1.0, 1.0], n)
    y[0], y[1] = -1.0, 1.0
    return X, y


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("C", [0.5, 10.0])
def test_decisions_match_qp_oracle(seed, C):
    X, y = random_problem(seed)
    p = SVMParams(gamma=0.7, C=C, tol=1e-4)
    model = svm_train_smo(X, y, p)
    a, b = svm_dual_qp(rbf_gram(X, X, 0.7), y, C)
    probe = np.vstack([X, np.random.default_rng(seed + 100).standard_normal((10, 2))])
    ref = rbf_gram(probe, X, 0.7) @ (a * y) + b
    np.testing.assert_allclose(model.decision_function(probe), ref, atol=1e-3)
    assert np.all((model.alphas > 0) & (model.alphas <= C))
    assert model.train_metrics["kkt_violations"] == 0


def test_linear_kernel_matches_oracle():
    X, y = random_problem(3, n=8)
    model = svm_train_smo(X, y, SVMParams(kernel="linear", C=2.0, tol=1e-4))
    a, b = svm_dual_qp(X @ X.T, y, 2.0)
    np.testing.assert_allclose(model.decision_function(X), X @ X.T @ (a * y) + b, atol=1e-3)


@given(st.integers(0, 2 ** 31 - 1))
def test_box_equality_and_monotone_objective(seed):
    X, y = random_problem(seed, n=12, d=3)
    p = SVMParams(gamma=0.5, C=3.0)
    K = kernel_matrix(X, X, p)
    res = smo_solve(K, y, p, track_objective=True)
    assert np.all(res.alpha >= 0) and np.all(res.alpha <= p.C)
    assert abs(res.alpha @ y) < 1e-9 * p.C * len(y)
    trace = np.array(res.objective_trace)
    assert np.all(np.diff(trace) >= -1e-12)
    assert trace[-1] == pytest.approx(dual_objective(res.alpha, y, K))


@given(st.integers(0, 2 ** 31 - 1))
def test_kkt_at_termination(seed):
    X, y = random_problem(seed, n=15, d=3)
    p = SVMParams(gamma=0.3, C=5.0, tol=1e-4)
    K = kernel_matrix(X, X, p)
    res = smo_solve(K, y, p)
    f = K @ (res.alpha * y) + res.bias
    assert res.converged
    assert not kkt_violations(res.alpha, y, f, p.C, 1e-3).any()


def test_conflicting_duplicates():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [2.0, 2.0], [-2.0, -2.0]])
    y = np.array([1.0, -1.0, 1.0, -1.0])
    model = svm_train_smo(X, y, SVMParams(gamma=0.5, C=1.0, tol=1e-4))
    a, b = svm_dual_qp(rbf_gram(X, X, 0.5), y, 1.0)
    ref = rbf_gram(X, X, 0.5) @ (a * y) + b
    np.testing.assert_allclose(model.decision_function(X), ref, atol=1e-3)
    assert model.converged and np.all(model.alphas <= 1.0)


def test_separable_linear_margin():
    rng = np.random.default_rng(4)
    X = np.vstack([rng.normal(-2, 0.3, (15, 2)), rng.normal(2, 0.3, (15, 2))])
    y = np.repeat([-1.0, 1.0], 15)
    m = svm_train_smo(X, y, SVMParams(kernel="linear", C=1000.0, tol=1e-4))
    f = m.decision_function(X)
    assert np.all(y * f >= 1 - 1e-3)
    assert np.min(np.abs(y * f - 1)) < 1e-3


def test_rbf_rescaling_invariance():
    X, y = random_problem(11, n=8)
    a = svm_train_smo(X, y, SVMParams(gamma=0.5, C=2.0, tol=1e-4))
    b = svm_train_smo(3.0 * X, y, SVMParams(gamma=0.5 / 9.0, C=2.0, tol=1e-4))
    probe = np.random.default_rng(0).standard_normal((6, 2))
    np.testing.assert_allclose(a.decision_function(probe), b.decision_function(3.0 * probe), atol=1e-3)


def test_zero_decision_is_negative():
    m = SVMModel(np.zeros((0, 2)), np.zeros(0), np.zeros(0), 0.0, SVMParams())
    assert m.predict(np.ones((3, 2))).tolist() == [0, 0, 0]
    assert svm_decision(m, np.ones(2)) == 0.0


def test_update_budget_exhaustion_warns(caplog):
    X, y = random_problem(2, n=30, d=3)
    with caplog.at_level(logging.WARNING):
        m = svm_train_smo(X, y, SVMParams(max_iter=2))
    assert not m.converged
    assert "update budget" in caplog.text


def test_errors():
    X, y = random_problem(1, n=6)
    with pytest.raises(SingleClassData):
        svm_train_smo(X, np.ones(6))
    m = svm_train_smo(X, y)
    with pytest.raises(DimensionMismatch):
        m.decision_function(np.zeros((1, 5)))
    with pytest.raises(InvalidParams):
        SVMParams(gamma=0.0)
    with pytest.raises(InvalidParams):
        SVMParams(C=-1.0)


@pytest.mark.parametrize("kernel", ["rbf", "linear", "poly", "sigmoid"])
def test_serialization_round_trip(kernel):
    X, y = random_problem(5, n=8)
    m = svm_train_smo(X, y, SVMParams(kernel=kernel, gamma=0.3), feature_kind="chroma")
    back = loads(dumps(m))
    np.testing.assert_array_equal(back.decision_function(X), m.decision_function(X))
    assert dumps(back) == dumps(m)
