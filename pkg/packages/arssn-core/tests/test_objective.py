import math

import numpy as np
import pytest
from arssn_core.errors import ArgumentError, CapabilityError, DimensionMismatchError
from arssn_core.linalg import MatrixHandle, extreme_eigenvalues, make_rng
from arssn_core.objective import (
    RidgeLogisticProblem,
    RidgeRegressionProblem,
    dense_hessian_oracle,
    gradient,
    hessian_factor,
    synth_quadratic,
    synth_regression,
    value,
)


@pytest.fixture(scope="module")
def ridge_small():
    a, b = synth_regression(n=30, d=8, seed=1)
    return RidgeRegressionProblem(a, b, lam=0.5)


@pytest.fixture(scope="module", params=["ridge", "logistic", "logistic_sparse"])
def any_objective(request, ridge_small, logistic_small, logistic_sparse):
    return {"ridge": ridge_small, "logistic": logistic_small, "logistic_sparse": logistic_sparse}[request.param]


def central_difference_gradient(obj, x, h=1e-5):
    out = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (obj.value(x + e) - obj.value(x - e)) / (2 * h)
    return out


def test_ridge_value_example():
    problem = RidgeRegressionProblem(MatrixHandle.dense(np.eye(2)), [0.0, 0.0], lam=1.0)
    assert value(problem, [1.0, 1.0]) == 4.0


def test_logistic_value_at_zero():
    a = MatrixHandle.dense(make_rng(0).standard_normal((12, 3)))
    problem = RidgeLogisticProblem(a, np.where(np.arange(12) % 2, 1.0, -1.0), lam=0.3)
    assert value(problem, np.zeros(3)) == pytest.approx(math.log(2))


def test_logistic_value_does_not_overflow():
    problem = RidgeLogisticProblem(MatrixHandle.dense([[1e4]]), [1.0], lam=0.0)
    assert value(problem, [-1.0]) == pytest.approx(1e4, rel=1e-12)
    assert np.isfinite(gradient(problem, [-1.0])).all()


def test_logistic_rejects_other_labels():
    with pytest.raises(ArgumentError, match="labels"):
        RidgeLogisticProblem(MatrixHandle.dense(np.eye(2)), [0.0, 1.0], lam=0.1)


def test_negative_regularizer_rejected():
    with pytest.raises(ArgumentError):
        RidgeRegressionProblem(MatrixHandle.dense(np.eye(2)), [0.0, 0.0], lam=-1.0)


def test_dimension_checks(ridge_small):
    with pytest.raises(DimensionMismatchError):
        ridge_small.value(np.zeros(3))
    with pytest.raises(DimensionMismatchError):
        ridge_small.gradient(np.zeros(9))
    with pytest.raises(DimensionMismatchError):
        RidgeRegressionProblem(MatrixHandle.dense(np.eye(2)), [0.0], lam=0.0)


def test_ridge_gradient_vanishes_at_optimum(ridge_small):
    optimum = ridge_small.exact_optimum()
    assert np.linalg.norm(ridge_small.gradient(optimum)) <= 1e-8 * np.linalg.norm(ridge_small.b)


def test_logistic_gradient_at_zero(logistic_small):
    expected = -(logistic_small.a.rmatvec(logistic_small.b)) / (2 * logistic_small.data_rows)
    np.testing.assert_allclose(gradient(logistic_small, np.zeros(logistic_small.dim)), expected, atol=1e-15)


def test_gradient_matches_finite_differences(any_objective):
    rng = make_rng(2)
    for _ in range(20):
        x = rng.standard_normal(any_objective.dim) * 0.5
        analytic = any_objective.gradient(x)
        numeric = central_difference_gradient(any_objective, x)
        assert np.linalg.norm(analytic - numeric) <= 1e-5 * max(1.0, np.linalg.norm(analytic))


def test_factor_matches_dense_hessian(any_objective):
    rng = make_rng(3)
    for _ in range(5):
        x = rng.standard_normal(any_objective.dim) * 0.5
        factor = hessian_factor(any_objective, x)
        expected = dense_hessian_oracle(any_objective, x).to_dense()
        reconstructed = factor.gram() + any_objective.lam * any_objective.regularizer_scale * np.eye(any_objective.dim)
        np.testing.assert_allclose(reconstructed, expected, atol=1e-8)


def test_ridge_factor_and_oracle(ridge_small):
    x = np.zeros(ridge_small.dim)
    a = ridge_small.a.to_dense()
    np.testing.assert_allclose(ridge_small.hessian_factor(x).gram(), 2 * a.T @ a, rtol=1e-13)
    np.testing.assert_allclose(
        ridge_small.dense_hessian_oracle(x).to_dense(), 2 * a.T @ a + 2 * ridge_small.lam * np.eye(8), rtol=1e-13
    )


def test_logistic_factor_at_zero(logistic_small):
    n = logistic_small.data_rows
    a = logistic_small.a.to_dense()
    x = np.zeros(logistic_small.dim)
    np.testing.assert_allclose(logistic_small.hessian_factor(x).to_dense(), a / (2 * math.sqrt(n)))
    np.testing.assert_allclose(
        logistic_small.dense_hessian_oracle(x).to_dense(),
        a.T @ a / (4 * n) + logistic_small.lam * np.eye(logistic_small.dim),
        atol=1e-14,
    )


def test_logistic_hessian_matches_second_differences():
    a, b = make_rng(4).standard_normal((20, 5)), np.where(make_rng(5).random(20) < 0.5, -1.0, 1.0)
    problem = RidgeLogisticProblem(MatrixHandle.dense(a), b, lam=0.1)
    rng = make_rng(6)
    h = 1e-4
    for _ in range(20):
        x = rng.standard_normal(5)
        numeric = np.empty((5, 5))
        for j in range(5):
            e = np.zeros(5)
            e[j] = h
            numeric[:, j] = (problem.gradient(x + e) - problem.gradient(x - e)) / (2 * h)
        np.testing.assert_allclose(problem.dense_hessian_oracle(x).to_dense(), numeric, atol=1e-4)


def test_dense_oracle_capability():
    wide = RidgeRegressionProblem(MatrixHandle.csr(np.zeros((1, 2001))), [0.0], lam=1.0)
    with pytest.raises(CapabilityError):
        wide.dense_hessian_oracle(np.zeros(2001))


def test_convexity(any_objective):
    rng = make_rng(7)
    for _ in range(10):
        x, y = rng.standard_normal(any_objective.dim), rng.standard_normal(any_objective.dim)
        for t in (0.25, 0.5, 0.75):
            mixed = any_objective.value(t * x + (1 - t) * y)
            assert mixed <= t * any_objective.value(x) + (1 - t) * any_objective.value(y) + 1e-10


def test_logistic_per_sample_hessian_bound(logistic_small):
    rng = make_rng(8)
    bound = logistic_small.a.row_norms_squared() / 4 + logistic_small.lam
    for _ in range(5):
        x = rng.standard_normal(logistic_small.dim)
        for i in range(logistic_small.data_rows):
            assert logistic_small.sample_hessian_norm(x, i) <= bound[i] + 1e-15
    assert logistic_small.sample_smoothness() == pytest.approx(bound.max())


def test_sample_gradients_average_to_full_gradient(any_objective):
    x = make_rng(9).standard_normal(any_objective.dim)
    average = np.mean([any_objective.sample_gradient(x, i) for i in range(any_objective.data_rows)], axis=0)
    np.testing.assert_allclose(average, any_objective.gradient(x), rtol=1e-10, atol=1e-12)


def test_ridge_suboptimality_matches_value_gap(ridge_small):
    problem = ridge_small.with_optimum(ridge_small.exact_optimum())
    x = make_rng(10).standard_normal(problem.dim)
    gap = problem.value(x) - problem.value(problem.optimum)
    assert problem.suboptimality(x) == pytest.approx(gap, rel=1e-8)
    assert problem.suboptimality(problem.optimum) == 0.0
    assert RidgeRegressionProblem(problem.a, problem.b, problem.lam).suboptimality(x) is None


def test_smoothness_bounds(ridge_small, logistic_small):
    big_l, mu = ridge_small.smoothness_bounds()
    low, high = extreme_eigenvalues(ridge_small.dense_hessian_oracle(np.zeros(ridge_small.dim)))
    assert (big_l, mu) == pytest.approx((high, low))

    big_l, mu = logistic_small.smoothness_bounds()
    assert mu == logistic_small.lam
    low, high = extreme_eigenvalues(logistic_small.dense_hessian_oracle(np.zeros(logistic_small.dim)))
    assert big_l == pytest.approx(high, rel=1e-6)


def test_synth_quadratic_identity_hessian():
    problem = synth_quadratic(d=10, kappa=1.0, seed=0)
    hessian = problem.dense_hessian_oracle(np.zeros(10)).to_dense()
    np.testing.assert_allclose(hessian, hessian[0, 0] * np.eye(10), atol=1e-10)


@pytest.mark.parametrize("n_rows, lam", [(None, 0.0), (None, 1.0), (80, 0.0), (30, 1.0)])
def test_synth_quadratic_condition_number(n_rows, lam):
    problem = synth_quadratic(d=50, kappa=100.0, seed=1, n_rows=n_rows, lam=lam)
    low, high = extreme_eigenvalues(problem.dense_hessian_oracle(np.zeros(50)))
    assert high / low == pytest.approx(100.0, rel=0.01)
    assert np.linalg.norm(problem.gradient(problem.optimum)) <= 1e-8


def test_synth_quadratic_wide_needs_regularizer():
    with pytest.raises(ArgumentError):
        synth_quadratic(d=50, kappa=10.0, seed=0, n_rows=20, lam=0.0)
