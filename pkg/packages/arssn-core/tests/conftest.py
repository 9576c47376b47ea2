import numpy as np
import pytest
from arssn_core.linalg import MatrixHandle, make_rng
from arssn_core.objective import RidgeLogisticProblem, synth_classification, synth_quadratic


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20240917)


@pytest.fixture(scope="session")
def quadratic_100():
    """d = 100 ridge problem with condition number 100 and a known optimum."""
    return synth_quadratic(d=100, kappa=100.0, seed=3, lam=0.01)


@pytest.fixture(scope="session")
def logistic_small():
    a, b = synth_classification(n=200, d=20, seed=11)
    return RidgeLogisticProblem(a, b, lam=1e-2)


@pytest.fixture(scope="session")
def logistic_sparse():
    a, b = synth_classification(n=300, d=40, seed=12, density=0.2)
    return RidgeLogisticProblem(a, b, lam=1e-2)


@pytest.fixture
def random_spd():
    """Factory for random SPD matrices M^T M + I."""

    def make(rng: np.random.Generator, d: int) -> MatrixHandle:
        m = rng.standard_normal((d, d))
        return MatrixHandle.dense(m.T @ m + np.eye(d))

    return make
