"""
Finite-sum objectives F(x) = (1/n) sum_i f_i(x) with a factored Hessian, plus synthetic problem generators.
"""

from __future__ import annotations

import abc
import logging
import math

import numpy as np
import numpy.typing as npt
from scipy.special import expit

from .errors import ArgumentError, CapabilityError, DimensionMismatchError
from .linalg import MatrixHandle, Vector, as_vector, dense_spd_solve, extreme_eigenvalues, make_rng, spectral_norm

log = logging.getLogger(__name__)

DENSE_ORACLE_MAX_DIM = 2000


class Objective(abc.ABC):
    """
    Evaluation surface of a convex finite-sum objective.

    The data part of the Hessian factors as B(x)^T B(x); the regularizer contributes
    `lam * regularizer_scale * I` on top and is never sampled.
    """

    def __init__(self, a: MatrixHandle, b: npt.ArrayLike, lam: float):
        b_vec = as_vector(b, "targets")
        if len(b_vec) != a.nrows:
            raise DimensionMismatchError(type(self).__name__, a.nrows, len(b_vec))
        if not lam >= 0:
            raise ArgumentError(f"regularizer must be nonnegative, got {lam}")
        self.a = a
        self.b = b_vec
        self.lam = float(lam)

    @property
    def dim(self) -> int:
        return self.a.ncols

    @property
    def data_rows(self) -> int:
        return self.a.nrows

    @property
    @abc.abstractmethod
    def regularizer_scale(self) -> float: ...

    @property
    def hessian_is_constant(self) -> bool:
        return False

    @property
    def optimum(self) -> Vector | None:
        """Minimizer, when known."""
        return None

    def _check(self, x: npt.ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.dim:
            raise DimensionMismatchError(type(self).__name__, self.dim, x.shape[0] if x.ndim == 1 else -1)
        return x

    @abc.abstractmethod
    def value(self, x: npt.ArrayLike) -> float: ...

    @abc.abstractmethod
    def gradient(self, x: npt.ArrayLike) -> Vector: ...

    @abc.abstractmethod
    def hessian_factor(self, x: npt.ArrayLike) -> MatrixHandle: ...

    @abc.abstractmethod
    def sample_gradient(self, x: npt.ArrayLike, i: int) -> Vector:
        """Gradient of the i-th summand f_i."""

    @abc.abstractmethod
    def sample_smoothness(self) -> float:
        """max_i ||Hessian of f_i|| over all x."""

    @abc.abstractmethod
    def smoothness_bounds(self) -> tuple[float, float]:
        """Global (L, mu) with mu I <= Hessian(x) <= L I."""

    @property
    def regularizer_weight(self) -> float:
        return self.lam * self.regularizer_scale

    def dense_hessian_oracle(self, x: npt.ArrayLike) -> MatrixHandle:
        """
        Explicit d x d Hessian including the regularizer.

        :raises CapabilityError: if d exceeds the oracle limit.
        """
        if self.dim > DENSE_ORACLE_MAX_DIM:
            raise CapabilityError(f"dense Hessian oracle is limited to d <= {DENSE_ORACLE_MAX_DIM}, got {self.dim}")
        factor = self.hessian_factor(x)
        return MatrixHandle.dense(factor.gram() + self.regularizer_weight * np.eye(self.dim))

    def hessian_norm(self, x: npt.ArrayLike, factor: MatrixHandle | None = None) -> float:
        """||Hessian(x)|| = ||B(x)||^2 + lam * scale."""
        factor = factor if factor is not None else self.hessian_factor(x)
        return spectral_norm(factor).value ** 2 + self.regularizer_weight

    def suboptimality(self, x: npt.ArrayLike) -> float | None:
        """F(x) - F(x*) when the optimum is known."""
        optimum = self.optimum
        if optimum is None:
            return None
        return self.value(x) - self.value(optimum)


class RidgeRegressionProblem(Objective):
    """F(x) = ||Ax - b||^2 + lam ||x||^2"""

    def __init__(self, a: MatrixHandle, b: npt.ArrayLike, lam: float, optimum: npt.ArrayLike | None = None):
        super().__init__(a, b, lam)
        self._factor = a.scaled(math.sqrt(2.0))
        self._optimum = None if optimum is None else as_vector(optimum, "optimum")

    @property
    def regularizer_scale(self) -> float:
        return 2.0

    @property
    def hessian_is_constant(self) -> bool:
        return True

    @property
    def optimum(self) -> Vector | None:
        return self._optimum

    def value(self, x: npt.ArrayLike) -> float:
        x = self._check(x)
        residual = self.a.matvec(x) - self.b
        return float(residual @ residual + self.lam * (x @ x))

    def gradient(self, x: npt.ArrayLike) -> Vector:
        x = self._check(x)
        residual = self.a.matvec(x) - self.b
        return 2.0 * self.a.rmatvec(residual) + 2.0 * self.lam * x

    def hessian_factor(self, x: npt.ArrayLike) -> MatrixHandle:
        self._check(x)
        return self._factor

    def sample_gradient(self, x: npt.ArrayLike, i: int) -> Vector:
        # f_i = n (a_i^T x - b_i)^2 + lam ||x||^2
        x = self._check(x)
        row = self.a.row(i)
        return 2.0 * self.data_rows * (row @ x - self.b[i]) * row + 2.0 * self.lam * x

    def sample_smoothness(self) -> float:
        return float(2.0 * self.data_rows * self.a.row_norms_squared().max() + 2.0 * self.lam)

    def smoothness_bounds(self) -> tuple[float, float]:
        if self.dim <= DENSE_ORACLE_MAX_DIM:
            mu, big_l = extreme_eigenvalues(self.dense_hessian_oracle(np.zeros(self.dim)))
            return big_l, max(mu, 0.0)
        sigma = spectral_norm(self.a, tol=1e-10).value
        return 2.0 * sigma**2 + 2.0 * self.lam, 2.0 * self.lam

    def suboptimality(self, x: npt.ArrayLike) -> float | None:
        if self._optimum is None:
            return None
        error = self._check(x) - self._optimum
        a_error = self.a.matvec(error)
        return float(a_error @ a_error + self.lam * (error @ error))

    def exact_optimum(self) -> Vector:
        """
        Solve the normal equations (A^T A + lam I) x = A^T b directly.

        :raises NotPositiveDefiniteError: for lam = 0 and rank deficient A.
        """
        normal = MatrixHandle.dense(self.a.gram() + self.lam * np.eye(self.dim))
        return dense_spd_solve(normal, self.a.rmatvec(self.b))

    def with_optimum(self, optimum: npt.ArrayLike) -> RidgeRegressionProblem:
        return RidgeRegressionProblem(self.a, self.b, self.lam, optimum=optimum)


class RidgeLogisticProblem(Objective):
    """F(x) = (1/n) sum_i log(1 + exp(-b_i <a_i, x>)) + lam/2 ||x||^2"""

    def __init__(self, a: MatrixHandle, b: npt.ArrayLike, lam: float):
        super().__init__(a, b, lam)
        if not np.all(np.abs(self.b) == 1.0):
            raise ArgumentError(f"labels must be -1 or +1, got {sorted(set(np.unique(self.b).tolist()))}")

    @property
    def regularizer_scale(self) -> float:
        return 1.0

    def _margins(self, x: np.ndarray) -> np.ndarray:
        return self.b * self.a.matvec(x)

    def value(self, x: npt.ArrayLike) -> float:
        x = self._check(x)
        return float(np.mean(np.logaddexp(0.0, -self._margins(x))) + 0.5 * self.lam * (x @ x))

    def gradient(self, x: npt.ArrayLike) -> Vector:
        x = self._check(x)
        coefficients = -self.b * expit(-self._margins(x))
        return self.a.rmatvec(coefficients) / self.data_rows + self.lam * x

    def hessian_factor(self, x: npt.ArrayLike) -> MatrixHandle:
        x = self._check(x)
        margins = self._margins(x)
        weights = expit(margins) * expit(-margins)
        return self.a.scale_rows(np.sqrt(weights / self.data_rows))

    def sample_gradient(self, x: npt.ArrayLike, i: int) -> Vector:
        x = self._check(x)
        row = self.a.row(i)
        return -self.b[i] * expit(-self.b[i] * (row @ x)) * row + self.lam * x

    def sample_hessian_norm(self, x: npt.ArrayLike, i: int) -> float:
        x = self._check(x)
        row = self.a.row(i)
        margin = self.b[i] * (row @ x)
        return float(expit(margin) * expit(-margin) * (row @ row) + self.lam)

    def sample_smoothness(self) -> float:
        return float(self.a.row_norms_squared().max() / 4.0 + self.lam)

    def smoothness_bounds(self) -> tuple[float, float]:
        sigma = spectral_norm(self.a, tol=1e-10).value
        return sigma**2 / (4.0 * self.data_rows) + self.lam, self.lam


def value(obj: Objective, x: npt.ArrayLike) -> float:
    return obj.value(x)


def gradient(obj: Objective, x: npt.ArrayLike) -> Vector:
    return obj.gradient(x)


def hessian_factor(obj: Objective, x: npt.ArrayLike) -> MatrixHandle:
    return obj.hessian_factor(x)


def dense_hessian_oracle(obj: Objective, x: npt.ArrayLike) -> MatrixHandle:
    return obj.dense_hessian_oracle(x)


def suboptimality(obj: Objective, x: npt.ArrayLike) -> float | None:
    return obj.suboptimality(x)


def _orthonormal_columns(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, k)))
    return q * np.sign(np.diag(r))


def synth_quadratic(
    d: int,
    kappa: float,
    seed: int,
    n_rows: int | None = None,
    lam: float = 0.0,
    noise: float = 0.1,
) -> RidgeRegressionProblem:
    """
    Ridge regression instance whose Hessian has condition number `kappa` and a known minimizer.

    With n_rows >= d the eigenvalues of A^T A + lam I are (1 + lam) * kappa^t for log-spaced t in [0, 1].
    With n_rows < d the Hessian is singular without the regularizer, so lam > 0 is required and the
    smallest eigenvalue is lam itself.

    :param d: Dimension.
    :param kappa: Target condition number of the Hessian.
    :param seed: Seed of the data stream.
    :param n_rows: Number of data rows; defaults to d.
    :param lam: Ridge regularizer.
    :param noise: Standard deviation of the target noise.
    """
    n = d if n_rows is None else n_rows
    if d < 2 or kappa < 1 or n < 1:
        raise ArgumentError(f"need d >= 2, kappa >= 1 and n_rows >= 1, got d={d}, kappa={kappa}, n_rows={n}")
    if lam < 0:
        raise ArgumentError(f"regularizer must be nonnegative, got {lam}")

    if n >= d:
        singular_sq = (1.0 + lam) * kappa ** np.linspace(0.0, 1.0, d) - lam
    else:
        if lam <= 0:
            raise ArgumentError("a problem with fewer rows than columns needs lam > 0")
        singular_sq = lam * (kappa ** np.linspace(0.0, 1.0, n + 1)[1:] - 1.0)

    rng = make_rng(seed)
    rank = len(singular_sq)
    u = _orthonormal_columns(rng, n, rank)
    v = _orthonormal_columns(rng, d, rank)
    a = MatrixHandle.dense((u * np.sqrt(singular_sq)) @ v.T)

    x_true = rng.standard_normal(d)
    b = a.matvec(x_true) + noise * rng.standard_normal(n)
    problem = RidgeRegressionProblem(a, b, lam)
    return problem.with_optimum(problem.exact_optimum())


def _random_design(n: int, d: int, rng: np.random.Generator, density: float) -> MatrixHandle:
    if not 0 < density <= 1:
        raise ArgumentError(f"density must lie in (0, 1], got {density}")
    values = rng.standard_normal((n, d)) / math.sqrt(max(1.0, density * d))
    if density == 1.0:
        return MatrixHandle.dense(values)
    mask = rng.random((n, d)) < density
    return MatrixHandle.csr(np.where(mask, values, 0.0))


def synth_classification(n: int, d: int, seed: int, density: float = 1.0) -> tuple[MatrixHandle, Vector]:
    """Design matrix and +-1 labels drawn from a noisy logistic model; CSR when density < 1."""
    rng = make_rng(seed)
    a = _random_design(n, d, rng, density)
    w_true = rng.standard_normal(d)
    probability = expit(a.matvec(w_true))
    labels = np.where(rng.random(n) < probability, 1.0, -1.0)
    return a, as_vector(labels, "labels")


def synth_regression(
    n: int, d: int, seed: int, density: float = 1.0, noise: float = 0.1
) -> tuple[MatrixHandle, Vector]:
    """Design matrix and real targets of a noisy linear model; CSR when density < 1."""
    rng = make_rng(seed)
    a = _random_design(n, d, rng, density)
    x_true = rng.standard_normal(d)
    return a, as_vector(a.matvec(x_true) + noise * rng.standard_normal(n), "targets")
