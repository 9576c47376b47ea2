"""
Dense and sparse matrix kernels, spectral estimates and the small direct solvers the other modules use as oracles.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg
import scipy.sparse

from .errors import ArgumentError, DimensionMismatchError, NonFiniteError, NotPositiveDefiniteError

log = logging.getLogger(__name__)

Vector = npt.NDArray[np.float64]

_UINT64_MASK = (1 << 64) - 1


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    Counter-based Philox generator keyed by the seed and an optional stream path.

    The same (seed, *stream) produces bit-identical draws on every platform.

    :param seed: 64-bit seed; negative values are reduced modulo 2**64.
    :param stream: Additional non-negative integers selecting an independent stream (e.g. the iteration index).
    """
    entropy = [seed & _UINT64_MASK, *(s & _UINT64_MASK for s in stream)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *stream: int) -> int:
    """64-bit seed of the stream (seed, *stream), for APIs that take a plain integer seed."""
    entropy = [seed & _UINT64_MASK, *(s & _UINT64_MASK for s in stream)]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def as_vector(values: npt.ArrayLike, what: str = "vector") -> Vector:
    """
    Validate and copy a one-dimensional vector of finite reals.

    :raises NonFiniteError: if any entry is NaN or Inf.
    """
    x = np.array(values, dtype=np.float64)
    if x.ndim != 1:
        raise ArgumentError(f"{what} must be one-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(what)
    x.flags.writeable = False
    return x


def _check_csr_structure(indptr: np.ndarray, indices: np.ndarray, shape: tuple[int, int]) -> None:
    nrows, ncols = shape
    if indptr.ndim != 1 or len(indptr) != nrows + 1:
        raise ArgumentError(f"CSR row offsets must have length {nrows + 1}, got {len(indptr)}")
    if indptr[0] != 0 or indptr[-1] != len(indices):
        raise ArgumentError("CSR row offsets must start at 0 and end at the number of stored entries")
    if np.any(np.diff(indptr) < 0):
        raise ArgumentError("CSR row offsets must be nondecreasing")
    if len(indices) and (indices.min() < 0 or indices.max() >= ncols):
        raise ArgumentError(f"CSR column indices must lie in [0, {ncols})")

    steps = np.diff(indices)
    within_row = np.ones(len(steps), dtype=bool)
    row_starts = indptr[1:-1]
    row_starts = row_starts[(row_starts > 0) & (row_starts < len(indices))]
    within_row[row_starts - 1] = False
    if np.any(steps[within_row] <= 0):
        raise ArgumentError("CSR column indices must be strictly increasing within each row")


class MatrixHandle:
    """
    Immutable real matrix stored either dense (row-major) or as compressed sparse rows.

    Both storages expose the same operations and produce the same products on the same logical content.
    Use the `dense`, `csr` and `from_csr_arrays` constructors.
    """

    __slots__ = ("_dense", "_csr")

    def __init__(self, *, _dense: np.ndarray | None = None, _csr: scipy.sparse.csr_array | None = None):
        self._dense = _dense
        self._csr = _csr

    @classmethod
    def dense(cls, array: npt.ArrayLike) -> MatrixHandle:
        a = np.array(array, dtype=np.float64, order="C")
        if a.ndim != 2:
            raise ArgumentError(f"matrix must be two-dimensional, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("matrix")
        a.flags.writeable = False
        return cls(_dense=a)

    @classmethod
    def csr(cls, matrix: npt.ArrayLike | scipy.sparse.sparray | scipy.sparse.spmatrix) -> MatrixHandle:
        m = scipy.sparse.csr_array(matrix, dtype=np.float64, copy=True)
        if m.ndim != 2:
            raise ArgumentError(f"matrix must be two-dimensional, got shape {m.shape}")
        m.sum_duplicates()
        m.sort_indices()
        if not np.all(np.isfinite(m.data)):
            raise NonFiniteError("matrix")
        return cls(_csr=m)

    @classmethod
    def from_csr_arrays(
        cls,
        indptr: npt.ArrayLike,
        indices: npt.ArrayLike,
        data: npt.ArrayLike,
        shape: tuple[int, int],
    ) -> MatrixHandle:
        """
        Build a CSR matrix from raw arrays, enforcing the CSR invariants instead of repairing them.

        :raises ArgumentError: on malformed offsets, out-of-range or unsorted column indices.
        :raises NonFiniteError: on NaN or Inf values.
        """
        indptr_arr = np.asarray(indptr, dtype=np.int64)
        indices_arr = np.asarray(indices, dtype=np.int64)
        data_arr = np.asarray(data, dtype=np.float64)
        if len(indices_arr) != len(data_arr):
            raise ArgumentError("CSR column indices and values must have the same length")
        _check_csr_structure(indptr_arr, indices_arr, shape)
        if not np.all(np.isfinite(data_arr)):
            raise NonFiniteError("matrix")
        m = scipy.sparse.csr_array((data_arr.copy(), indices_arr.copy(), indptr_arr.copy()), shape=shape)
        return cls(_csr=m)

    @property
    def shape(self) -> tuple[int, int]:
        if self._dense is not None:
            return self._dense.shape  # type: ignore[return-value]
        return self._csr.shape  # type: ignore[union-attr]

    @property
    def nrows(self) -> int:
        return self.shape[0]

    @property
    def ncols(self) -> int:
        return self.shape[1]

    @property
    def is_sparse(self) -> bool:
        return self._csr is not None

    @property
    def _op(self):
        return self._dense if self._dense is not None else self._csr

    def matvec(self, x: npt.ArrayLike) -> Vector:
        """Ax"""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.ncols:
            raise DimensionMismatchError("matvec", self.ncols, x.shape[0] if x.ndim == 1 else -1)
        return np.asarray(self._op @ x, dtype=np.float64)

    def rmatvec(self, y: npt.ArrayLike) -> Vector:
        """A^T y"""
        y = np.asarray(y, dtype=np.float64)
        if y.ndim != 1 or y.shape[0] != self.nrows:
            raise DimensionMismatchError("transpose_matvec", self.nrows, y.shape[0] if y.ndim == 1 else -1)
        return np.asarray(self._op.T @ y, dtype=np.float64)

    def row(self, i: int) -> Vector:
        """Row i as a dense vector."""
        if self._dense is not None:
            return self._dense[i].copy()
        start, stop = self._csr.indptr[i], self._csr.indptr[i + 1]  # type: ignore[union-attr]
        out = np.zeros(self.ncols)
        out[self._csr.indices[start:stop]] = self._csr.data[start:stop]  # type: ignore[union-attr]
        return out

    def row_norms_squared(self) -> Vector:
        if self._dense is not None:
            return np.einsum("ij,ij->i", self._dense, self._dense)
        return np.asarray(self._csr.multiply(self._csr).sum(axis=1), dtype=np.float64).ravel()  # type: ignore[union-attr]

    def frobenius_norm_squared(self) -> float:
        if self._dense is not None:
            return float(np.einsum("ij,ij->", self._dense, self._dense))
        return float(self._csr.data @ self._csr.data)  # type: ignore[union-attr]

    def take_rows(self, indices: npt.ArrayLike, weights: npt.ArrayLike | None = None) -> MatrixHandle:
        """Rows `indices` (repetitions allowed), each multiplied by its weight."""
        idx = np.asarray(indices, dtype=np.int64)
        if self._dense is not None:
            rows = self._dense[idx]
            if weights is not None:
                rows = rows * np.asarray(weights, dtype=np.float64)[:, None]
            return MatrixHandle.dense(rows)
        rows_csr = self._csr[idx]  # type: ignore[index]
        if weights is not None:
            rows_csr = scipy.sparse.diags_array(np.asarray(weights, dtype=np.float64)) @ rows_csr
        return MatrixHandle.csr(rows_csr)

    def scale_rows(self, weights: npt.ArrayLike) -> MatrixHandle:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (self.nrows,):
            raise DimensionMismatchError("scale_rows", self.nrows, w.shape[0] if w.ndim == 1 else -1)
        if self._dense is not None:
            return MatrixHandle.dense(self._dense * w[:, None])
        return MatrixHandle.csr(scipy.sparse.diags_array(w) @ self._csr)

    def scaled(self, factor: float) -> MatrixHandle:
        if self._dense is not None:
            return MatrixHandle.dense(self._dense * factor)
        return MatrixHandle.csr(self._csr * factor)  # type: ignore[operator]

    def gram(self) -> np.ndarray:
        """Dense A^T A (ncols x ncols)."""
        if self._dense is not None:
            return self._dense.T @ self._dense
        return (self._csr.T @ self._csr).toarray()  # type: ignore[union-attr]

    def outer_gram(self) -> np.ndarray:
        """Dense A A^T (nrows x nrows)."""
        if self._dense is not None:
            return self._dense @ self._dense.T
        return (self._csr @ self._csr.T).toarray()  # type: ignore[union-attr]

    def transpose(self) -> MatrixHandle:
        if self._dense is not None:
            return MatrixHandle.dense(self._dense.T)
        return MatrixHandle.csr(self._csr.T)  # type: ignore[union-attr]

    def to_dense(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense.copy()
        return self._csr.toarray()  # type: ignore[union-attr]

    def to_scipy(self) -> np.ndarray | scipy.sparse.csr_array:
        """Writable copy in the native storage format."""
        if self._dense is not None:
            return self._dense.copy()
        return self._csr.copy()  # type: ignore[union-attr]

    def __repr__(self) -> str:
        storage = "csr" if self.is_sparse else "dense"
        return f"MatrixHandle({storage}, shape={self.shape})"


def matvec(a: MatrixHandle, x: npt.ArrayLike) -> Vector:
    """
    Compute Ax.

    :raises DimensionMismatchError: if ncols(A) != dim(x).
    """
    return a.matvec(x)


def transpose_matvec(a: MatrixHandle, y: npt.ArrayLike) -> Vector:
    """
    Compute A^T y.

    :raises DimensionMismatchError: if nrows(A) != dim(y).
    """
    return a.rmatvec(y)


@dataclass(frozen=True)
class SpectrumEstimate:
    value: float
    iterations_used: int
    converged: bool


def spectral_norm(a: MatrixHandle, tol: float = 1e-6, max_iters: int = 500, seed: int = 0) -> SpectrumEstimate:
    """
    Estimate the largest singular value of A by power iteration on A^T A.

    Converged means the Rayleigh quotient ||Av||^2 changed by at most `tol` relative between two iterations.

    :param a: Matrix whose spectral norm is wanted.
    :param tol: Relative tolerance on successive Rayleigh quotients.
    :param max_iters: Iteration cap.
    :param seed: Seed of the random start vector.
    """
    if tol <= 0:
        raise ArgumentError(f"tol must be positive, got {tol}")
    if a.frobenius_norm_squared() == 0.0:
        return SpectrumEstimate(value=0.0, iterations_used=0, converged=True)

    v = make_rng(seed).standard_normal(a.ncols)
    v /= np.linalg.norm(v)

    rayleigh_prev = math.nan
    rayleigh = 0.0
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        u = a.matvec(v)
        rayleigh = float(u @ u)
        w = a.rmatvec(u)
        w_norm = float(np.linalg.norm(w))
        if w_norm == 0.0:
            # start vector was exactly orthogonal to the row space
            v = make_rng(seed, iterations).standard_normal(a.ncols)
            v /= np.linalg.norm(v)
            continue
        v = w / w_norm
        if abs(rayleigh - rayleigh_prev) <= tol * rayleigh:
            converged = True
            break
        rayleigh_prev = rayleigh

    if not converged:
        log.debug("Power iteration stopped after %s iterations without converging.", iterations)
    return SpectrumEstimate(value=math.sqrt(max(rayleigh, 0.0)), iterations_used=iterations, converged=converged)


def stable_rank(a: MatrixHandle) -> float:
    """
    sr(A) = ||A||_F^2 / ||A||^2, clamped into [1, min(nrows, ncols)].

    :raises ArgumentError: for the zero matrix.
    """
    frobenius_sq = a.frobenius_norm_squared()
    if frobenius_sq == 0.0:
        raise ArgumentError("stable rank of the zero matrix is undefined")
    sigma = spectral_norm(a, tol=1e-12, max_iters=5000).value
    return float(np.clip(frobenius_sq / sigma**2, 1.0, min(a.shape)))


@dataclass(frozen=True)
class CholeskyFactor:
    """Upper triangular factor U with A = U^T U."""

    upper: np.ndarray

    @property
    def dim(self) -> int:
        return self.upper.shape[0]

    def solve(self, b: npt.ArrayLike) -> Vector:
        return scipy.linalg.cho_solve((self.upper, False), np.asarray(b, dtype=np.float64))


def cholesky(a: MatrixHandle | np.ndarray, check_symmetric: bool = True) -> CholeskyFactor:
    """
    Factorize a symmetric positive definite matrix.

    :raises DimensionMismatchError: if the matrix is not square.
    :raises ArgumentError: if the matrix is not symmetric within 1e-10 (relative to its largest entry).
    :raises NotPositiveDefiniteError: if a pivot is not positive; `pivot` holds its zero-based index.
    """
    dense = a.to_dense() if isinstance(a, MatrixHandle) else np.asarray(a, dtype=np.float64)
    if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
        raise DimensionMismatchError("cholesky", dense.shape[0], dense.shape[-1])
    if check_symmetric:
        scale = max(1.0, float(np.abs(dense).max(initial=0.0)))
        if not np.allclose(dense, dense.T, rtol=0.0, atol=1e-10 * scale):
            raise ArgumentError("matrix is not symmetric")

    upper, info = scipy.linalg.lapack.dpotrf(dense, lower=0, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(f"Cholesky pivot {info - 1} is not positive", pivot=info - 1)
    if info < 0:
        raise ArgumentError(f"LAPACK dpotrf rejected argument {-info}")
    return CholeskyFactor(upper=upper)


def dense_spd_solve(a: MatrixHandle, b: npt.ArrayLike) -> Vector:
    """
    Solve Ax = b for symmetric positive definite A by a Cholesky factorization.

    :raises NotPositiveDefiniteError: if the factorization meets a nonpositive pivot.
    """
    b_arr = np.asarray(b, dtype=np.float64)
    if b_arr.shape != (a.nrows,):
        raise DimensionMismatchError("dense_spd_solve", a.nrows, b_arr.shape[0] if b_arr.ndim == 1 else -1)
    return cholesky(a).solve(b_arr)


def extreme_eigenvalues(a: MatrixHandle | np.ndarray) -> tuple[float, float]:
    """(lambda_min, lambda_max) of a small symmetric matrix."""
    dense = a.to_dense() if isinstance(a, MatrixHandle) else np.asarray(a, dtype=np.float64)
    eigenvalues = np.linalg.eigvalsh(dense)
    return float(eigenvalues[0]), float(eigenvalues[-1])


@dataclass(frozen=True)
class Eigs2x2:
    roots: tuple[complex, complex]
    """
    Both eigenvalues, sorted by modulus (largest first).
    """

    c1: float
    """
    Condition number ||S|| * ||S^-1|| of the unit-column eigenvector matrix S; infinite when defective.
    """

    defective: bool


def _eigenvector_2x2(t: np.ndarray, eigenvalue: complex) -> np.ndarray:
    (a, b), (c, d) = t
    if b != 0:
        v = np.array([b, eigenvalue - a], dtype=complex)
    elif c != 0:
        v = np.array([eigenvalue - d, c], dtype=complex)
    elif abs(eigenvalue - a) <= abs(eigenvalue - d):
        v = np.array([1.0, 0.0], dtype=complex)
    else:
        v = np.array([0.0, 1.0], dtype=complex)
    return v / np.linalg.norm(v)


def eigs_2x2(t: npt.ArrayLike) -> Eigs2x2:
    """
    Closed-form eigen-analysis of a real 2x2 matrix.

    A discriminant within 1e-12 * max(1, trace^2) of zero is treated as a double root; a double root of a
    matrix that is not a multiple of the identity is reported as defective (no eigenbasis, c1 = inf).
    """
    t_arr = np.asarray(t, dtype=np.float64)
    if t_arr.shape != (2, 2):
        raise ArgumentError(f"expected a 2x2 matrix, got shape {t_arr.shape}")
    (a, b), (c, d) = t_arr
    trace = a + d
    det = a * d - b * c
    disc = trace * trace - 4.0 * det
    if abs(disc) <= 1e-12 * max(1.0, trace * trace):
        disc = 0.0

    root = cmath.sqrt(disc)
    first, second = sorted(((trace + root) / 2.0, (trace - root) / 2.0), key=abs, reverse=True)

    scalar_matrix = b == 0 and c == 0 and a == d
    if scalar_matrix:
        return Eigs2x2(roots=(first, second), c1=1.0, defective=False)
    if disc == 0.0:
        return Eigs2x2(roots=(first, second), c1=math.inf, defective=True)

    eigenvectors = np.column_stack([_eigenvector_2x2(t_arr, first), _eigenvector_2x2(t_arr, second)])
    return Eigs2x2(roots=(first, second), c1=float(np.linalg.cond(eigenvectors, 2)), defective=False)
