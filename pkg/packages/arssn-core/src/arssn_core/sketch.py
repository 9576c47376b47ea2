"""
Randomized sketching operators and the statistical checks of their embedding and concentration properties.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
import scipy.sparse
from arssn_models.solver import SketchCalibration

from .errors import ArgumentError, DimensionMismatchError
from .linalg import MatrixHandle, Vector, extreme_eigenvalues, make_rng, spectral_norm, stable_rank

log = logging.getLogger(__name__)


class SketchKind(enum.StrEnum):
    row_norm_sampling = "row_norm_sampling"
    uniform_sampling = "uniform_sampling"
    gaussian = "gaussian"
    count_sketch = "count_sketch"

    @property
    def is_sampling(self) -> bool:
        return self in (SketchKind.row_norm_sampling, SketchKind.uniform_sampling)


def row_norm_probabilities(a: MatrixHandle) -> Vector:
    """
    Row norm squares sampling probabilities p_i = ||A_i||^2 / ||A||_F^2.

    :raises ArgumentError: for the zero matrix.
    """
    squares = a.row_norms_squared()
    total = float(squares.sum())
    if total == 0.0:
        raise ArgumentError("row norm probabilities of the zero matrix are undefined")
    return squares / total


@dataclass(frozen=True, eq=False)
class SketchOperator:
    """
    A realized random linear map S with `s` rows acting on matrices with `source_rows` rows.

    Sampling kinds store the drawn row indices and their rescale weights 1/sqrt(p_i * s);
    the Gaussian kind stores its dense s x n block; the count sketch stores one (bucket, sign) pair per source row.
    """

    kind: SketchKind
    s: int
    source_rows: int
    seed: int
    indices: npt.NDArray[np.int64] | None = None
    weights: Vector | None = None
    probabilities: Vector | None = None
    gaussian: npt.NDArray[np.float64] | None = None
    buckets: npt.NDArray[np.int64] | None = None
    signs: Vector | None = None

    @classmethod
    def identity(cls, n: int) -> SketchOperator:
        """Uniform sampler that draws every row exactly once; S = I."""
        return cls(
            kind=SketchKind.uniform_sampling,
            s=n,
            source_rows=n,
            seed=0,
            indices=np.arange(n, dtype=np.int64),
            weights=np.ones(n),
            probabilities=np.full(n, 1.0 / n),
        )

    def _count_matrix(self) -> scipy.sparse.csr_array:
        return scipy.sparse.csr_array(
            (self.signs, (self.buckets, np.arange(self.source_rows))),
            shape=(self.s, self.source_rows),
        )

    def as_matrix(self) -> np.ndarray | scipy.sparse.csr_array:
        """The realized s x n operator."""
        match self.kind:
            case SketchKind.gaussian:
                return self.gaussian.copy()  # type: ignore[union-attr]
            case SketchKind.count_sketch:
                return self._count_matrix()
            case _:
                return scipy.sparse.csr_array(
                    (self.weights, (np.arange(self.s), self.indices)),
                    shape=(self.s, self.source_rows),
                )

    def apply(self, a: MatrixHandle) -> MatrixHandle:
        return apply_sketch(self, a)


def build_sketch(
    kind: SketchKind | str,
    s: int,
    seed: int,
    a: MatrixHandle | None = None,
    source_rows: int | None = None,
    probabilities: npt.ArrayLike | None = None,
) -> SketchOperator:
    """
    Realize a sketching operator.

    :param kind: Which operator to draw.
    :param s: Number of rows of S (samples for the sampling kinds).
    :param seed: Seed of the Philox stream the realization is drawn from.
    :param a: Matrix the operator will act on; required for row norm sampling unless `probabilities` is given.
    :param source_rows: Number of rows of the matrices S acts on, when `a` is not given.
    :param probabilities: Precomputed row norm probabilities of `a`.
    :raises ArgumentError: if s < 1 or the source dimension cannot be determined.
    :raises DimensionMismatchError: if `source_rows` or `probabilities` disagree with the rows of `a`.
    """
    kind = SketchKind(kind)
    given = None if probabilities is None else np.asarray(probabilities, dtype=np.float64)
    if s < 1:
        raise ArgumentError(f"sketch size must be at least 1, got {s}")
    if a is not None:
        n = a.nrows
    elif given is not None:
        n = len(given)
    elif source_rows is not None:
        n = source_rows
    else:
        raise ArgumentError("either a matrix or the number of source rows is required")
    if source_rows is not None and source_rows != n:
        raise DimensionMismatchError("build_sketch", n, source_rows)
    if given is not None and len(given) != n:
        raise DimensionMismatchError("build_sketch", n, len(given))
    if n < 1:
        raise ArgumentError("cannot sketch a matrix without rows")

    rng = make_rng(seed)
    match kind:
        case SketchKind.row_norm_sampling | SketchKind.uniform_sampling:
            if kind == SketchKind.uniform_sampling:
                p = np.full(n, 1.0 / n)
            elif given is not None:
                p = given
            elif a is not None:
                p = row_norm_probabilities(a)
            else:
                raise ArgumentError("row norm sampling needs the matrix or its probabilities")
            indices = rng.choice(n, size=s, replace=True, p=p)
            return SketchOperator(
                kind=kind,
                s=s,
                source_rows=n,
                seed=seed,
                indices=indices,
                weights=1.0 / np.sqrt(p[indices] * s),
                probabilities=p,
            )
        case SketchKind.gaussian:
            return SketchOperator(
                kind=kind,
                s=s,
                source_rows=n,
                seed=seed,
                gaussian=rng.standard_normal((s, n)) / math.sqrt(s),
            )
        case SketchKind.count_sketch:
            return SketchOperator(
                kind=kind,
                s=s,
                source_rows=n,
                seed=seed,
                buckets=rng.integers(0, s, size=n),
                signs=rng.integers(0, 2, size=n) * 2.0 - 1.0,
            )


def apply_sketch(sketch: SketchOperator, a: MatrixHandle) -> MatrixHandle:
    """
    Compute SA.

    :raises DimensionMismatchError: if S was realized for a different number of rows.
    """
    if sketch.source_rows != a.nrows:
        raise DimensionMismatchError("apply_sketch", sketch.source_rows, a.nrows)
    match sketch.kind:
        case SketchKind.gaussian:
            if a.is_sparse:
                return MatrixHandle.dense((a.to_scipy().T @ sketch.gaussian.T).T)  # type: ignore[union-attr]
            return MatrixHandle.dense(sketch.gaussian @ a.to_dense())  # type: ignore[operator]
        case SketchKind.count_sketch:
            product = sketch._count_matrix() @ a.to_scipy()
            if a.is_sparse:
                return MatrixHandle.csr(product)
            return MatrixHandle.dense(product)
        case _:
            return a.take_rows(sketch.indices, sketch.weights)  # type: ignore[arg-type]


def sketched_gram(sketch: SketchOperator, a: MatrixHandle) -> np.ndarray:
    """
    Dense (SA)^T (SA) without materializing SA.

    A count sketch with more buckets than source rows leaves most rows of SA empty; only the occupied
    buckets are accumulated.
    """
    if sketch.kind != SketchKind.count_sketch:
        return apply_sketch(sketch, a).gram()
    if sketch.source_rows != a.nrows:
        raise DimensionMismatchError("sketched_gram", sketch.source_rows, a.nrows)
    occupied, slot = np.unique(sketch.buckets, return_inverse=True)  # type: ignore[call-overload]
    compress = scipy.sparse.csr_array(
        (sketch.signs, (slot, np.arange(sketch.source_rows))),
        shape=(len(occupied), sketch.source_rows),
    )
    compressed = compress @ a.to_scipy()
    if scipy.sparse.issparse(compressed):
        return (compressed.T @ compressed).toarray()
    return compressed.T @ compressed


def calibrated_sketch_size(
    kind: SketchKind | str,
    d: int,
    epsilon: float,
    calibration: SketchCalibration | None = None,
) -> int:
    """
    Number of sketch rows that makes the operator an epsilon-subspace embedding for a d-dimensional subspace.

    Gaussian: ceil(C_g * d / eps^2), capped; count sketch: ceil(C_c * d^2 / eps^2).
    """
    kind = SketchKind(kind)
    calibration = calibration or SketchCalibration()
    if d < 1 or not 0 < epsilon < 1:
        raise ArgumentError(f"need d >= 1 and 0 < epsilon < 1, got d={d}, epsilon={epsilon}")
    match kind:
        case SketchKind.gaussian:
            size = math.ceil(calibration.gaussian_constant * d / epsilon**2)
            return min(size, calibration.gaussian_cap)
        case SketchKind.count_sketch:
            return math.ceil(calibration.count_constant * d**2 / epsilon**2)
        case _:
            raise ArgumentError(f"{kind} has no calibrated embedding size")


class ConcentrationError(NamedTuple):
    observed: float
    bound: float


def concentration_bound(a: MatrixHandle, s: int) -> float:
    """(sqrt(4 sr(A) log(2d) / s) + 2 sr(A) log(2d) / (3s)) * ||A||^2"""
    sr = stable_rank(a)
    log_term = math.log(2 * a.ncols)
    sigma = spectral_norm(a, tol=1e-12, max_iters=5000).value
    return (math.sqrt(4 * sr * log_term / s) + 2 * sr * log_term / (3 * s)) * sigma**2


def concentration_error(a: MatrixHandle, sketch: SketchOperator) -> ConcentrationError:
    """
    Observed spectral error ||A^T S^T S A - A^T A|| of a row norm sampler, next to its expected-value bound.

    :raises ArgumentError: if the sketch is not a row norm sampler.
    """
    if sketch.kind != SketchKind.row_norm_sampling:
        raise ArgumentError(f"concentration bound holds for row norm sampling, not {sketch.kind}")
    sa = apply_sketch(sketch, a)
    lowest, highest = extreme_eigenvalues(sa.gram() - a.gram())
    observed = max(abs(lowest), abs(highest))
    return ConcentrationError(observed=observed, bound=concentration_bound(a, sketch.s))


@dataclass(frozen=True)
class EmbeddingReport:
    epsilon_target: float
    max_observed_distortion: float
    trials: int
    passed: bool
    skipped_probes: int = 0
    subspace_distortion: float | None = None
    """
    ||(SU)^T SU - I|| over an orthonormal basis U of range(A); only computed for d <= 50.
    """


_EXACT_CHECK_MAX_DIM = 50


def check_subspace_embedding(
    sketch: SketchOperator,
    a: MatrixHandle,
    epsilon: float,
    trials: int,
    seed: int,
) -> EmbeddingReport:
    """
    Probe | ||SAx||^2 - ||Ax||^2 | / ||Ax||^2 on random unit vectors x.

    For d <= 50 the right-singular directions of A are probed as well and the exact distortion over the
    column space is included in the maximum. Probes with Ax = 0 are skipped and counted.

    :raises ArgumentError: if trials < 1.
    """
    if trials < 1:
        raise ArgumentError(f"trials must be at least 1, got {trials}")
    sa = apply_sketch(sketch, a)
    probes = make_rng(seed).standard_normal((trials, a.ncols))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)

    subspace_distortion = None
    if a.ncols <= _EXACT_CHECK_MAX_DIM:
        u, sigma, vt = np.linalg.svd(a.to_dense(), full_matrices=False)
        rank = int(np.sum(sigma > sigma.max(initial=0.0) * max(a.shape) * np.finfo(float).eps))
        probes = np.vstack([probes, vt[:rank]])
        if rank:
            su = apply_sketch(sketch, MatrixHandle.dense(u[:, :rank])).to_dense()
            subspace_distortion = float(np.linalg.norm(su.T @ su - np.eye(rank), 2))

    worst = 0.0
    skipped = 0
    for x in probes:
        ax = a.matvec(x)
        reference = float(ax @ ax)
        if reference == 0.0:
            skipped += 1
            continue
        sax = sa.matvec(x)
        worst = max(worst, abs(float(sax @ sax) - reference) / reference)
    if subspace_distortion is not None:
        worst = max(worst, subspace_distortion)

    if skipped:
        log.debug("Skipped %s probes in the null space of A.", skipped)
    return EmbeddingReport(
        epsilon_target=epsilon,
        max_observed_distortion=worst,
        trials=trials,
        passed=worst <= epsilon,
        skipped_probes=skipped,
        subspace_distortion=subspace_distortion,
    )
