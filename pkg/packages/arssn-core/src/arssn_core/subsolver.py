"""
Solvers for the Newton sub-problem H p = grad with H = B~^T B~ + alpha I.

Includes conjugate gradient, preconditioned conjugate gradient, the Woodbury direct solve and the fast
solver that runs PCG on the small s x s system with a sketched preconditioner.
"""

from __future__ import annotations

import enum
import logging
import math
import threading
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from arssn_models.solver import (
    CGSubsolver,
    EmbeddingKind,
    FastPCGSubsolver,
    SketchCalibration,
    WoodburySubsolver,
)

from .errors import ArgumentError, DimensionMismatchError, NotPositiveDefiniteError
from .linalg import CholeskyFactor, MatrixHandle, Vector, cholesky, spectral_norm
from .sketch import SketchKind, SketchOperator, build_sketch, calibrated_sketch_size, sketched_gram

log = logging.getLogger(__name__)

LinearMap = Callable[[np.ndarray], np.ndarray]
IterationCallback = Callable[[int, np.ndarray], None]

# smallest squared Cholesky pivot, relative to the largest, still counted as full rank
RANK_TOLERANCE = 1e-12


class SolveMethod(enum.StrEnum):
    cg = "cg"
    pcg = "pcg"
    refinement = "refinement"
    woodbury = "woodbury"
    fast_pcg = "fast_pcg"
    cholesky = "cholesky"


@dataclass(frozen=True)
class LinearSolveReport:
    solution: Vector
    iterations: int
    final_residual_norm: float
    """
    ||A x - b|| recomputed from scratch at exit.
    """
    method: SolveMethod
    recurrence_residual_norm: float
    """
    Residual norm as tracked by the iteration's own recurrence.
    """
    converged: bool = True


class ApproxHessian:
    """
    H = B~^T B~ + alpha I, applied without forming H.

    The Cholesky factor of the small matrix B~ B~^T + alpha I is computed on first use and shared afterwards.
    With alpha = 0 (exact, unregularized Newton) H is only positive definite when B~ has full column rank;
    such systems are solved through the d x d factor of B~^T B~ instead.
    """

    __log = log.getChild("ApproxHessian")

    def __init__(self, btilde: MatrixHandle, alpha: float):
        if not alpha >= 0 or not math.isfinite(alpha):
            raise ArgumentError(f"alpha must be nonnegative and finite, got {alpha}")
        self.btilde = btilde
        self.alpha = float(alpha)
        self._small_factor: CholeskyFactor | None = None
        self._gram_factor: CholeskyFactor | None = None
        self._norm: float | None = None
        self._lock = threading.Lock()

    @property
    def dim(self) -> int:
        return self.btilde.ncols

    @property
    def sample_rows(self) -> int:
        return self.btilde.nrows

    @property
    def regularized(self) -> bool:
        return self.alpha > 0

    def apply(self, v: npt.ArrayLike) -> Vector:
        v = np.asarray(v, dtype=np.float64)
        if self.sample_rows == 0:
            return self.alpha * v
        return self.btilde.rmatvec(self.btilde.matvec(v)) + self.alpha * v

    def apply_small(self, q: npt.ArrayLike) -> Vector:
        """(B~ B~^T + alpha I) q"""
        q = np.asarray(q, dtype=np.float64)
        return self.btilde.matvec(self.btilde.rmatvec(q)) + self.alpha * q

    def small_factor(self) -> CholeskyFactor:
        with self._lock:
            if self._small_factor is None:
                self.__log.debug("Factorizing the %s x %s Woodbury system.", self.sample_rows, self.sample_rows)
                small = self.btilde.outer_gram() + self.alpha * np.eye(self.sample_rows)
                self._small_factor = cholesky(small, check_symmetric=False)
            return self._small_factor

    def gram_factor(self) -> CholeskyFactor:
        """Cholesky factor of H itself, for the unregularized case."""
        with self._lock:
            if self._gram_factor is None:
                self.__log.debug("Factorizing the %s x %s Hessian.", self.dim, self.dim)
                message = f"B~ ({self.sample_rows} rows) is numerically rank deficient; alpha = 0 needs full rank"
                try:
                    factor = cholesky(self.to_dense(), check_symmetric=False)
                except NotPositiveDefiniteError as e:
                    raise NotPositiveDefiniteError(message, pivot=e.pivot) from e
                pivots = np.abs(np.diag(factor.upper)) ** 2
                weakest = int(np.argmin(pivots))
                if pivots[weakest] <= RANK_TOLERANCE * pivots.max():
                    raise NotPositiveDefiniteError(message, pivot=weakest)
                self._gram_factor = factor
            return self._gram_factor

    def norm(self) -> float:
        """||H|| = ||B~||^2 + alpha"""
        with self._lock:
            if self._norm is None:
                sigma = spectral_norm(self.btilde).value if self.sample_rows else 0.0
                self._norm = sigma**2 + self.alpha
            return self._norm

    def to_dense(self) -> np.ndarray:
        return self.btilde.gram() + self.alpha * np.eye(self.dim)

    def __repr__(self) -> str:
        return f"ApproxHessian(s={self.sample_rows}, d={self.dim}, alpha={self.alpha:.6g})"


def _check_rhs(b: npt.ArrayLike, x0: npt.ArrayLike | None) -> tuple[np.ndarray, np.ndarray]:
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.float64)
    if x.shape != b.shape:
        raise DimensionMismatchError("linear solve", b.shape[0], x.shape[0])
    return b, x


def _warn_on_drift(method: SolveMethod, true_norm: float, recurrence_norm: float, b_norm: float) -> None:
    if abs(true_norm - recurrence_norm) > 1e-6 * max(true_norm, recurrence_norm) + 1e-14 * b_norm:
        log.warning(
            "%s residual drifted: recurrence %.3e, recomputed %.3e.",
            method,
            recurrence_norm,
            true_norm,
        )


def cg(
    apply_a: LinearMap,
    b: npt.ArrayLike,
    x0: npt.ArrayLike | None = None,
    tol: float = 1e-10,
    max_iters: int | None = None,
    callback: IterationCallback | None = None,
) -> LinearSolveReport:
    """
    Conjugate gradient for A x = b with A symmetric positive definite.

    Stops once the residual norm is at most `tol` or after `max_iters` iterations.

    :param apply_a: Map v -> Av.
    :param b: Right-hand side.
    :param x0: Start vector; zero by default.
    :param tol: Absolute residual tolerance.
    :param max_iters: Iteration cap; the dimension by default.
    :param callback: Called with (k, x_k) after every iteration.
    :raises NotPositiveDefiniteError: if a search direction has p^T A p <= 0.
    """
    if tol <= 0:
        raise ArgumentError(f"tol must be positive, got {tol}")
    b, x = _check_rhs(b, x0)
    max_iters = len(b) if max_iters is None else max_iters

    r = apply_a(x) - b
    p = -r
    rr = float(r @ r)
    k = 0
    while math.sqrt(rr) > tol and k < max_iters:
        ap = apply_a(p)
        curvature = float(p @ ap)
        if curvature <= 0:
            raise NotPositiveDefiniteError(f"CG met p^T A p = {curvature:.3e} at iteration {k}", iteration=k)
        step = rr / curvature
        x = x + step * p
        r = r + step * ap
        rr_next = float(r @ r)
        p = -r + (rr_next / rr) * p
        rr = rr_next
        k += 1
        if callback is not None:
            callback(k, x)

    true_norm = float(np.linalg.norm(apply_a(x) - b))
    recurrence_norm = math.sqrt(rr)
    _warn_on_drift(SolveMethod.cg, true_norm, recurrence_norm, float(np.linalg.norm(b)))
    return LinearSolveReport(
        solution=x,
        iterations=k,
        final_residual_norm=true_norm,
        method=SolveMethod.cg,
        recurrence_residual_norm=recurrence_norm,
        converged=recurrence_norm <= tol,
    )


def _pcg_iterate(
    apply_a: LinearMap,
    b: np.ndarray,
    x: np.ndarray,
    iterations: int,
    precond_solve: LinearMap,
    callback: IterationCallback | None,
) -> tuple[np.ndarray, np.ndarray, int]:
    r = apply_a(x) - b
    y = precond_solve(r)
    p = -y
    ry = float(r @ y)
    roundoff = 1e-13 * max(float(np.linalg.norm(b)), np.finfo(float).tiny)
    k = 0
    while k < iterations:
        if ry == 0.0:
            break
        ap = apply_a(p)
        curvature = float(p @ ap)
        if curvature <= 0:
            if np.linalg.norm(r) <= roundoff:
                break
            raise NotPositiveDefiniteError(f"PCG met p^T A p = {curvature:.3e} at iteration {k}", iteration=k)
        step = ry / curvature
        x = x + step * p
        r = r + step * ap
        y = precond_solve(r)
        ry_next = float(r @ y)
        p = -y + (ry_next / ry) * p
        ry = ry_next
        k += 1
        if callback is not None:
            callback(k, x)
    return x, r, k


def pcg(
    apply_a: LinearMap,
    b: npt.ArrayLike,
    x0: npt.ArrayLike | None,
    iterations: int,
    precond_solve: LinearMap,
    callback: IterationCallback | None = None,
) -> LinearSolveReport:
    """
    Preconditioned conjugate gradient, run for exactly `iterations` steps.

    Stops early only on an exactly vanishing preconditioned residual.

    :param precond_solve: Map r -> P^-1 r for a symmetric positive definite preconditioner P.
    :raises NotPositiveDefiniteError: if a search direction has p^T A p <= 0 before the residual reached round-off.
    """
    if iterations < 1:
        raise ArgumentError(f"PCG needs at least one iteration, got {iterations}")
    b, x = _check_rhs(b, x0)
    x, r, k = _pcg_iterate(apply_a, b, x, iterations, precond_solve, callback)

    true_norm = float(np.linalg.norm(apply_a(x) - b))
    recurrence_norm = float(np.linalg.norm(r))
    _warn_on_drift(SolveMethod.pcg, true_norm, recurrence_norm, float(np.linalg.norm(b)))
    return LinearSolveReport(
        solution=x,
        iterations=k,
        final_residual_norm=true_norm,
        method=SolveMethod.pcg,
        recurrence_residual_norm=recurrence_norm,
    )


def iterative_refinement(
    apply_a: LinearMap,
    b: npt.ArrayLike,
    x0: npt.ArrayLike | None,
    iterations: int,
    precond_solve: LinearMap,
    callback: IterationCallback | None = None,
) -> LinearSolveReport:
    """
    Preconditioned Richardson iteration x <- x - P^-1 (A x - b).

    If (1 - eps) P <= A <= (1 + eps) P, every step shrinks the A-norm error by at least eps.
    """
    if iterations < 1:
        raise ArgumentError(f"refinement needs at least one iteration, got {iterations}")
    b, x = _check_rhs(b, x0)
    for k in range(1, iterations + 1):
        x = x - precond_solve(apply_a(x) - b)
        if callback is not None:
            callback(k, x)
    residual_norm = float(np.linalg.norm(apply_a(x) - b))
    return LinearSolveReport(
        solution=x,
        iterations=iterations,
        final_residual_norm=residual_norm,
        method=SolveMethod.refinement,
        recurrence_residual_norm=residual_norm,
    )


def _require_regularized(h: ApproxHessian, operation: str) -> None:
    if not h.regularized:
        raise ArgumentError(f"{operation} needs alpha > 0; use solve_subproblem for unregularized systems")


def unregularized_solve(h: ApproxHessian, g: npt.ArrayLike) -> LinearSolveReport:
    """
    Solve B~^T B~ p = g directly through the d x d Cholesky factor.

    :raises NotPositiveDefiniteError: if B~ does not have full column rank.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (h.dim,):
        raise DimensionMismatchError("unregularized_solve", h.dim, g.shape[0] if g.ndim == 1 else -1)
    p = h.gram_factor().solve(g)
    residual = float(np.linalg.norm(h.apply(p) - g))
    return LinearSolveReport(
        solution=p,
        iterations=0,
        final_residual_norm=residual,
        method=SolveMethod.cholesky,
        recurrence_residual_norm=residual,
    )


def woodbury_solve(h: ApproxHessian, g: npt.ArrayLike) -> Vector:
    """
    Exact H^-1 g via p = g / alpha - B~^T (B~ B~^T + alpha I)^-1 B~ g / alpha.

    :raises ArgumentError: if alpha is zero.
    :raises NotPositiveDefiniteError: if the small factorization fails.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (h.dim,):
        raise DimensionMismatchError("woodbury_solve", h.dim, g.shape[0] if g.ndim == 1 else -1)
    _require_regularized(h, "woodbury_solve")
    if h.sample_rows == 0:
        return g / h.alpha
    q = h.small_factor().solve(h.btilde.matvec(g))
    return (g - h.btilde.rmatvec(q)) / h.alpha


def build_preconditioner_sketch(
    h: ApproxHessian,
    sketch_seed: int,
    embedding: EmbeddingKind | str = EmbeddingKind.count_sketch,
    calibration: SketchCalibration | None = None,
) -> SketchOperator:
    """Subspace embedding G^T for the row space of B~, i.e. acting on the d x s matrix B~^T."""
    calibration = calibration or SketchCalibration()
    kind = SketchKind(str(embedding))
    size = calibrated_sketch_size(kind, h.sample_rows, calibration.embedding_epsilon, calibration)
    return build_sketch(kind, size, sketch_seed, source_rows=h.dim)


def fast_subproblem_solve(
    h: ApproxHessian,
    grad: npt.ArrayLike,
    iterations: int,
    sketch_seed: int,
    embedding: EmbeddingKind | str = EmbeddingKind.count_sketch,
    calibration: SketchCalibration | None = None,
) -> LinearSolveReport:
    """
    Approximate H^-1 grad by running PCG on the small system (B~ B~^T + alpha I) q = B~ grad / alpha.

    The preconditioner is P = B~ G G^T B~^T + alpha I where G^T embeds the row space of B~ with distortion
    `calibration.embedding_epsilon`; P is factorized once and reused for every iteration.
    The output is p = grad / alpha - B~^T q.

    :param iterations: Number of PCG iterations T.
    :param sketch_seed: Seed of the embedding G.
    """
    if iterations < 1:
        raise ArgumentError(f"the fast solver needs at least one iteration, got {iterations}")
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != (h.dim,):
        raise DimensionMismatchError("fast_subproblem_solve", h.dim, grad.shape[0] if grad.ndim == 1 else -1)
    _require_regularized(h, "fast_subproblem_solve")

    scaled = grad / h.alpha
    if h.sample_rows == 0 or not np.any(grad):
        residual = float(np.linalg.norm(h.apply(scaled) - grad))
        return LinearSolveReport(
            solution=scaled,
            iterations=0,
            final_residual_norm=residual,
            method=SolveMethod.fast_pcg,
            recurrence_residual_norm=residual,
        )

    sketch = build_preconditioner_sketch(h, sketch_seed, embedding, calibration)
    preconditioner = sketched_gram(sketch, h.btilde.transpose()) + h.alpha * np.eye(h.sample_rows)
    factor = cholesky(preconditioner, check_symmetric=False)

    rhs = h.btilde.matvec(scaled)
    q, small_residual, k = _pcg_iterate(
        h.apply_small, rhs, np.zeros(h.sample_rows), iterations, factor.solve, callback=None
    )
    p = scaled - h.btilde.rmatvec(q)

    # H p - grad = -B~^T (residual of the small system)
    recurrence_norm = float(np.linalg.norm(h.btilde.rmatvec(small_residual)))
    true_norm = float(np.linalg.norm(h.apply(p) - grad))
    return LinearSolveReport(
        solution=p,
        iterations=k,
        final_residual_norm=true_norm,
        method=SolveMethod.fast_pcg,
        recurrence_residual_norm=recurrence_norm,
    )


def theorem5_iters(alpha: float, h_norm: float, c1: float, kappa: float, eps1: float) -> int:
    """
    PCG iteration count T = ceil(log2((||H|| / alpha)^(3/2) * c1 * sqrt(kappa) / eps1)), at least 1.

    Each iteration of the fast solver halves the error, which fixes the base of the logarithm.

    :raises ArgumentError: if an argument is not positive and finite, or eps1 >= 1.
    """
    arguments = {"alpha": alpha, "h_norm": h_norm, "c1": c1, "kappa": kappa, "eps1": eps1}
    for name, value in arguments.items():
        if not (value > 0 and math.isfinite(value)):
            raise ArgumentError(f"{name} must be positive and finite, got {value}")
    if eps1 >= 1:
        raise ArgumentError(f"eps1 must be below 1, got {eps1}")
    argument = (h_norm / alpha) ** 1.5 * c1 * math.sqrt(kappa) / eps1
    # tolerate round-off on exact powers of two
    return max(1, math.ceil(math.log2(argument) - 1e-12))


def solve_subproblem(
    h: ApproxHessian,
    grad: npt.ArrayLike,
    options: WoodburySubsolver | CGSubsolver | FastPCGSubsolver,
    sketch_seed: int = 0,
    calibration: SketchCalibration | None = None,
) -> LinearSolveReport:
    """
    Dispatch the sub-problem to the configured solver.

    Woodbury and the fast solver divide by alpha; with alpha = 0 they fall back to `unregularized_solve`.
    CG handles both cases.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if not h.regularized and not isinstance(options, CGSubsolver):
        return unregularized_solve(h, grad)
    match options:
        case WoodburySubsolver():
            p = woodbury_solve(h, grad)
            residual = float(np.linalg.norm(h.apply(p) - grad))
            return LinearSolveReport(
                solution=p,
                iterations=0,
                final_residual_norm=residual,
                method=SolveMethod.woodbury,
                recurrence_residual_norm=residual,
            )
        case CGSubsolver(rel_tol=rel_tol, max_iters=max_iters):
            tol = rel_tol * float(np.linalg.norm(grad))
            if tol == 0.0:
                return solve_subproblem(h, grad, WoodburySubsolver())
            return cg(h.apply, grad, None, tol=tol, max_iters=max_iters or h.dim)
        case FastPCGSubsolver(iterations=iterations, rel_tol=rel_tol, embedding=embedding):
            if iterations == "auto":
                iterations = theorem5_iters(h.alpha, h.norm(), 1.0, 1.0, min(rel_tol, 0.5))
            return fast_subproblem_solve(h, grad, iterations, sketch_seed, embedding, calibration)
        case _:
            raise ArgumentError(f"unknown sub-problem solver {options!r}")
