"""
Outer loops: accelerated and plain regularized sub-sampled Newton, accelerated gradient descent and SVRG.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable

import numpy as np
import numpy.typing as npt
from arssn_models.solver import (
    AnnealedMomentum,
    FixedMomentum,
    HessianApproxSpec,
    MomentumSchedule,
    SketchCalibration,
    SolveOptions,
    WoodburySubsolver,
)
from arssn_models.trace import TerminalStatus, TraceRecord

from ..errors import ArgumentError, DimensionMismatchError
from ..linalg import as_vector, derive_seed, make_rng
from ..objective import Objective
from ..subsolver import solve_subproblem
from .hessian import HessianModel, ScaledIdentityHessian, SubsampledHessian
from .rates import theta_at
from .trace import Trace

log = logging.getLogger(__name__)

# stream index of the preconditioner sketch, next to the sampling stream
_PRECONDITIONER_STREAM = 1


class _Recorder:
    """Turns iterate evaluations into trace records and decides when the run stops."""

    def __init__(self, obj: Objective, opts: SolveOptions, algorithm: str):
        self.obj = obj
        self.opts = opts
        self.trace = Trace(algorithm)
        self._start = time.perf_counter()

    def observe(self, t: int, x: np.ndarray, grad: np.ndarray, subsolver_iters: int) -> bool:
        """Record iterate t if due; returns True once the run is over."""
        with np.errstate(over="ignore", invalid="ignore"):
            f_value = self.obj.value(x)
            grad_norm = float(np.linalg.norm(grad))

        status = None
        if not (math.isfinite(f_value) and math.isfinite(grad_norm)):
            status = TerminalStatus.diverged
        elif grad_norm <= self.opts.grad_tol:
            status = TerminalStatus.converged
        elif t >= self.opts.max_outer_iters:
            status = TerminalStatus.max_iters

        if status is not None or t % self.opts.record_every == 0:
            with np.errstate(over="ignore", invalid="ignore"):
                suboptimality = self.obj.suboptimality(x)
            record = TraceRecord(
                iter=t,
                elapsed_seconds=time.perf_counter() - self._start,
                f_value=f_value,
                grad_norm=grad_norm,
                subsolver_iters=subsolver_iters,
                suboptimality=suboptimality,
            )
            self.trace.append(record)
            log.debug("%s iteration %s: F = %.6e, |grad| = %.3e", self.trace.algorithm, t, f_value, grad_norm)

        if status is None:
            return False
        if status == TerminalStatus.diverged:
            log.warning("%s diverged at iteration %s.", self.trace.algorithm, t)
        self.trace.finish(status, x)
        log.info("%s stopped after %s iterations: %s.", self.trace.algorithm, t, status)
        return True


def _start_point(obj: Objective, x: npt.ArrayLike, what: str) -> np.ndarray:
    vector = as_vector(x, what)
    if vector.shape[0] != obj.dim:
        raise DimensionMismatchError(what, obj.dim, vector.shape[0])
    return np.array(vector)


def _accelerated_loop(
    obj: Objective,
    x0: npt.ArrayLike,
    x1: npt.ArrayLike | None,
    model: HessianModel,
    theta: Callable[[int], float],
    opts: SolveOptions,
    seed: int,
    algorithm: str,
    calibration: SketchCalibration | None,
) -> Trace:
    """
    y_t = (1 + theta_t) x_t - theta_t x_{t-1};  x_{t+1} = y_t - H_t^-1 grad F(y_t).

    Without an explicit x1 the first step is a plain Newton-type step from x0 (stream t = 0), so a zero
    momentum reproduces the non-accelerated iteration exactly.
    """
    x = _start_point(obj, x0, "x0")
    x_next_given = None if x1 is None else _start_point(obj, x1, "x1")
    recorder = _Recorder(obj, opts, algorithm)
    log.info("Starting %s on a problem with d = %s, n = %s.", algorithm, obj.dim, obj.data_rows)

    x_prev: np.ndarray | None = None
    subsolver_iters = 0
    t = 0
    # overflow is reported through the trace, not as floating point warnings
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            grad = obj.gradient(x)
            if recorder.observe(t, x, grad, subsolver_iters):
                return recorder.trace

            if t == 0 and x_next_given is not None:
                x_prev, x = x, x_next_given
                subsolver_iters = 0
                t += 1
                continue

            momentum = 0.0 if x_prev is None else theta(t)
            if momentum == 0.0:
                y, grad_y = x, grad
            else:
                y = (1.0 + momentum) * x - momentum * x_prev  # type: ignore[operator]
                grad_y = obj.gradient(y)

            if np.all(np.isfinite(y)) and np.all(np.isfinite(grad_y)):
                h = model.build(obj, y, seed, t)
                preconditioner_seed = derive_seed(seed, t, _PRECONDITIONER_STREAM)
                report = solve_subproblem(h, grad_y, opts.subsolver, preconditioner_seed, calibration)
                x_prev, x = x, y - report.solution
                subsolver_iters = report.iterations
            else:
                # non-finite extrapolation; the next observation records the divergence
                x_prev, x = x, y
                subsolver_iters = 0
            t += 1


def rssn(
    obj: Objective,
    x0: npt.ArrayLike,
    spec: HessianApproxSpec | None,
    opts: SolveOptions,
    seed: int = 0,
    hessian_model: HessianModel | None = None,
    calibration: SketchCalibration | None = None,
) -> Trace:
    """
    Regularized sub-sampled Newton: x <- x - H^-1 grad F(x) with a freshly sampled H every iteration.

    :param obj: Objective to minimize.
    :param x0: Start point.
    :param spec: How H is sampled and regularized; ignored when `hessian_model` is given.
    :param opts: Stopping rule, sub-problem solver and recording cadence.
    :param seed: Run seed; iteration t samples from the stream (seed, t).
    :param hessian_model: Override of the Hessian approximation.
    :param calibration: Sketch size constants for the fast sub-problem solver.
    """
    model = _resolve_model(spec, hessian_model)
    return _accelerated_loop(obj, x0, None, model, lambda t: 0.0, opts, seed, "rssn", calibration)


def arssn(
    obj: Objective,
    x0: npt.ArrayLike,
    x1: npt.ArrayLike | None,
    spec: HessianApproxSpec | None,
    sched: MomentumSchedule,
    opts: SolveOptions,
    seed: int = 0,
    hessian_model: HessianModel | None = None,
    calibration: SketchCalibration | None = None,
) -> Trace:
    """
    Accelerated regularized sub-sampled Newton.

    :param x1: Second start point; one RSSN step from x0 when omitted.
    :param sched: Momentum schedule theta_t.
    """
    model = _resolve_model(spec, hessian_model)
    return _accelerated_loop(
        obj, x0, x1, model, lambda t: theta_at(sched, t), opts, seed, "arssn", calibration
    )


def _resolve_model(spec: HessianApproxSpec | None, hessian_model: HessianModel | None) -> HessianModel:
    if hessian_model is not None:
        return hessian_model
    if spec is None:
        raise ArgumentError("either a Hessian approximation spec or a Hessian model is required")
    return SubsampledHessian(spec)


def nesterov_theta(big_l: float, mu: float) -> float:
    """(sqrt(L) - sqrt(mu)) / (sqrt(L) + sqrt(mu))"""
    return (math.sqrt(big_l) - math.sqrt(mu)) / (math.sqrt(big_l) + math.sqrt(mu))


def agd(obj: Objective, x0: npt.ArrayLike, big_l: float, mu: float, opts: SolveOptions) -> Trace:
    """
    Nesterov's accelerated gradient descent with constant momentum for an L-smooth, mu-strongly convex objective.

    This is ARSSN with H = L I and theta = (sqrt(L) - sqrt(mu)) / (sqrt(L) + sqrt(mu)).
    """
    if not big_l >= mu > 0:
        raise ArgumentError(f"need L >= mu > 0, got L={big_l}, mu={mu}")
    gradient_opts = opts.model_copy(update={"subsolver": WoodburySubsolver()})
    theta = nesterov_theta(big_l, mu)
    return _accelerated_loop(
        obj, x0, None, ScaledIdentityHessian(big_l), lambda t: theta, gradient_opts, 0, "agd", None
    )


def svrg(
    obj: Objective,
    x0: npt.ArrayLike,
    step: float,
    epoch_len: int,
    opts: SolveOptions,
    seed: int = 0,
) -> Trace:
    """
    Stochastic variance reduced gradient.

    Every epoch computes the full gradient mu at the snapshot x~ and then takes `epoch_len` steps
    x <- x - step (grad f_i(x) - grad f_i(x~) + mu) with i drawn uniformly from the stream (seed, epoch).
    One trace record per epoch, taken at the snapshot.
    """
    if not step > 0:
        raise ArgumentError(f"step must be positive, got {step}")
    if epoch_len < 1:
        raise ArgumentError(f"epoch length must be at least 1, got {epoch_len}")

    snapshot = _start_point(obj, x0, "x0")
    recorder = _Recorder(obj, opts, "svrg")
    log.info("Starting svrg with step %.3e and %s inner steps per epoch.", step, epoch_len)

    epoch = 0
    inner_steps = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            full_grad = obj.gradient(snapshot)
            if recorder.observe(epoch, snapshot, full_grad, inner_steps):
                return recorder.trace

            x = snapshot.copy()
            for i in make_rng(seed, epoch).integers(0, obj.data_rows, size=epoch_len):
                x -= step * (obj.sample_gradient(x, i) - obj.sample_gradient(snapshot, i) + full_grad)
            snapshot = x
            inner_steps = epoch_len
            epoch += 1


def default_momentum(sparse: bool) -> MomentumSchedule:
    """Annealed momentum t / (t + 16) for dense data and t / (t + 30) for sparse data."""
    return AnnealedMomentum(k=30.0 if sparse else 16.0)


def zero_momentum() -> MomentumSchedule:
    return FixedMomentum(theta=0.0)

