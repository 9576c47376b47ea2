"""
Strategies that build the approximate Hessian H = B~^T B~ + alpha I of one outer iteration.
"""

from __future__ import annotations

import abc
import logging
import math

import numpy as np
from arssn_models.solver import HessianApproxSpec, RegularizerPolicy, SamplingScheme

from ..errors import ArgumentError
from ..linalg import MatrixHandle, Vector, derive_seed, spectral_norm
from ..objective import Objective
from ..sketch import SketchKind, apply_sketch, build_sketch, row_norm_probabilities
from ..subsolver import ApproxHessian

log = logging.getLogger(__name__)


class HessianModel(abc.ABC):
    """Builds one ApproxHessian per outer iteration; instances may cache per-objective quantities."""

    @abc.abstractmethod
    def build(self, obj: Objective, y: Vector, seed: int, t: int) -> ApproxHessian:
        """
        :param obj: Objective being minimized.
        :param y: Point the Hessian is approximated at.
        :param seed: Run seed.
        :param t: Outer iteration; selects the random stream.
        """


class SubsampledHessian(HessianModel):
    """
    Regularized sub-sampled Hessian: rows of B(y) drawn by row norm squares or uniform sampling, rescaled,
    plus alpha I chosen by the regularizer policy. The objective's own regularizer is added on top.
    """

    __log = log.getChild("SubsampledHessian")

    def __init__(self, spec: HessianApproxSpec):
        self.spec = spec
        self._cached_probabilities: Vector | None = None
        self._cached_factor_norm_sq: float | None = None

    def _factor_norm_sq(self, obj: Objective, factor: MatrixHandle) -> float:
        if obj.hessian_is_constant and self._cached_factor_norm_sq is not None:
            return self._cached_factor_norm_sq
        norm_sq = spectral_norm(factor).value ** 2
        if obj.hessian_is_constant:
            self._cached_factor_norm_sq = norm_sq
        return norm_sq

    def _probabilities(self, obj: Objective, factor: MatrixHandle) -> Vector:
        if obj.hessian_is_constant and self._cached_probabilities is not None:
            return self._cached_probabilities
        probabilities = row_norm_probabilities(factor)
        if obj.hessian_is_constant:
            self._cached_probabilities = probabilities
        return probabilities

    def alpha(self, obj: Objective, factor: MatrixHandle) -> float:
        """Policy regularizer, without the objective's own ridge term."""
        match self.spec.regularizer_policy:
            case RegularizerPolicy.c_times_specnorm_b_sq:
                return self.spec.c * self._factor_norm_sq(obj, factor)
            case RegularizerPolicy.c_times_specnorm_hessian:
                return self.spec.c * (self._factor_norm_sq(obj, factor) + obj.regularizer_weight)
            case RegularizerPolicy.fixed_alpha:
                return float(self.spec.alpha)  # type: ignore[arg-type]
            case policy:
                raise ArgumentError(f"unknown regularizer policy {policy!r}")

    def sample(self, obj: Objective, factor: MatrixHandle, seed: int, t: int) -> MatrixHandle:
        if self.spec.uses_full_factor:
            return factor
        s = self.spec.resolve_sample_size(obj.data_rows)
        stream_seed = derive_seed(seed, self.spec.sketch_seed_base, t)
        if self.spec.sampling == SamplingScheme.uniform:
            sketch = build_sketch(SketchKind.uniform_sampling, s, stream_seed, a=factor)
        else:
            sketch = build_sketch(
                SketchKind.row_norm_sampling,
                s,
                stream_seed,
                a=factor,
                probabilities=self._probabilities(obj, factor),
            )
        return apply_sketch(sketch, factor)

    def build(self, obj: Objective, y: Vector, seed: int, t: int) -> ApproxHessian:
        factor = obj.hessian_factor(y)
        btilde = self.sample(obj, factor, seed, t)
        alpha = self.alpha(obj, factor) + obj.regularizer_weight
        self.__log.debug("Iteration %s: sampled %s rows, alpha = %.6g.", t, btilde.nrows, alpha)
        return ApproxHessian(btilde, alpha)


class ExactHessian(HessianModel):
    """
    Deterministic H = inflation * Hessian(y).

    With inflation = 1 / (1 - pi) this satisfies E[H^-1] = (1 - pi) [Hessian]^-1 exactly, the regime in which
    the companion-matrix rate prediction is sharp. Without an objective regularizer the Hessian factor needs full
    column rank.
    """

    def __init__(self, inflation: float = 1.0):
        if not inflation >= 1:
            raise ArgumentError(f"inflation must be at least 1, got {inflation}")
        self.inflation = inflation

    @classmethod
    def for_rate(cls, pi: float) -> ExactHessian:
        if not 0 <= pi < 1:
            raise ArgumentError(f"pi must lie in [0, 1), got {pi}")
        return cls(1.0 / (1.0 - pi))

    def build(self, obj: Objective, y: Vector, seed: int, t: int) -> ApproxHessian:
        factor = obj.hessian_factor(y).scaled(math.sqrt(self.inflation))
        return ApproxHessian(factor, obj.regularizer_weight * self.inflation)


class ScaledIdentityHessian(HessianModel):
    """H = L I; turns the Newton step into a gradient step of length 1/L."""

    def __init__(self, big_l: float):
        if not big_l > 0:
            raise ArgumentError(f"L must be positive, got {big_l}")
        self.big_l = big_l

    def build(self, obj: Objective, y: Vector, seed: int, t: int) -> ApproxHessian:
        return ApproxHessian(MatrixHandle.dense(np.zeros((0, obj.dim))), self.big_l)
