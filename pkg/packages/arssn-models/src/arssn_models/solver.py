"""
Parameter models for the outer Newton loop and its sub-problem solvers.
"""

import enum
import math
from typing import Annotated, Literal, Self

from pydantic import Field, NonNegativeFloat, PositiveFloat, PositiveInt, model_validator

from .common import StrictBaseModel

UnitInterval = Annotated[float, Field(gt=0, lt=1)]


class SamplingScheme(enum.StrEnum):
    """How rows of the Hessian factor are drawn."""

    row_norm = "row_norm"
    uniform = "uniform"


class RegularizerPolicy(enum.StrEnum):
    """How the ridge term alpha of the sub-sampled Hessian is chosen each iteration."""

    c_times_specnorm_b_sq = "c_times_specnorm_B_sq"
    """alpha = c * ||B(x)||^2, for row norm squares sampling."""

    c_times_specnorm_hessian = "c_times_specnorm_hessian"
    """alpha = c * ||Hessian(x)||, for uniform sampling."""

    fixed_alpha = "fixed_alpha"
    """alpha is given explicitly."""


class HessianApproxSpec(StrictBaseModel):
    """Sub-sampled Hessian H = B~^T B~ + alpha I built from a random sample of the Hessian factor rows."""

    sampling: SamplingScheme = SamplingScheme.row_norm

    sample_size_s: PositiveInt | None = None
    """
    Number of sampled rows. Mutually exclusive with `sample_fraction`.
    """

    sample_fraction: Annotated[float, Field(gt=0, le=1)] | None = None
    """
    Sampled rows as a fraction of the data rows (rounded up, at least one).
    A fraction of exactly 1 uses the full Hessian factor without sampling.
    """

    regularizer_policy: RegularizerPolicy = RegularizerPolicy.c_times_specnorm_b_sq

    c: UnitInterval = 0.5
    """
    Sample size parameter; also the multiplier of the regularizer policies.
    """

    alpha: NonNegativeFloat | None = None
    """
    Regularizer for the `fixed_alpha` policy.
    """

    sketch_seed_base: int = 0
    """
    Offset mixed into the per-iteration sampling streams.
    """

    @model_validator(mode="after")
    def check_sample_size(self) -> Self:
        if (self.sample_size_s is None) == (self.sample_fraction is None):
            raise ValueError("Exactly one of 'sample_size_s' and 'sample_fraction' must be set.")
        return self

    @model_validator(mode="after")
    def check_alpha(self) -> Self:
        if self.regularizer_policy == RegularizerPolicy.fixed_alpha and self.alpha is None:
            raise ValueError("The 'fixed_alpha' regularizer policy requires 'alpha'.")
        return self

    def resolve_sample_size(self, n_rows: int) -> int:
        """Number of rows to draw from a factor with `n_rows` rows."""
        if self.sample_size_s is not None:
            return self.sample_size_s
        # round first so 0.1 * 600 does not become 61
        return max(1, math.ceil(round(self.sample_fraction * n_rows, 9)))  # type: ignore[operator]

    @property
    def uses_full_factor(self) -> bool:
        return self.sample_fraction == 1.0


class FixedMomentum(StrictBaseModel):
    kind: Literal["fixed"] = "fixed"
    theta: Annotated[float, Field(ge=0, lt=1)]


class AnnealedMomentum(StrictBaseModel):
    """theta_t = t / (t + k); k = 16 for dense data, 30 for sparse data."""

    kind: Literal["anneal"] = "anneal"
    k: PositiveFloat = 16.0


class Theorem2Momentum(StrictBaseModel):
    """theta = (1 - sqrt(1 - pi)) / (1 + sqrt(1 - pi)) - eps0, clamped at 0."""

    kind: Literal["theorem2"] = "theorem2"
    pi: UnitInterval
    eps0: NonNegativeFloat = 0.0


MomentumSchedule = Annotated[FixedMomentum | AnnealedMomentum | Theorem2Momentum, Field(discriminator="kind")]


class EmbeddingKind(enum.StrEnum):
    count_sketch = "count_sketch"
    gaussian = "gaussian"


class WoodburySubsolver(StrictBaseModel):
    kind: Literal["woodbury"] = "woodbury"


class CGSubsolver(StrictBaseModel):
    kind: Literal["cg"] = "cg"

    rel_tol: PositiveFloat = 0.1
    """
    Stop once ||H p - grad|| <= rel_tol * ||grad||.
    """

    max_iters: PositiveInt | None = None
    """
    Iteration cap; defaults to the problem dimension.
    """


class FastPCGSubsolver(StrictBaseModel):
    kind: Literal["fast_pcg"] = "fast_pcg"

    iterations: PositiveInt | Literal["auto"] = "auto"
    """
    PCG iterations T. `auto` picks T so the relative residual provably drops below `rel_tol`.
    """

    rel_tol: PositiveFloat = 0.1

    embedding: EmbeddingKind = EmbeddingKind.count_sketch
    """
    Sketch realizing the 1/3-subspace embedding of the sampled factor's row space.
    """


SubsolverSpec = Annotated[WoodburySubsolver | CGSubsolver | FastPCGSubsolver, Field(discriminator="kind")]


class SolveOptions(StrictBaseModel):
    grad_tol: PositiveFloat = 1e-10
    """
    Stop once ||grad F(x)|| <= grad_tol.
    """

    max_outer_iters: Annotated[int, Field(ge=0)] = 1000

    subsolver: SubsolverSpec = Field(default_factory=WoodburySubsolver)

    record_every: PositiveInt = 1
    """
    Record every k-th iteration; the first and the terminal iteration are always recorded.
    """


class SketchCalibration(StrictBaseModel):
    """Explicit constants for the O(.) sketch sizes that guarantee an epsilon-subspace embedding."""

    gaussian_constant: PositiveFloat = 100.0
    """
    Gaussian sketch rows: ceil(gaussian_constant * d / eps^2).
    """

    gaussian_cap: PositiveInt = 200_000

    count_constant: PositiveFloat = 20.0
    """
    Count sketch rows: ceil(count_constant * d^2 / eps^2).
    """

    embedding_epsilon: UnitInterval = 1.0 / 3.0
    """
    Distortion targeted by the preconditioner sketch of the fast sub-problem solver.
    """
