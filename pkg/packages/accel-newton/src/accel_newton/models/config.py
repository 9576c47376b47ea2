"""
Experiment configuration: which problem, which algorithms, how many seeds and where the traces go.
"""

import logging
from pathlib import Path
from typing import Annotated, Literal, Self

from arssn_common.models.base import FilePath, IgnoringBaseSettings
from arssn_models.common import StrictBaseModel
from arssn_models.solver import HessianApproxSpec, MomentumSchedule, SketchCalibration, SolveOptions
from pydantic import Field, NonNegativeFloat, PositiveFloat, PositiveInt, model_validator

log = logging.getLogger(__name__)


class LibsvmData(StrictBaseModel):
    kind: Literal["libsvm"] = "libsvm"

    path: FilePath

    n_features: PositiveInt | None = None
    """
    Number of columns; the largest index in the file when omitted.
    """


class SyntheticData(StrictBaseModel):
    """Gaussian design, dense unless `density` < 1."""

    kind: Literal["synthetic"] = "synthetic"
    n: PositiveInt
    d: PositiveInt
    seed: int = 0
    density: Annotated[float, Field(gt=0, le=1)] = 1.0
    noise: NonNegativeFloat = 0.1


DataSource = Annotated[LibsvmData | SyntheticData, Field(discriminator="kind")]


class _RegularizedProblem(StrictBaseModel):
    lam: NonNegativeFloat | None = None
    """
    Absolute ridge weight.
    """

    lam_over_n: NonNegativeFloat | None = None
    """
    Ridge weight as a multiple of 1/n; lam = 1/n when neither is given.
    """

    @model_validator(mode="after")
    def _one_regularizer(self) -> Self:
        if self.lam is not None and self.lam_over_n is not None:
            raise ValueError("set either 'lam' or 'lam_over_n', not both")
        return self

    def resolve_lam(self, n: int) -> float:
        if self.lam is not None:
            return self.lam
        return (1.0 if self.lam_over_n is None else self.lam_over_n) / n


class RidgeProblem(_RegularizedProblem):
    """||Ax - b||^2 + lam ||x||^2"""

    kind: Literal["ridge"] = "ridge"


class LogisticProblem(_RegularizedProblem):
    """(1/n) sum log(1 + exp(-b_i a_i^T x)) + lam/2 ||x||^2"""

    kind: Literal["logistic"] = "logistic"


class SynthQuadraticProblem(StrictBaseModel):
    """Ridge regression with a prescribed Hessian condition number and a known optimum."""

    kind: Literal["synth_quadratic"] = "synth_quadratic"
    d: Annotated[int, Field(ge=2)]
    kappa: Annotated[float, Field(ge=1)]
    n_rows: PositiveInt | None = None
    lam: NonNegativeFloat = 0.0
    noise: NonNegativeFloat = 0.1
    seed: int = 0


ProblemSpec = Annotated[RidgeProblem | LogisticProblem | SynthQuadraticProblem, Field(discriminator="kind")]


class _AlgorithmBase(StrictBaseModel):
    label: str | None = None
    """
    Name in the CSV `algorithm` column and the run ids; the algorithm name by default.
    """

    @property
    def display_name(self) -> str:
        return self.label or self.name  # type: ignore[attr-defined]


class ArssnAlgorithm(_AlgorithmBase):
    name: Literal["arssn"] = "arssn"
    hessian: HessianApproxSpec

    momentum: MomentumSchedule | None = None
    """
    Annealed t/(t+16) for dense data and t/(t+30) for sparse data when omitted.
    """


class RssnAlgorithm(_AlgorithmBase):
    name: Literal["rssn"] = "rssn"
    hessian: HessianApproxSpec


class AgdAlgorithm(_AlgorithmBase):
    """Nesterov's method; smoothness constants default to the objective's own bounds."""

    name: Literal["agd"] = "agd"
    lipschitz: PositiveFloat | None = None
    mu: PositiveFloat | None = None


class SvrgAlgorithm(_AlgorithmBase):
    name: Literal["svrg"] = "svrg"

    step: PositiveFloat | None = None
    """
    Inner step length; 0.1 / max_i L_i when omitted.
    """

    epoch_len: PositiveInt | None = None
    """
    Inner steps per epoch; 2n when omitted.
    """


AlgorithmSpec = Annotated[
    ArssnAlgorithm | RssnAlgorithm | AgdAlgorithm | SvrgAlgorithm,
    Field(discriminator="name"),
]


class ExperimentConfig(IgnoringBaseSettings):
    problem: ProblemSpec

    data: DataSource | None = None
    """
    Data of ridge and logistic problems; synth_quadratic generates its own.
    """

    algorithms: Annotated[list[AlgorithmSpec], Field(min_length=1)]

    opts: SolveOptions = Field(default_factory=SolveOptions)

    calibration: SketchCalibration = Field(default_factory=SketchCalibration)

    seeds: Annotated[list[int], Field(min_length=1)] = Field(default_factory=lambda: [0])

    output_path: Path

    record_timing: bool = True
    """
    Leave `elapsed_seconds` empty when false so that repeated runs write byte-identical files.
    """

    @model_validator(mode="after")
    def _data_matches_problem(self) -> Self:
        needs_data = self.problem.kind in ("ridge", "logistic")
        if needs_data and self.data is None:
            raise ValueError(f"problem kind '{self.problem.kind}' needs a 'data' section")
        if not needs_data and self.data is not None:
            log.warning("Ignoring the 'data' section: %s generates its own data.", self.problem.kind)
        return self

    @model_validator(mode="after")
    def _unique_labels(self) -> Self:
        names = [algorithm.display_name for algorithm in self.algorithms]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ValueError(f"algorithm labels must be unique, set 'label' for: {', '.join(duplicates)}")
        return self

    @model_validator(mode="after")
    def _unique_seeds(self) -> Self:
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be unique")
        return self

    @property
    def config_echo_path(self) -> Path:
        return self.output_path.with_name(f"{self.output_path.stem}.config.yaml")
