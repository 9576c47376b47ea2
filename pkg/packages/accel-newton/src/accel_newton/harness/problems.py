import logging
from typing import NamedTuple

from arssn_core.errors import NotPositiveDefiniteError
from arssn_core.linalg import MatrixHandle, Vector
from arssn_core.objective import (
    DENSE_ORACLE_MAX_DIM,
    Objective,
    RidgeLogisticProblem,
    RidgeRegressionProblem,
    synth_classification,
    synth_quadratic,
    synth_regression,
)

from ..models.config import (
    DataSource,
    ExperimentConfig,
    LibsvmData,
    LogisticProblem,
    RidgeProblem,
    SynthQuadraticProblem,
    SyntheticData,
)
from .libsvm import parse_libsvm

log = logging.getLogger(__name__)


class BuiltProblem(NamedTuple):
    objective: Objective
    sparse: bool
    """
    Whether the design matrix is stored as CSR; selects the default momentum.
    """


def load_data(data: DataSource, binary: bool) -> tuple[MatrixHandle, Vector]:
    match data:
        case LibsvmData(path=path, n_features=n_features):
            return parse_libsvm(path, n_features=n_features, binary=binary)
        case SyntheticData(n=n, d=d, seed=seed, density=density, noise=noise):
            if binary:
                return synth_classification(n, d, seed, density=density)
            return synth_regression(n, d, seed, density=density, noise=noise)
        case _:
            raise ValueError(f"unknown data source {data!r}")


def _with_exact_optimum(problem: RidgeRegressionProblem) -> RidgeRegressionProblem:
    """Attach the normal-equations solution when it is affordable, so traces carry suboptimality."""
    if problem.dim > DENSE_ORACLE_MAX_DIM:
        return problem
    try:
        return problem.with_optimum(problem.exact_optimum())
    except NotPositiveDefiniteError:
        log.warning("Normal equations are singular; suboptimality will not be reported.")
        return problem


def build_problem(cfg: ExperimentConfig) -> BuiltProblem:
    """Materialize the configured objective."""
    match cfg.problem:
        case SynthQuadraticProblem() as spec:
            objective: Objective = synth_quadratic(
                d=spec.d,
                kappa=spec.kappa,
                seed=spec.seed,
                n_rows=spec.n_rows,
                lam=spec.lam,
                noise=spec.noise,
            )
        case RidgeProblem() as spec:
            a, b = load_data(cfg.data, binary=False)  # type: ignore[arg-type]
            objective = _with_exact_optimum(RidgeRegressionProblem(a, b, spec.resolve_lam(a.nrows)))
        case LogisticProblem() as spec:
            a, b = load_data(cfg.data, binary=True)  # type: ignore[arg-type]
            objective = RidgeLogisticProblem(a, b, spec.resolve_lam(a.nrows))
        case problem:
            raise ValueError(f"unknown problem {problem!r}")

    log.info(
        "Built %s problem with n = %s, d = %s, lambda = %.3e.",
        cfg.problem.kind,
        objective.data_rows,
        objective.dim,
        objective.lam,
    )
    return BuiltProblem(objective, objective.a.is_sparse)
