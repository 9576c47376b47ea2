"""Command for generating synthetic data sets."""

import logging

import click
from arssn_common.cli import FILE_W_C, force
from arssn_core.errors import ArgumentError
from arssn_core.objective import synth_classification, synth_quadratic, synth_regression

from ..harness.libsvm import write_libsvm
from . import ConfigurationError, OutputError

log = logging.getLogger(__name__)


@click.command()
@click.option(
    "--kind",
    type=click.Choice(["quadratic", "classification", "regression"]),
    required=True,
    help="quadratic: ridge data with a prescribed condition number; "
    "classification: +-1 labels; regression: real targets",
)
@click.option("--n", "n", type=click.IntRange(min=1), default=None, help="Number of rows (defaults to d)")
@click.option("--d", "d", type=click.IntRange(min=2), required=True, help="Number of features")
@click.option(
    "--kappa",
    type=click.FloatRange(min=1),
    default=100.0,
    show_default=True,
    help="Condition number (quadratic)",
)
@click.option(
    "--lam",
    type=click.FloatRange(min=0),
    default=0.0,
    show_default=True,
    help="Ridge weight the condition number refers to (quadratic)",
)
@click.option(
    "--density",
    type=click.FloatRange(min=0, min_open=True, max=1),
    default=1.0,
    show_default=True,
    help="Fraction of nonzeros",
)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed of the data stream")
@click.option("--out", "out", metavar="PATH", type=FILE_W_C, required=True, help="Output libsvm file")
@force
def gen(kind: str, n: int | None, d: int, kappa: float, lam: float, density: float, seed: int, out: str, force: bool):
    """
    Generate a synthetic data set in libsvm format.
    """
    n_rows = d if n is None else n
    try:
        match kind:
            case "quadratic":
                problem = synth_quadratic(d=d, kappa=kappa, seed=seed, n_rows=n_rows, lam=lam)
                a, b = problem.a, problem.b
            case "classification":
                a, b = synth_classification(n_rows, d, seed, density=density)
            case _:
                a, b = synth_regression(n_rows, d, seed, density=density)
    except ArgumentError as e:
        raise ConfigurationError(str(e)) from e

    try:
        with open(out, "w" if force else "x", encoding="utf-8") as f:
            write_libsvm(a, b, f)
    except FileExistsError as e:
        raise OutputError(f"{out} exists; pass --force to overwrite it.") from e
    except OSError as e:
        raise OutputError(f"Could not write {out}: {e}") from e
    log.info("Wrote %s x %s %s data to %s", a.nrows, a.ncols, kind, out)
