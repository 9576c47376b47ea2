"""Command for running an experiment grid."""

import logging
from pathlib import Path

import click
import yaml
from arssn_common.cli import FILE_W_C, config_file, force, progress, threads
from arssn_core.errors import ArgumentError, CapabilityError, DimensionMismatchError, NotPositiveDefiniteError
from pydantic import ValidationError

from ..harness.experiment import run_experiment
from ..harness.libsvm import LibsvmParseError
from ..models.config import ExperimentConfig
from . import ConfigurationError, OutputError

log = logging.getLogger(__name__)


@click.command()
@config_file
@click.option(
    "--output",
    "output_path",
    metavar="PATH",
    type=FILE_W_C,
    default=None,
    help="Write the trace CSV here instead of the configured output_path",
)
@threads
@force
@progress
def run(config_file: str, output_path: str | None, threads: int, force: bool, progress: bool):
    """
    Run every (algorithm, seed) cell of an experiment configuration.

    Writes one CSV with all trace records and the resolved configuration as <csv stem>.config.yaml.
    """
    try:
        config = ExperimentConfig.from_path(config_file)
        if output_path is not None:
            config.output_path = Path(output_path)
    except (ValidationError, yaml.YAMLError, ValueError) as e:
        raise ConfigurationError(f"Invalid configuration {config_file}:\n{e}") from e

    if config.output_path.exists() and not force:
        raise OutputError(f"{config.output_path} exists; pass --force to overwrite it.")

    log.info("Starting experiment from %s ...", config_file)
    try:
        run_experiment(config, threads=threads, progress=progress)
    except (LibsvmParseError, ArgumentError, DimensionMismatchError, CapabilityError) as e:
        raise ConfigurationError(str(e)) from e
    except NotPositiveDefiniteError as e:
        raise ConfigurationError(f"{e}; configure a positive alpha or regularizer") from e
    except OSError as e:
        raise OutputError(f"Could not write {config.output_path}: {e}") from e
    log.info("Experiment finished!")
