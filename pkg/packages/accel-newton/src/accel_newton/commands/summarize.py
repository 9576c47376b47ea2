"""Command for summarizing a trace CSV."""

import json
import logging
import sys

import click
import rich.console
from arssn_common.cli import FILE_R_E, output_json

from ..harness.summary import SummaryError, summarize as summarize_csv, summary_table
from . import ConfigurationError

log = logging.getLogger(__name__)


@click.command()
@click.option("--csv", "csv_path", metavar="PATH", type=FILE_R_E, required=True, help="Trace CSV written by `run`")
@click.option(
    "--target",
    type=float,
    default=1e-10,
    show_default=True,
    help="Suboptimality (or gradient norm, when no optimum is known) to reach",
)
@output_json
def summarize(csv_path: str, target: float, output_json: bool):
    """
    Median iterations and seconds each algorithm needs to reach the target.
    """
    try:
        summaries = summarize_csv(csv_path, target)
    except SummaryError as e:
        raise ConfigurationError(str(e)) from e

    if output_json:
        json.dump([summary.model_dump(mode="json") for summary in summaries], sys.stdout)
    else:
        rich.console.Console().print(summary_table(summaries, target))
