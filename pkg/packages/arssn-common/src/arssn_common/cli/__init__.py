"""
Common click options for the CLI commands.
"""

from os import sched_getaffinity

import click

# Aliases for path types for click options
# Naming convention: {DIR,FILE}_{Read,Write}_{Exists,Create}
FILE_R_E = click.Path(exists=True, file_okay=True, dir_okay=False, readable=True, resolve_path=True)
FILE_W_C = click.Path(exists=False, file_okay=True, dir_okay=False, writable=True, resolve_path=True)

config_file = click.option(
    "--config",
    "config_file",
    metavar="PATH",
    type=FILE_R_E,
    required=True,
    help="Path to the experiment configuration (YAML)",
)

threads = click.option(
    "--threads",
    default=min(len(sched_getaffinity(0)), 4),
    type=click.IntRange(min=1),
    show_default=True,
    help="Number of (algorithm, seed) cells to run in parallel",
)

output_json = click.option("--json", "output_json", is_flag=True, help="Output JSON for machine-readability.")

force = click.option("--force/--no-force", help="Overwrite existing output files")

progress = click.option("--progress/--no-progress", default=True, help="Show a progress bar over the run grid")
