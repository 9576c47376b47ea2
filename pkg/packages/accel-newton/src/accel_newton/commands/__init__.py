"""
Command modules for the accel-newton package.
"""

import click


class ConfigurationError(click.ClickException):
    """Invalid configuration or unparsable input; exit code 1."""

    exit_code = 1


class OutputError(click.ClickException):
    """Output could not be written; exit code 2."""

    exit_code = 2
