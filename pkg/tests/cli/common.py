"""
Common methods/fixtures for CLI tests
"""

from pathlib import Path

import pytest
from accel_newton.cli import build_cli
from click.testing import CliRunner, Result


@pytest.fixture
def working_dir(tmpdir_factory: pytest.TempdirFactory):
    """Create temporary folder for the experiment outputs"""
    datadir = tmpdir_factory.mktemp("experiment")
    return datadir


@pytest.fixture
def working_dir_path(working_dir) -> Path:
    return Path(working_dir.strpath)


def invoke(*args: str) -> Result:
    runner = CliRunner()
    return runner.invoke(build_cli(), list(args), catch_exceptions=False)
