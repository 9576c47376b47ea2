"""Fixtures for the tests."""

from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest
import yaml
from accel_newton.harness.libsvm import write_libsvm
from arssn_core.objective import synth_classification

WriteConfig = Callable[[dict[str, Any]], Path]


@pytest.fixture()
def write_config(tmp_path: Path) -> WriteConfig:
    """Factory writing a configuration mapping to a YAML file in the test directory."""

    def _write(content: dict[str, Any], name: str = "experiment.yaml") -> Path:
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(content, f, sort_keys=False)
        return path

    return _write


@pytest.fixture()
def quadratic_config(tmp_path: Path) -> dict[str, Any]:
    return {
        "problem": {"kind": "synth_quadratic", "d": 20, "kappa": 10.0, "seed": 3},
        "algorithms": [
            {"name": "arssn", "hessian": {"sample_fraction": 0.5}, "momentum": {"kind": "fixed", "theta": 0.3}},
            {"name": "rssn", "hessian": {"sample_fraction": 0.5}},
            {"name": "agd"},
        ],
        "opts": {"max_outer_iters": 40, "grad_tol": 1e-12},
        "seeds": [0, 1],
        "output_path": str(tmp_path / "out" / "trace.csv"),
        "record_timing": False,
    }


@pytest.fixture()
def classification_libsvm(tmp_path: Path) -> Path:
    a, b = synth_classification(60, 8, seed=5)
    path = tmp_path / "classification.libsvm"
    with open(path, "w", encoding="utf-8") as f:
        write_libsvm(a, b, f)
    return path
