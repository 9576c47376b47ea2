import io
import logging

import pytest
import yaml
from accel_newton.models.config import (
    ArssnAlgorithm,
    ExperimentConfig,
    LogisticProblem,
    RidgeProblem,
    SynthQuadraticProblem,
)
from arssn_common.models.base import load_yaml_mapping
from pydantic import ValidationError


def test_load_yaml_mapping(tmp_path):
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    assert load_yaml_mapping(empty) == {}

    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")
    with pytest.raises(ValueError, match="mapping"):
        load_yaml_mapping(listing)


def test_empty_config_is_rejected(write_config):
    with pytest.raises(ValidationError):
        ExperimentConfig.from_path(write_config({}))


def test_from_path(write_config, quadratic_config):
    config = ExperimentConfig.from_path(write_config(quadratic_config))

    assert isinstance(config.problem, SynthQuadraticProblem)
    assert config.problem.kappa == 10.0
    assert [algorithm.display_name for algorithm in config.algorithms] == ["arssn", "rssn", "agd"]
    assert isinstance(config.algorithms[0], ArssnAlgorithm)
    assert config.opts.max_outer_iters == 40
    assert config.calibration.count_constant == 20.0
    assert config.seeds == [0, 1]
    assert config.config_echo_path.name == "trace.config.yaml"


def test_environment_overrides_file(write_config, quadratic_config, monkeypatch):
    monkeypatch.setenv("ARSSN_OPTS__MAX_OUTER_ITERS", "5")
    monkeypatch.setenv("ARSSN_RECORD_TIMING", "true")

    config = ExperimentConfig.from_path(write_config(quadratic_config))

    assert config.opts.max_outer_iters == 5
    # sibling fields from the file survive a nested override
    assert config.opts.grad_tol == 1e-12
    assert config.record_timing


def test_resolved_echo_reproduces_config(write_config, quadratic_config, tmp_path):
    config = ExperimentConfig.from_path(write_config(quadratic_config))

    echo = io.StringIO()
    config.to_yaml(echo, resolved=True)
    content = yaml.safe_load(echo.getvalue())
    assert content["opts"]["subsolver"] == {"kind": "woodbury"}
    assert content["algorithms"][0]["hessian"]["c"] == 0.5

    assert ExperimentConfig.from_path(write_config(content, name="echo.yaml")) == config


def test_minimal_yaml_omits_defaults(write_config, quadratic_config):
    config = ExperimentConfig.from_path(write_config(quadratic_config))

    minimal = io.StringIO()
    config.to_yaml(minimal)
    content = yaml.safe_load(minimal.getvalue())
    assert "calibration" not in content
    assert "c" not in content["algorithms"][0]["hessian"]


def test_duplicate_labels_are_rejected(write_config, quadratic_config):
    quadratic_config["algorithms"].append({"name": "rssn", "hessian": {"sample_fraction": 0.25}})
    with pytest.raises(ValidationError, match="labels must be unique"):
        ExperimentConfig.from_path(write_config(quadratic_config))

    quadratic_config["algorithms"][-1]["label"] = "rssn-quarter"
    config = ExperimentConfig.from_path(write_config(quadratic_config))
    assert config.algorithms[-1].display_name == "rssn-quarter"


def test_duplicate_seeds_are_rejected(write_config, quadratic_config):
    quadratic_config["seeds"] = [1, 1]
    with pytest.raises(ValidationError, match="seeds"):
        ExperimentConfig.from_path(write_config(quadratic_config))


def test_data_section(write_config, quadratic_config, classification_libsvm, caplog):
    quadratic_config["problem"] = {"kind": "logistic"}
    with pytest.raises(ValidationError, match="needs a 'data' section"):
        ExperimentConfig.from_path(write_config(quadratic_config))

    quadratic_config["data"] = {"kind": "libsvm", "path": str(classification_libsvm)}
    config = ExperimentConfig.from_path(write_config(quadratic_config))
    assert isinstance(config.problem, LogisticProblem)

    quadratic_config["problem"] = {"kind": "synth_quadratic", "d": 4, "kappa": 2.0}
    with caplog.at_level(logging.WARNING):
        ExperimentConfig.from_path(write_config(quadratic_config))
    assert "Ignoring the 'data' section" in caplog.text


def test_missing_data_file_is_rejected(write_config, quadratic_config, tmp_path):
    quadratic_config["problem"] = {"kind": "ridge"}
    quadratic_config["data"] = {"kind": "libsvm", "path": str(tmp_path / "missing.libsvm")}
    with pytest.raises(ValidationError):
        ExperimentConfig.from_path(write_config(quadratic_config))


def test_regularizer_resolution():
    assert RidgeProblem().resolve_lam(200) == 1 / 200
    assert RidgeProblem(lam_over_n=10.0).resolve_lam(200) == 10.0 / 200
    assert RidgeProblem(lam=0.25).resolve_lam(200) == 0.25
    with pytest.raises(ValidationError, match="not both"):
        RidgeProblem(lam=0.25, lam_over_n=1.0)
