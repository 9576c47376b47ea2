import yaml
from accel_newton.harness.experiment import read_trace_csv

from .common import invoke, working_dir, working_dir_path  # noqa: F401


def _small_config(output_path) -> dict:
    return {
        "problem": {"kind": "synth_quadratic", "d": 10, "kappa": 5.0},
        "algorithms": [{"name": "rssn", "hessian": {"sample_fraction": 0.5}}, {"name": "agd"}],
        "opts": {"max_outer_iters": 15},
        "seeds": [0, 1],
        "output_path": str(output_path),
        "record_timing": False,
    }


def test_run(write_config, working_dir_path):
    output_path = working_dir_path / "trace.csv"
    config_path = write_config(_small_config(output_path))

    result = invoke("run", "--config", str(config_path), "--threads", "2", "--no-progress")

    assert result.exit_code == 0, result.output
    rows = read_trace_csv(output_path)
    assert {row.run_id for row in rows} == {"rssn-0", "rssn-1", "agd-0", "agd-1"}
    assert (working_dir_path / "trace.config.yaml").exists()


def test_existing_output_needs_force(write_config, working_dir_path):
    output_path = working_dir_path / "trace.csv"
    config_path = write_config(_small_config(output_path))
    assert invoke("run", "--config", str(config_path), "--no-progress").exit_code == 0
    first = output_path.read_bytes()

    result = invoke("run", "--config", str(config_path), "--no-progress")
    assert result.exit_code == 2
    assert "--force" in result.output

    result = invoke("run", "--config", str(config_path), "--no-progress", "--force")
    assert result.exit_code == 0, result.output
    assert output_path.read_bytes() == first


def test_output_option_overrides_config(write_config, working_dir_path):
    config_path = write_config(_small_config(working_dir_path / "configured.csv"))
    override = working_dir_path / "override.csv"

    result = invoke("run", "--config", str(config_path), "--output", str(override), "--no-progress")

    assert result.exit_code == 0, result.output
    assert override.exists()
    assert not (working_dir_path / "configured.csv").exists()
    with open(working_dir_path / "override.config.yaml", encoding="utf-8") as f:
        assert yaml.safe_load(f)["output_path"] == str(override)


def test_invalid_config(write_config, working_dir_path):
    content = _small_config(working_dir_path / "trace.csv")
    content["algorithms"] = []

    result = invoke("run", "--config", str(write_config(content)), "--no-progress")

    assert result.exit_code == 1
    assert "Invalid configuration" in result.output


def test_malformed_yaml(tmp_path):
    config_path = tmp_path / "broken.yaml"
    config_path.write_text("problem: [unclosed\n")

    result = invoke("run", "--config", str(config_path), "--no-progress")

    assert result.exit_code == 1


def test_malformed_data(write_config, working_dir_path, tmp_path):
    data_path = tmp_path / "broken.libsvm"
    data_path.write_text("1 1:1 2:1\n0 3:1 2:1\n")
    content = _small_config(working_dir_path / "trace.csv")
    content["problem"] = {"kind": "logistic"}
    content["data"] = {"kind": "libsvm", "path": str(data_path)}

    result = invoke("run", "--config", str(write_config(content)), "--no-progress")

    assert result.exit_code == 1
    assert "line 2" in result.output
    assert not (working_dir_path / "trace.csv").exists()


def test_singular_exact_newton_system(write_config, working_dir_path, tmp_path):
    # three samples in six dimensions leave B^T B singular
    data_path = tmp_path / "wide.libsvm"
    data_path.write_text("1.0 1:0.5 2:-1.0 4:2.0\n-0.5 2:1.5 3:0.25 6:-1.0\n2.0 1:1.0 5:0.75 6:0.5\n")
    content = _small_config(working_dir_path / "trace.csv")
    content["problem"] = {"kind": "ridge", "lam": 0.0}
    content["data"] = {"kind": "libsvm", "path": str(data_path)}
    exact_newton = {"sample_fraction": 1.0, "regularizer_policy": "fixed_alpha", "alpha": 0.0}
    content["algorithms"] = [{"name": "rssn", "hessian": exact_newton}]

    result = invoke("run", "--config", str(write_config(content)), "--no-progress")

    assert result.exit_code == 1
    assert "rank deficient" in result.output
    assert "positive alpha" in result.output
    assert not (working_dir_path / "trace.csv").exists()
