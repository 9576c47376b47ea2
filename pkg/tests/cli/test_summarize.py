import json

from .common import invoke, working_dir, working_dir_path  # noqa: F401


def _run(write_config, working_dir_path):
    output_path = working_dir_path / "trace.csv"
    config = {
        "problem": {"kind": "synth_quadratic", "d": 10, "kappa": 5.0},
        "algorithms": [
            {"name": "rssn", "hessian": {"sample_fraction": 1.0, "regularizer_policy": "fixed_alpha", "alpha": 0.0}},
            {"name": "agd", "label": "nesterov"},
        ],
        "opts": {"max_outer_iters": 3},
        "output_path": str(output_path),
    }
    result = invoke("run", "--config", str(write_config(config)), "--no-progress")
    assert result.exit_code == 0, result.output
    return output_path


def test_summarize_json(write_config, working_dir_path):
    csv_path = _run(write_config, working_dir_path)

    result = invoke("summarize", "--csv", str(csv_path), "--target", "1e-8", "--json")

    assert result.exit_code == 0, result.output
    summaries = {summary["algorithm"]: summary for summary in json.loads(result.stdout)}
    assert summaries.keys() == {"rssn", "nesterov"}
    # exact Newton solves a quadratic in one step
    assert summaries["rssn"]["median_iters"] == 1
    assert summaries["rssn"]["reached"] == 1
    assert summaries["rssn"]["median_seconds"] is not None
    # three accelerated gradient steps are not enough
    assert summaries["nesterov"]["median_iters"] is None
    assert summaries["nesterov"]["metric"] == "log10_subopt"


def test_summarize_table(write_config, working_dir_path):
    csv_path = _run(write_config, working_dir_path)

    result = invoke("summarize", "--csv", str(csv_path))

    assert result.exit_code == 0, result.output
    assert "rssn" in result.stdout
    assert "unreached" in result.stdout


def test_summarize_empty_csv(working_dir_path):
    csv_path = working_dir_path / "empty.csv"
    csv_path.write_text("run_id,algorithm,seed,iter,elapsed_seconds,f_value,grad_norm,log10_subopt\n")

    result = invoke("summarize", "--csv", str(csv_path))

    assert result.exit_code == 1
    assert "no rows" in result.output


def test_summarize_missing_csv(working_dir_path):
    result = invoke("summarize", "--csv", str(working_dir_path / "missing.csv"))
    assert result.exit_code == 2
