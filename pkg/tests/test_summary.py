import csv

import pytest
import rich.console
from accel_newton.harness.summary import SummaryError, summarize, summarize_rows, summary_table
from arssn_models.trace import TraceFileRow


def _run(algorithm: str, seed: int, log10_subopts: list[float | None], seconds_per_iter: float | None = 0.5):
    return [
        TraceFileRow(
            run_id=f"{algorithm}-{seed}",
            algorithm=algorithm,
            seed=seed,
            iter=i,
            elapsed_seconds=None if seconds_per_iter is None else i * seconds_per_iter,
            f_value=1.0,
            grad_norm=10.0 ** -i,
            log10_subopt=value,
        )
        for i, value in enumerate(log10_subopts)
    ]


def _reaching_at(algorithm: str, seed: int, hit: int, length: int = 12):
    return _run(algorithm, seed, [-1.0 - (10.0 if i >= hit else i * 0.5) for i in range(length)])


def _write(rows: list[TraceFileRow], path):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TraceFileRow.HEADER)
        writer.writerows(row.to_csv_fields() for row in rows)
    return path


def test_median_iterations():
    rows = _reaching_at("arssn", 0, 5) + _reaching_at("arssn", 1, 7) + _reaching_at("arssn", 2, 9)

    (summary,) = summarize_rows(rows, target=1e-10)

    assert summary.algorithm == "arssn"
    assert summary.metric == "log10_subopt"
    assert (summary.runs, summary.reached) == (3, 3)
    assert summary.median_iters == 7
    assert summary.median_seconds == pytest.approx(3.5)
    assert not summary.unreached


def test_mostly_failed_runs_are_unreached():
    never = [-1.0] * 12
    rows = _reaching_at("rssn", 0, 4) + _run("rssn", 1, never) + _run("rssn", 2, never)

    (summary,) = summarize_rows(rows, target=1e-10)

    assert (summary.runs, summary.reached) == (3, 1)
    assert summary.unreached
    assert summary.median_seconds is None


def test_single_run(tmp_path):
    path = _write(_reaching_at("agd", 0, 7), tmp_path / "trace.csv")

    (summary,) = summarize(path, target_subopt=1e-10)

    assert summary.median_iters == 7


def test_algorithms_keep_file_order():
    rows = _reaching_at("svrg", 0, 3) + _reaching_at("arssn", 0, 2)
    assert [summary.algorithm for summary in summarize_rows(rows, 1e-10)] == ["svrg", "arssn"]


def test_gradient_norm_fallback():
    rows = _run("svrg", 0, [None] * 8)

    (summary,) = summarize_rows(rows, target=2e-4)

    assert summary.metric == "grad_norm"
    assert summary.median_iters == 4


def test_untimed_runs_have_no_seconds():
    rows = _run("agd", 0, [-1.0, -11.0], seconds_per_iter=None)

    (summary,) = summarize_rows(rows, target=1e-10)

    assert summary.median_iters == 1
    assert summary.median_seconds is None
    assert not summary.unreached


def test_errors(tmp_path):
    with pytest.raises(SummaryError, match="no rows"):
        summarize(_write([], tmp_path / "empty.csv"), 1e-10)
    with pytest.raises(SummaryError, match="positive"):
        summarize_rows(_reaching_at("agd", 0, 2), 0.0)

    foreign = tmp_path / "foreign.csv"
    foreign.write_text("x,y\n")
    with pytest.raises(SummaryError, match="expected header"):
        summarize(foreign, 1e-10)


def test_table():
    never = [-1.0] * 4
    summaries = summarize_rows(_reaching_at("arssn", 0, 2) + _run("rssn", 0, never), 1e-10)

    console = rich.console.Console(width=200, record=True)
    console.print(summary_table(summaries, 1e-10))
    text = console.export_text()

    assert "suboptimality <= 1e-10" in text
    assert "unreached" in text
    assert "2.0" in text
