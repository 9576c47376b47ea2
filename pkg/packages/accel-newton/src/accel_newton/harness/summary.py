"""
Condenses a trace CSV into per-algorithm medians of iterations and seconds needed to reach a target.
"""

import logging
import math
from collections import defaultdict
from os import PathLike

import numpy as np
import rich.table
import rich.text
from arssn_models.trace import TraceFileRow
from pydantic import BaseModel

from .experiment import read_trace_csv

log = logging.getLogger(__name__)


class SummaryError(ValueError):
    """Exception for trace files that cannot be summarized."""

    pass


class AlgorithmSummary(BaseModel):
    algorithm: str
    runs: int
    reached: int
    metric: str
    """
    Column compared against the target: 'log10_subopt' or 'grad_norm'.
    """

    median_iters: float | None
    """
    None when the median run did not reach the target.
    """

    median_seconds: float | None

    @property
    def unreached(self) -> bool:
        return self.median_iters is None


def _hit(row: TraceFileRow, metric: str, target: float) -> bool:
    if metric == "log10_subopt":
        return row.log10_subopt is not None and row.log10_subopt <= math.log10(target)
    return row.grad_norm <= target


def _median(values: list[float]) -> float | None:
    median = float(np.median(values))
    return median if math.isfinite(median) else None


def summarize_rows(rows: list[TraceFileRow], target: float) -> list[AlgorithmSummary]:
    """
    Per algorithm, the median over runs of the first iteration (and elapsed time) meeting the target.

    Suboptimality is compared when any row carries it, the gradient norm otherwise. Runs that never meet the
    target count as infinitely long, so a median over mostly failed runs is reported as unreached.

    :raises SummaryError: for an empty trace or a target that is not positive.
    """
    if not rows:
        raise SummaryError("the trace file holds no rows")
    if not target > 0:
        raise SummaryError(f"target must be positive, got {target}")
    metric = "log10_subopt" if any(row.log10_subopt is not None for row in rows) else "grad_norm"
    if metric == "grad_norm":
        log.info("No suboptimality column values; comparing gradient norms against the target.")

    runs: dict[str, dict[str, list[TraceFileRow]]] = defaultdict(lambda: defaultdict(list))
    for row in rows:
        runs[row.algorithm][row.run_id].append(row)

    summaries = []
    for algorithm, by_run in runs.items():
        iterations: list[float] = []
        seconds: list[float] = []
        for run_rows in by_run.values():
            hit = next((row for row in sorted(run_rows, key=lambda r: r.iter) if _hit(row, metric, target)), None)
            iterations.append(math.inf if hit is None else hit.iter)
            if hit is None:
                seconds.append(math.inf)
            elif hit.elapsed_seconds is not None:
                seconds.append(hit.elapsed_seconds)
        summaries.append(
            AlgorithmSummary(
                algorithm=algorithm,
                runs=len(by_run),
                reached=sum(math.isfinite(i) for i in iterations),
                metric=metric,
                median_iters=_median(iterations),
                # seconds are missing when timing was disabled
                median_seconds=_median(seconds) if len(seconds) == len(iterations) else None,
            )
        )
    return summaries


def summarize(csv_path: str | PathLike, target_subopt: float) -> list[AlgorithmSummary]:
    """
    Summarize a trace CSV; see `summarize_rows`.

    :raises SummaryError: if the file is malformed or empty.
    """
    try:
        rows = read_trace_csv(csv_path)
    except ValueError as e:
        raise SummaryError(str(e)) from e
    return summarize_rows(rows, target_subopt)


def _format_number(value: float | None, unreached: bool, precision: str) -> rich.text.Text:
    if unreached:
        return rich.text.Text("unreached", style="italic yellow")
    if value is None:
        return rich.text.Text("n/a", style="italic")
    return rich.text.Text(f"{value:{precision}}")


def summary_table(summaries: list[AlgorithmSummary], target: float) -> rich.table.Table:
    metric = summaries[0].metric if summaries else "log10_subopt"
    title = f"{'suboptimality' if metric == 'log10_subopt' else 'gradient norm'} <= {target:g}"
    table = rich.table.Table(title=title)
    table.add_column("Algorithm", no_wrap=True)
    table.add_column("Runs", justify="right")
    table.add_column("Reached", justify="right")
    table.add_column("Median iterations", justify="right")
    table.add_column("Median seconds", justify="right")
    for summary in summaries:
        table.add_row(
            summary.algorithm,
            str(summary.runs),
            rich.text.Text(str(summary.reached), style="green" if summary.reached == summary.runs else "yellow"),
            _format_number(summary.median_iters, summary.unreached, ".1f"),
            _format_number(summary.median_seconds, summary.unreached, ".3f"),
        )
    return table
