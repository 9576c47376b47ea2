"""
Runs every (algorithm, seed) cell of an experiment and writes the traces as one CSV.
"""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from os import PathLike
from pathlib import Path

import numpy as np
from arssn_common.constants import TQDM_DEFAULTS
from arssn_core.newton import Trace, agd, arssn, default_momentum, rssn, svrg
from arssn_models.trace import TraceFileRow
from pydantic import ValidationError
from tqdm.auto import tqdm

from ..models.config import (
    AgdAlgorithm,
    AlgorithmSpec,
    ArssnAlgorithm,
    ExperimentConfig,
    RssnAlgorithm,
    SvrgAlgorithm,
)
from .problems import BuiltProblem, build_problem

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunResult:
    label: str
    seed: int
    trace: Trace

    @property
    def run_id(self) -> str:
        return f"{self.label}-{self.seed}"


def run_cell(problem: BuiltProblem, algorithm: AlgorithmSpec, seed: int, cfg: ExperimentConfig) -> Trace:
    """Run one algorithm from x0 = 0 with one seed."""
    obj = problem.objective
    x0 = np.zeros(obj.dim)
    match algorithm:
        case ArssnAlgorithm(hessian=hessian, momentum=momentum):
            schedule = momentum if momentum is not None else default_momentum(problem.sparse)
            return arssn(obj, x0, None, hessian, schedule, cfg.opts, seed=seed, calibration=cfg.calibration)
        case RssnAlgorithm(hessian=hessian):
            return rssn(obj, x0, hessian, cfg.opts, seed=seed, calibration=cfg.calibration)
        case AgdAlgorithm(lipschitz=lipschitz, mu=mu):
            if lipschitz is None or mu is None:
                default_l, default_mu = obj.smoothness_bounds()
                lipschitz = default_l if lipschitz is None else lipschitz
                mu = default_mu if mu is None else mu
            return agd(obj, x0, lipschitz, mu, cfg.opts)
        case SvrgAlgorithm(step=step, epoch_len=epoch_len):
            step = 0.1 / obj.sample_smoothness() if step is None else step
            epoch_len = 2 * obj.data_rows if epoch_len is None else epoch_len
            return svrg(obj, x0, step, epoch_len, cfg.opts, seed=seed)
        case _:
            raise ValueError(f"unknown algorithm {algorithm!r}")


def run_experiment(cfg: ExperimentConfig, threads: int = 1, progress: bool = False) -> list[RunResult]:
    """
    Execute the (algorithm x seed) grid, then write the trace CSV and the resolved configuration next to it.

    Cells may run concurrently; results are returned and written in configuration order.

    :param threads: Number of cells run in parallel.
    :param progress: Show a progress bar over the cells.
    """
    problem = build_problem(cfg)
    cells = [(algorithm, seed) for algorithm in cfg.algorithms for seed in cfg.seeds]
    log.info("Running %s cells on %s threads.", len(cells), threads)

    with (
        ThreadPoolExecutor(max_workers=threads) as executor,
        tqdm(total=len(cells), desc="RUN     ", disable=not progress, **TQDM_DEFAULTS) as progress_bar,  # type: ignore[call-overload]
    ):
        futures = [executor.submit(run_cell, problem, algorithm, seed, cfg) for algorithm, seed in cells]
        for future in as_completed(futures):
            future.result()
            progress_bar.update(1)
        results = [
            RunResult(label=algorithm.display_name, seed=seed, trace=future.result())
            for (algorithm, seed), future in zip(cells, futures, strict=True)
        ]

    for result in results:
        log.info(
            "%s: %s after %s iterations.", result.run_id, result.trace.terminal_status, result.trace.iterations
        )

    write_trace_csv(results, cfg.output_path, timing=cfg.record_timing)
    with open(cfg.config_echo_path, "w", encoding="utf-8") as fd:
        cfg.to_yaml(fd, resolved=True)
    log.info("Wrote %s and %s", cfg.output_path, cfg.config_echo_path)
    return results


def _log10(value: float | None) -> float | None:
    if value is None:
        return None
    if value <= 0:
        return -math.inf
    return math.log10(value)


def trace_rows(result: RunResult, timing: bool = True) -> Iterable[TraceFileRow]:
    for record in result.trace.records:
        yield TraceFileRow(
            run_id=result.run_id,
            algorithm=result.label,
            seed=result.seed,
            iter=record.iter,
            elapsed_seconds=record.elapsed_seconds if timing else None,
            f_value=record.f_value,
            grad_norm=record.grad_norm,
            log10_subopt=_log10(record.suboptimality),
        )


def write_trace_csv(results: Iterable[RunResult], path: str | PathLike, timing: bool = True) -> None:
    """
    Write all records of all runs to one CSV.

    :param timing: Write wall-clock seconds; left empty otherwise.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TraceFileRow.HEADER)
        for result in results:
            writer.writerows(row.to_csv_fields() for row in trace_rows(result, timing))


def read_trace_csv(path: str | PathLike) -> list[TraceFileRow]:
    """
    Read a trace CSV written by `write_trace_csv`.

    :raises ValueError: on a wrong header or a malformed row.
    """
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or tuple(reader.fieldnames) != TraceFileRow.HEADER:
            raise ValueError(f"{path}: expected header {','.join(TraceFileRow.HEADER)}, got {reader.fieldnames}")
        rows = []
        for line_number, row in enumerate(reader, start=2):
            try:
                rows.append(TraceFileRow.from_csv_fields(row))
            except (ValueError, ValidationError, KeyError, TypeError) as e:
                raise ValueError(f"{path}, line {line_number}: {e}") from e
    return rows
