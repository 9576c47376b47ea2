"""
Per-iteration trace records and the CSV row schema of experiment outputs.
"""

import enum
import math
from typing import ClassVar

from pydantic import Field, NonNegativeInt

from .common import StrictBaseModel


class TerminalStatus(enum.StrEnum):
    converged = "converged"
    max_iters = "max_iters"
    diverged = "diverged"


class TraceRecord(StrictBaseModel):
    """State of an optimizer after one outer iteration."""

    iter: NonNegativeInt

    elapsed_seconds: float
    """
    Wall-clock seconds since the run started.
    """

    f_value: float

    grad_norm: float

    subsolver_iters: NonNegativeInt = 0

    suboptimality: float | None = None
    """
    F(x) - F(x*), for objectives with a known optimum.
    """

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.f_value) and math.isfinite(self.grad_norm)


def format_float(value: float | None) -> str:
    """17 significant digits; enough to round-trip any double."""
    if value is None:
        return ""
    return f"{value:.17g}"


def _parse_float(value: str) -> float | None:
    return float(value) if value != "" else None


class TraceFileRow(StrictBaseModel):
    """One row of an experiment CSV."""

    HEADER: ClassVar[tuple[str, ...]] = (
        "run_id",
        "algorithm",
        "seed",
        "iter",
        "elapsed_seconds",
        "f_value",
        "grad_norm",
        "log10_subopt",
    )

    run_id: str
    algorithm: str
    seed: int
    iter: NonNegativeInt

    elapsed_seconds: float | None = None
    """
    Empty when timing is disabled, which keeps repeated runs byte-identical.
    """

    f_value: float
    grad_norm: float

    log10_subopt: float | None = Field(default=None)
    """
    log10(F(x) - F(x*)); only present for problems with a known optimum.
    """

    def to_csv_fields(self) -> list[str]:
        return [
            self.run_id,
            self.algorithm,
            str(self.seed),
            str(self.iter),
            format_float(self.elapsed_seconds),
            format_float(self.f_value),
            format_float(self.grad_norm),
            format_float(self.log10_subopt),
        ]

    @classmethod
    def from_csv_fields(cls, row: dict[str, str]) -> "TraceFileRow":
        return cls(
            run_id=row["run_id"],
            algorithm=row["algorithm"],
            seed=int(row["seed"]),
            iter=int(row["iter"]),
            elapsed_seconds=_parse_float(row["elapsed_seconds"]),
            f_value=float(row["f_value"]),
            grad_norm=float(row["grad_norm"]),
            log10_subopt=_parse_float(row["log10_subopt"]),
        )
