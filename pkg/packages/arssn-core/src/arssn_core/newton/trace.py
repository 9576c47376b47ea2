from __future__ import annotations

import logging

import numpy as np
from arssn_models.trace import TerminalStatus, TraceRecord

from ..errors import ArgumentError, TraceClosedError
from ..linalg import Vector

log = logging.getLogger(__name__)


class Trace:
    """Records of one optimizer run plus its terminal status and final iterate."""

    def __init__(self, algorithm: str):
        self.algorithm = algorithm
        self.records: list[TraceRecord] = []
        self.terminal_status: TerminalStatus | None = None
        self.x_final: Vector | None = None

    def append(self, record: TraceRecord) -> None:
        if self.terminal_status is not None:
            raise TraceClosedError(self.terminal_status)
        if self.records and record.iter <= self.records[-1].iter:
            raise ArgumentError(f"trace iterations must increase, got {record.iter} after {self.records[-1].iter}")
        self.records.append(record)

    def finish(self, status: TerminalStatus, x_final: Vector) -> None:
        if self.terminal_status is not None:
            raise TraceClosedError(self.terminal_status)
        self.terminal_status = status
        self.x_final = x_final

    @property
    def iterations(self) -> int:
        """Index of the last recorded iteration."""
        return self.records[-1].iter if self.records else 0

    @property
    def grad_norms(self) -> np.ndarray:
        return np.array([r.grad_norm for r in self.records])

    @property
    def f_values(self) -> np.ndarray:
        return np.array([r.f_value for r in self.records])

    @property
    def converged(self) -> bool:
        return self.terminal_status == TerminalStatus.converged

    @property
    def diverged(self) -> bool:
        return self.terminal_status == TerminalStatus.diverged

    def __len__(self) -> int:
        return len(self.records)

    def __repr__(self) -> str:
        return f"Trace({self.algorithm!r}, records={len(self.records)}, status={self.terminal_status})"
