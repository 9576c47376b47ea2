"""
Reading and writing the libsvm sparse text format: `label idx:val idx:val ...` with 1-based,
strictly increasing feature indices.
"""

import logging
import math
from os import PathLike
from typing import TextIO

import numpy as np
import scipy.sparse
from arssn_core.linalg import MatrixHandle, Vector, as_vector
from arssn_models.trace import format_float

log = logging.getLogger(__name__)


class LibsvmParseError(ValueError):
    """Exception for malformed libsvm input; carries the offending 1-based line number (0 for the file as a whole)."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}" if line_number else message)
        self.line_number = line_number


def _parse_feature(token: str, line_number: int) -> tuple[int, float]:
    index_text, sep, value_text = token.partition(":")
    if not sep:
        raise LibsvmParseError(line_number, f"expected 'index:value', got {token!r}")
    try:
        index = int(index_text)
        value = float(value_text)
    except ValueError:
        raise LibsvmParseError(line_number, f"expected 'index:value', got {token!r}") from None
    if index < 1:
        raise LibsvmParseError(line_number, f"feature indices are 1-based, got {index}")
    if not math.isfinite(value):
        raise LibsvmParseError(line_number, f"non-finite value in {token!r}")
    return index, value


def _map_labels(labels: np.ndarray) -> np.ndarray:
    distinct = set(np.unique(labels).tolist())
    if distinct <= {-1.0, 1.0}:
        return labels
    if distinct <= {0.0, 1.0}:
        return np.where(labels == 0.0, -1.0, 1.0)
    raise LibsvmParseError(0, f"cannot map labels {sorted(distinct)} to -1/+1; expected {{0, 1}} or {{-1, +1}}")


def read_libsvm(
    stream: TextIO,
    n_features: int | None = None,
    binary: bool = True,
) -> tuple[MatrixHandle, Vector]:
    """
    Parse libsvm text into a CSR design matrix and a target vector.

    Blank lines are skipped and `#` starts a comment.

    :param n_features: Number of columns; defaults to the largest index seen.
    :param binary: Map labels {0, 1} or {-1, +1} to -1/+1; keep real targets otherwise.
    :raises LibsvmParseError: on the first malformed line, or for an unmappable label set.
    """
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    labels: list[float] = []

    for line_number, line in enumerate(stream, start=1):
        content = line.partition("#")[0].split()
        if not content:
            continue
        try:
            label = float(content[0])
        except ValueError:
            raise LibsvmParseError(line_number, f"invalid label {content[0]!r}") from None
        if not math.isfinite(label):
            raise LibsvmParseError(line_number, f"non-finite label {content[0]!r}")

        previous = 0
        for token in content[1:]:
            index, value = _parse_feature(token, line_number)
            if index <= previous:
                raise LibsvmParseError(line_number, f"feature index {index} does not increase (after {previous})")
            previous = index
            indices.append(index - 1)
            data.append(value)
        labels.append(label)
        indptr.append(len(indices))

    if not labels:
        raise LibsvmParseError(0, "no data rows")

    max_index = max(indices, default=-1) + 1
    d = max_index if n_features is None else n_features
    if max_index > d:
        raise LibsvmParseError(0, f"feature index {max_index} exceeds n_features = {d}")
    if d < 1:
        raise LibsvmParseError(0, "no features")

    targets = np.asarray(labels)
    if binary:
        targets = _map_labels(targets)
    a = MatrixHandle.from_csr_arrays(indptr, indices, data, shape=(len(labels), d))
    log.debug("Parsed libsvm data with n = %s, d = %s and %s nonzeros.", a.nrows, a.ncols, len(data))
    return a, as_vector(targets, "labels")


def parse_libsvm(
    path: str | PathLike,
    n_features: int | None = None,
    binary: bool = True,
) -> tuple[MatrixHandle, Vector]:
    """Read a libsvm file; see `read_libsvm`."""
    log.info("Reading libsvm data from %s", path)
    with open(path, encoding="utf-8") as f:
        return read_libsvm(f, n_features=n_features, binary=binary)


def write_libsvm(a: MatrixHandle, b: Vector, stream: TextIO) -> None:
    """Write the stored entries of A row by row, values with 17 significant digits."""
    if len(b) != a.nrows:
        raise ValueError(f"got {len(b)} targets for {a.nrows} rows")
    csr = scipy.sparse.csr_array(a.to_scipy())
    csr.sort_indices()
    for i in range(a.nrows):
        start, stop = csr.indptr[i], csr.indptr[i + 1]
        features = (
            f"{index + 1}:{format_float(float(value))}"
            for index, value in zip(csr.indices[start:stop], csr.data[start:stop], strict=True)
        )
        stream.write(" ".join([format_float(float(b[i])), *features]) + "\n")
