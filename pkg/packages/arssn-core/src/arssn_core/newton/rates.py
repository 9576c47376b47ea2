"""
Momentum schedules and the rate predictions of accelerated approximate Newton on quadratics.

On a quadratic with E[H^-1] = (1 - pi) [Hessian]^-1 the error along each eigendirection follows the
companion matrix [[(1 + theta) pi, -theta pi], [1, 0]]; its dominant eigenvalue is the contraction rate.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
from arssn_models.solver import AnnealedMomentum, FixedMomentum, Theorem2Momentum

from ..errors import ArgumentError
from ..linalg import MatrixHandle, eigs_2x2, stable_rank

log = logging.getLogger(__name__)

# leading constant of the row norm sampling concentration bound
SAMPLE_SIZE_CONSTANT = 4.0


def _check_pi(pi: float) -> None:
    if not 0 < pi < 1:
        raise ArgumentError(f"pi must lie in (0, 1), got {pi}")


def optimal_theta(pi: float) -> float:
    """(1 - sqrt(1 - pi)) / (1 + sqrt(1 - pi))"""
    _check_pi(pi)
    root = math.sqrt(1.0 - pi)
    return (1.0 - root) / (1.0 + root)


def theta_star(pi: float, eps0: float = 0.0) -> float:
    """
    Accelerating momentum for an approximate Newton method with rate pi, backed off by eps0.

    A back-off larger than the optimal momentum is clamped to 0 with a warning.
    """
    if eps0 < 0:
        raise ArgumentError(f"eps0 must be nonnegative, got {eps0}")
    theta = optimal_theta(pi) - eps0
    if theta < 0:
        log.warning("eps0 = %s exceeds the optimal momentum for pi = %s; clamping theta to 0.", eps0, pi)
        return 0.0
    return theta


class RatePrediction(NamedTuple):
    q: float
    """
    Modulus of the dominant eigenvalue of the companion matrix.
    """
    c1: float
    """
    Condition number of its eigenvector matrix; infinite when defective.
    """
    defective: bool


def companion_matrix(pi: float, theta: float) -> np.ndarray:
    return np.array([[(1.0 + theta) * pi, -theta * pi], [1.0, 0.0]])


def rate_oracle(pi: float, theta: float) -> RatePrediction:
    """Predicted asymptotic contraction of accelerated approximate Newton with rate `pi` and momentum `theta`."""
    _check_pi(pi)
    if not 0 <= theta < 1:
        raise ArgumentError(f"theta must lie in [0, 1), got {theta}")
    eigs = eigs_2x2(companion_matrix(pi, theta))
    return RatePrediction(q=abs(eigs.roots[0]), c1=eigs.c1, defective=eigs.defective)


def pi_from_sampling(c: float, kappa: float) -> float:
    """
    Rate of regularized sub-sampled Newton with alpha = c ||B||^2: pi = 2 c kappa / (1 + 2 c kappa).

    Note 1 - sqrt(1 - pi) = 1 - 1 / sqrt(1 + 2 c kappa).
    """
    if not 0 < c < 1:
        raise ArgumentError(f"c must lie in (0, 1), got {c}")
    if kappa < 1:
        raise ArgumentError(f"kappa must be at least 1, got {kappa}")
    return 2.0 * c * kappa / (1.0 + 2.0 * c * kappa)


def sample_size_thm3(c: float, b: MatrixHandle) -> int:
    """
    Rows to sample from the Hessian factor B: ceil(4 c^-2 sr(B) log(2d)), capped at the number of rows.
    """
    if not 0 < c <= 1:
        raise ArgumentError(f"c must lie in (0, 1], got {c}")
    size = math.ceil(SAMPLE_SIZE_CONSTANT * stable_rank(b) * math.log(2 * b.ncols) / c**2)
    return min(size, b.nrows)


def theta_at(schedule: FixedMomentum | AnnealedMomentum | Theorem2Momentum, t: int) -> float:
    """Momentum used at outer iteration t >= 1."""
    match schedule:
        case FixedMomentum(theta=theta):
            return theta
        case AnnealedMomentum(k=k):
            return t / (t + k)
        case Theorem2Momentum(pi=pi, eps0=eps0):
            return theta_star(pi, eps0)
        case _:
            raise ArgumentError(f"unknown momentum schedule {schedule!r}")


def fit_contraction(
    values: Sequence[float] | np.ndarray,
    window: tuple[int, int] = (50, 200),
    floor: float = 1e-12,
) -> float:
    """
    Geometric contraction factor of a sequence by a log-linear least squares fit.

    Only entries inside `window` (inclusive iteration indices) that exceed floor * max(values) are used; when
    fewer than two of them remain, all entries above the floor are used instead.

    :raises ArgumentError: if fewer than two usable entries exist.
    """
    magnitudes = np.abs(np.asarray(values, dtype=np.float64))
    finite = np.isfinite(magnitudes)
    if not finite.any():
        raise ArgumentError("no finite values to fit")
    threshold = floor * magnitudes[finite].max()
    usable = finite & (magnitudes > threshold)

    index = np.arange(len(magnitudes))
    in_window = usable & (index >= window[0]) & (index <= window[1])
    selected = in_window if in_window.sum() >= 2 else usable
    if selected.sum() < 2:
        raise ArgumentError("need at least two values above the floor to fit a contraction")
    slope, _ = np.polyfit(index[selected], np.log(magnitudes[selected]), 1)
    return float(math.exp(slope))
