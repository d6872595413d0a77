"""Seeded Monte Carlo integration over the truncated product measure.

Sampling uses PCG64 in fixed-size chunks with per-chunk derived seeds
(base seed + chunk index), so estimates are bit-reproducible and a parallel
split over chunks cannot change the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInputError
from .fourier_sparse import FourierSeries, RankSchedule, majorant_windows

__all__ = [
    "MCEstimate",
    "mc_space_integral",
    "mc_measure_superlevel",
    "chebyshev_bound",
    "RNG_ID",
    "CHUNK_SIZE",
]

RNG_ID = "numpy-pcg64"
CHUNK_SIZE = 65536
# Superlevel membership tolerates this much rounding slack, so unit-modulus
# characters sitting exactly on the threshold count as inside.  Inflating
# the estimate is the safe direction for every bound checked here.
BOUNDARY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error and full sampling provenance."""

    mean: complex
    std_error: float
    n: int
    seed: int
    d: int
    rng: str = RNG_ID

    def to_json_dict(self) -> dict:
        return {
            "mean_re": self.mean.real,
            "mean_im": self.mean.imag,
            "std_error": self.std_error,
            "n": self.n,
            "seed": self.seed,
            "d": self.d,
            "rng": self.rng,
        }


def _sample_chunks(seed: int, n: int, d: int):
    for chunk_index, start in enumerate(range(0, n, CHUNK_SIZE)):
        size = min(CHUNK_SIZE, n - start)
        rng = np.random.Generator(np.random.PCG64(seed + chunk_index))
        yield rng.random((size, d))


def _estimate(h: Callable[[np.ndarray], np.ndarray], d: int, n: int, seed: int) -> MCEstimate:
    total = 0j
    total_sq = 0.0
    for points in _sample_chunks(seed, n, d):
        values = np.asarray(h(points))
        total += complex(np.sum(values))
        total_sq += float(np.sum(np.abs(values) ** 2))
    mean = total / n
    variance = max(0.0, (total_sq - n * abs(mean) ** 2) / (n - 1))
    return MCEstimate(
        mean=mean,
        std_error=math.sqrt(variance / n),
        n=n,
        seed=int(seed),
        d=int(d),
    )


def mc_space_integral(
    h: Callable[[np.ndarray], np.ndarray], d: int, n: int, seed: int
) -> MCEstimate:
    """Plain Monte Carlo mean of h over uniform samples from [0,1)^d.

    ``h`` must accept an (n, d) coordinate batch and return an (n,) array;
    ``series.evaluate_many`` fits directly.
    """
    d, n = int(d), int(n)
    if d < 1:
        raise InvalidInputError("sampling dimension must be at least 1")
    if n < 2:
        raise InvalidInputError("at least two samples are required")
    return _estimate(h, d, n, seed)


def mc_measure_superlevel(
    f: FourierSeries,
    schedule: RankSchedule,
    threshold: float,
    d: int,
    n: int,
    seed: int,
) -> MCEstimate:
    """Estimated product-measure of {theta : telescoping majorant >= threshold}."""
    if not (threshold >= 0.0):
        raise InvalidInputError("threshold must be nonnegative")
    windows = majorant_windows(f, schedule)
    needed = max((w.max_support for w in windows), default=0)
    if int(d) < needed:
        raise InvalidInputError(
            f"sampling dimension {d} does not cover the schedule support {needed}"
        )

    def indicator(points: np.ndarray) -> np.ndarray:
        g = np.zeros(points.shape[0])
        for w in windows:
            g += np.abs(w.evaluate_many(points))
        return (g >= threshold - BOUNDARY_TOLERANCE).astype(float)

    return _estimate(indicator, int(d), int(n), seed)


def chebyshev_bound(f: FourierSeries, schedule: RankSchedule, threshold: float) -> float:
    """Upper bound B / c^2 on the measure of the majorant's superlevel set.

    B is the squared triangle-inequality bound on the majorant's L2 norm:
    (||f_{r_1}||_2 + sum_k ||f_{r_k} - f_{r_{k-1}}||_2)^2, every norm an
    exact coefficient sum.
    """
    if not (threshold > 0.0):
        raise InvalidInputError("threshold must be positive")
    norm_sum = sum(w.l2_norm() for w in majorant_windows(f, schedule))
    return (norm_sum**2) / threshold**2
