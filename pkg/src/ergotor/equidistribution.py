"""Occupation measure, restricted averages, and discrepancy for the torus flow.

The fraction of time the flow spends inside an axis-aligned region is
computed exactly by an event sweep: every boundary-crossing time of every
active coordinate is enumerated, the time axis splits into elementary
intervals on which membership is constant, and the member lengths are
summed.  This gives a machine-precision occupation oracle with no sampling
error; the same interval decomposition integrates trigonometric polynomials
over the occupied set in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._phase import gauss_panel_nodes, mean_phase_factor, segment_phase_integrals
from .errors import BudgetError, InvalidInputError, NoConvergenceError, ResonanceError
from .fourier_sparse import FourierSeries, MultiIndex
from .frequencies import FrequencySequence
from .torus_core import TorusPoint, flow_many

__all__ = [
    "JordanRegion",
    "OccupationResult",
    "DiscrepancyResult",
    "occupation_measure",
    "restricted_time_average",
    "region_integral",
    "weyl_sum",
    "discrepancy_estimate",
    "anchored_discrepancy",
    "OCCUPATION_COLUMNS",
]

DEFAULT_EVENT_BUDGET = 100_000_000
GRAZING_TOLERANCE = 1e-12

OCCUPATION_COLUMNS = ("T", "ratio", "volume", "abs_error", "event_count")


@dataclass(frozen=True)
class JordanRegion:
    """Axis-aligned box (or clipped max-metric ball) inside [0,1]^N."""

    kind: str
    intervals: tuple[tuple[float, float], ...]
    center: tuple[float, ...] | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in ("box", "ball_cylinder"):
            raise InvalidInputError(f"unknown region kind {self.kind!r}")
        intervals = tuple((float(a), float(b)) for a, b in self.intervals)
        if len(intervals) < 1:
            raise InvalidInputError("a region needs at least one coordinate")
        for a, b in intervals:
            if not (0.0 <= a <= b <= 1.0):
                raise InvalidInputError(f"interval [{a}, {b}] is not inside [0, 1]")
        object.__setattr__(self, "intervals", intervals)

    @classmethod
    def box(cls, intervals: Sequence[Sequence[float]]) -> "JordanRegion":
        return cls("box", tuple((a, b) for a, b in intervals))

    @classmethod
    def ball_cylinder(cls, center: Sequence[float], radius: float) -> "JordanRegion":
        """Max-metric ball around the first-N-coordinate center, clipped to the cube."""
        radius = float(radius)
        if radius <= 0.0:
            raise InvalidInputError("radius must be positive")
        center = tuple(float(c) for c in center)
        if any(not (0.0 <= c <= 1.0) for c in center):
            raise InvalidInputError("center coordinates must lie in [0, 1]")
        intervals = tuple(
            (max(0.0, c - radius), min(1.0, c + radius)) for c in center
        )
        return cls("ball_cylinder", intervals, center=center, radius=radius)

    @property
    def active_dim(self) -> int:
        return len(self.intervals)

    def volume(self) -> float:
        return float(np.prod([b - a for a, b in self.intervals]))


@dataclass(frozen=True)
class OccupationResult:
    """Exact time measure the flow spends inside a region over (0, T)."""

    measure: float
    ratio: float
    T: float
    volume: float
    event_count: int
    grazing_count: int


@dataclass(frozen=True)
class DiscrepancyResult:
    """Worst anchored-box deviation between occupation ratio and volume."""

    value: float
    worst_box: tuple[int, ...]
    worst_ratio: float
    worst_volume: float
    T: float
    grid_resolution: int
    event_count: int


def _crossing_times(u0: float, rate: float, level: float, T: float) -> np.ndarray:
    """All t in (0, T) with {u0 + t*rate} == level, for rate > 0."""
    lo = math.floor(u0 - level) + 1
    hi = math.ceil(u0 - level + rate * T) - 1
    if hi < lo:
        return np.empty(0)
    k = np.arange(lo, hi + 1, dtype=float)
    return (level - u0 + k) / rate


def _crossing_count(u0: float, rate: float, level: float, T: float) -> int:
    lo = math.floor(u0 - level) + 1
    hi = math.ceil(u0 - level + rate * T) - 1
    return max(0, hi - lo + 1)


def _check_sweep_inputs(u: TorusPoint, lam: FrequencySequence, region: JordanRegion, T: float):
    if not (T > 0.0):
        raise InvalidInputError("horizon T must be positive")
    if region.active_dim > len(lam):
        raise InvalidInputError("region dimension exceeds the frequency count")
    if region.active_dim > u.dim:
        raise InvalidInputError("region dimension exceeds the point dimension")
    if u.dim > len(lam):
        raise InvalidInputError("point dimension exceeds the frequency count")


def _sweep(
    u: TorusPoint,
    lam: FrequencySequence,
    region: JordanRegion,
    T: float,
    event_budget: int,
):
    """Member elementary intervals of the occupation set.

    Returns (starts, lengths, member_mask, event_count, grazing_count) with
    membership decided by the interval midpoint; midpoints within
    GRAZING_TOLERANCE of a face are counted as grazing.
    """
    _check_sweep_inputs(u, lam, region, T)
    values = lam.as_array()
    active = [
        (j, a, b)
        for j, (a, b) in enumerate(region.intervals)
        if not (a == 0.0 and b == 1.0)
    ]
    predicted = sum(
        _crossing_count(u.coords[j], values[j], level, T)
        for j, a, b in active
        for level in (a, b)
    )
    if predicted > event_budget:
        raise BudgetError(
            f"event sweep needs {predicted} crossings, budget is {event_budget}",
            "reduce T or the number of constrained coordinates",
        )
    events = [
        _crossing_times(u.coords[j], values[j], level, T)
        for j, a, b in active
        for level in (a, b)
    ]
    boundaries = np.sort(np.concatenate([np.array([0.0, T])] + events))
    starts = boundaries[:-1]
    lengths = np.diff(boundaries)
    mids = starts + lengths / 2.0

    n_active = region.active_dim
    coords = flow_many(TorusPoint(u.coords[:n_active]), mids, values[:n_active])
    member = np.ones(mids.size, dtype=bool)
    grazing = np.zeros(mids.size, dtype=bool)
    for j, (a, b) in enumerate(region.intervals):
        c = coords[:, j]
        member &= (c >= a) & (c <= b)
        grazing |= (np.abs(c - a) < GRAZING_TOLERANCE) | (np.abs(c - b) < GRAZING_TOLERANCE)
    event_count = int(sum(e.size for e in events))
    return starts, lengths, member, event_count, int(np.count_nonzero(grazing))


def occupation_measure(
    u: TorusPoint,
    lam: FrequencySequence,
    region: JordanRegion,
    T: float,
    event_budget: int = DEFAULT_EVENT_BUDGET,
) -> OccupationResult:
    """Lebesgue measure of {t in (0,T) : flow(u,t) in region}, by exact sweep."""
    starts, lengths, member, event_count, grazing = _sweep(u, lam, region, T, event_budget)
    measure = float(np.sum(lengths[member]))
    measure = min(max(measure, 0.0), T)
    return OccupationResult(
        measure=measure,
        ratio=measure / T,
        T=float(T),
        volume=region.volume(),
        event_count=event_count,
        grazing_count=grazing,
    )


def restricted_time_average(
    f: FourierSeries | Callable[[np.ndarray], np.ndarray],
    u: TorusPoint,
    lam: FrequencySequence,
    region: JordanRegion,
    T: float,
    tol: float = 1e-9,
    event_budget: int = DEFAULT_EVENT_BUDGET,
) -> complex:
    """(1/T) * integral of f along the flow, restricted to times inside the region.

    Fourier series integrate exactly term by term over each member interval;
    the ``tol`` only steers the quadrature fallback used for plain callables
    (which must accept (n, d) coordinate batches).
    """
    starts, lengths, member, _, _ = _sweep(u, lam, region, T, event_budget)
    starts, lengths = starts[member], lengths[member]

    if isinstance(f, FourierSeries):
        if f.max_support > u.dim:
            raise InvalidInputError("series support exceeds the point dimension")
        total = 0j
        for index, coeff in f.terms.items():
            rate = index.dot(lam)
            base = index.dot(u.coords)
            total += coeff * np.sum(segment_phase_integrals(starts, lengths, rate, base))
        return complex(total / T)

    def composite(panels_per_interval: int) -> complex:
        total = 0j
        for s, w in zip(starts, lengths):
            nodes, weights = gauss_panel_nodes(s, s + w, panels_per_interval)
            total += np.sum(weights * np.asarray(f(flow_many(u, nodes, lam))))
        return complex(total / T)

    panels = 1
    previous = composite(panels)
    for _ in range(20):
        panels *= 2
        current = composite(panels)
        if abs(current - previous) < tol:
            return current
        previous = current
    raise NoConvergenceError(
        f"restricted average did not converge to {tol}",
        last_estimates=(previous, current),
    )


def region_integral(f: FourierSeries, region: JordanRegion) -> complex:
    """Exact integral of f over region x [0,1]^infinity (closed form per term).

    Active coordinates integrate each harmonic over their interval; any term
    oscillating in a coordinate beyond the region integrates a full period
    and drops out.
    """
    n_active = region.active_dim
    total = 0j
    for index, coeff in f.terms.items():
        factor = coeff
        entries = index.as_dict()
        if any(c > n_active for c in entries):
            continue
        for j, (a, b) in enumerate(region.intervals, start=1):
            m = entries.get(j, 0)
            if m == 0:
                factor *= b - a
            else:
                factor *= (np.exp(2j * np.pi * m * b) - np.exp(2j * np.pi * m * a)) / (
                    2j * np.pi * m
                )
        total += factor
    return complex(total)


def weyl_sum(m: MultiIndex, u: TorusPoint, lam: FrequencySequence, T: float) -> complex:
    """Time average of the single character e^{2 pi i <m, .>} along the flow.

    Modulus at most min(1, 1/(pi T |<m, lambda>|)); decay for every nonzero
    index is the equidistribution criterion.
    """
    if not (T > 0.0):
        raise InvalidInputError("horizon T must be positive")
    if m.is_zero():
        return 1.0 + 0j
    if m.support() > u.dim:
        raise InvalidInputError("multi-index support exceeds the point dimension")
    rate = m.dot(lam)
    if rate == 0.0:
        raise ResonanceError(m)
    phase = np.exp(2j * np.pi * m.dot(u.coords))
    return complex(phase * mean_phase_factor(2.0 * np.pi * T * rate))


def anchored_discrepancy(
    u: TorusPoint,
    lam: FrequencySequence,
    active_dim: int,
    T: float,
    grid_resolution: int,
    event_budget: int = DEFAULT_EVENT_BUDGET,
) -> DiscrepancyResult:
    """Star-style discrepancy over the anchored boxes of a uniform grid.

    One sweep collects the crossing times of every grid level, giving the
    exact occupied time per grid cell; anchored-box ratios are then running
    sums of the cell table, and the result is the worst |ratio - volume|.
    """
    g = int(grid_resolution)
    n = int(active_dim)
    if g < 1:
        raise InvalidInputError("grid resolution must be at least 1")
    if n < 1 or n > len(lam) or n > u.dim:
        raise InvalidInputError("active dimension must fit the point and frequencies")
    if not (T > 0.0):
        raise InvalidInputError("horizon T must be positive")

    values = lam.as_array()
    levels = [i / g for i in range(g)]
    predicted = sum(
        _crossing_count(u.coords[j], values[j], level, T)
        for j in range(n)
        for level in levels
    )
    if predicted + g**n > event_budget:
        raise BudgetError(
            f"discrepancy sweep needs {predicted} events and {g ** n} cells",
            "reduce T, the grid resolution, or the active dimension",
        )

    events = [
        _crossing_times(u.coords[j], values[j], level, T)
        for j in range(n)
        for level in levels
    ]
    boundaries = np.sort(np.concatenate([np.array([0.0, T])] + events))
    lengths = np.diff(boundaries)
    mids = boundaries[:-1] + lengths / 2.0

    coords = flow_many(TorusPoint(u.coords[:n]), mids, values[:n])
    cells = np.minimum((coords * g).astype(int), g - 1)
    flat = np.ravel_multi_index(tuple(cells[:, j] for j in range(n)), (g,) * n)
    table = np.bincount(flat, weights=lengths, minlength=g**n).reshape((g,) * n)

    cumulative = table
    for axis in range(n):
        cumulative = np.cumsum(cumulative, axis=axis)
    ratios = cumulative / T
    edges = np.arange(1, g + 1) / g
    volumes = edges
    for _ in range(n - 1):
        volumes = np.multiply.outer(volumes, edges)
    deviation = np.abs(ratios - volumes)

    worst_flat = int(np.argmax(deviation))
    worst_idx = np.unravel_index(worst_flat, (g,) * n)
    worst_box = tuple(int(i) + 1 for i in worst_idx)
    return DiscrepancyResult(
        value=float(deviation.flat[worst_flat]),
        worst_box=worst_box,
        worst_ratio=float(ratios.flat[worst_flat]),
        worst_volume=float(volumes.flat[worst_flat]),
        T=float(T),
        grid_resolution=g,
        event_count=int(sum(e.size for e in events)),
    )


def discrepancy_estimate(
    u: TorusPoint,
    lam: FrequencySequence,
    active_dim: int,
    T: float,
    grid_resolution: int,
    event_budget: int = DEFAULT_EVENT_BUDGET,
) -> float:
    """Worst anchored-box |occupation ratio - volume| at the given grid."""
    return anchored_discrepancy(u, lam, active_dim, T, grid_resolution, event_budget).value
