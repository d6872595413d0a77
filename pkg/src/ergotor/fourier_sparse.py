"""Finitely supported Fourier series on the truncated torus.

A series is a sparse map from integer multi-indices to complex coefficients.
Rank-r partial sums keep the terms supported on the first r coordinates;
L2 tails and rank schedules are computed exactly from coefficients (the
characters are orthonormal under the product measure, so no quadrature is
ever needed for these).  Rule-generated series with infinite support are
admitted only through a declared-tail-bound interface, which keeps absolute
convergence queries decidable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import BudgetError, IndeterminateTailError, InvalidInputError
from .torus_core import FinitePermutation, TorusPoint

__all__ = [
    "MultiIndex",
    "FourierSeries",
    "RankSchedule",
    "CoefficientRule",
    "L1MassReport",
    "select_rank_schedule",
    "majorant_windows",
    "telescoping_majorant",
    "telescoping_majorant_many",
    "l1_mass",
    "permute_index",
    "permute_series",
]

COEFF_FLOOR = 1e-300  # moduli below this are dropped to avoid denormal noise


class MultiIndex:
    """Integer vector with finitely many nonzero entries (1-based coordinates)."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        cleaned = {}
        for coord, value in items:
            coord, value = int(coord), int(value)
            if coord < 1:
                raise InvalidInputError("coordinate indices are 1-based")
            if value != 0:
                cleaned[coord] = value
        self._entries = tuple(sorted(cleaned.items()))

    @classmethod
    def zero(cls) -> "MultiIndex":
        return cls()

    @classmethod
    def basis(cls, coord: int, value: int = 1) -> "MultiIndex":
        return cls({coord: value})

    @classmethod
    def from_dict(cls, entries: Mapping[int, int]) -> "MultiIndex":
        return cls(entries)

    @property
    def entries(self) -> tuple[tuple[int, int], ...]:
        return self._entries

    def support(self) -> int:
        """Largest coordinate with a nonzero entry; 0 for the zero index."""
        return self._entries[-1][0] if self._entries else 0

    def is_zero(self) -> bool:
        return not self._entries

    def as_dict(self) -> dict[int, int]:
        return dict(self._entries)

    def dot(self, values) -> float:
        """sum_j m_j * values[j-1] over the nonzero entries."""
        values = np.asarray(getattr(values, "values", values), dtype=float)
        if self.support() > values.size:
            raise InvalidInputError(
                f"multi-index reaches coordinate {self.support()}, "
                f"got only {values.size} values"
            )
        return float(sum(m * values[c - 1] for c, m in self._entries))

    def __neg__(self) -> "MultiIndex":
        return MultiIndex({c: -m for c, m in self._entries})

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiIndex) and self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        return f"MultiIndex({dict(self._entries)!r})"


class FourierSeries:
    """Immutable sparse trigonometric polynomial sum a(m) e^{2 pi i <m, theta>}."""

    __slots__ = ("_terms", "_max_support", "_packed")

    def __init__(
        self,
        terms: Mapping[MultiIndex, complex] | Iterable[tuple[MultiIndex, complex]] = (),
    ):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[MultiIndex, complex] = {}
        for index, coeff in items:
            if not isinstance(index, MultiIndex):
                raise InvalidInputError("series keys must be MultiIndex values")
            coeff = complex(coeff)
            if not (math.isfinite(coeff.real) and math.isfinite(coeff.imag)):
                raise InvalidInputError("coefficients must be finite")
            acc[index] = acc.get(index, 0j) + coeff
        self._terms = {i: c for i, c in acc.items() if abs(c) >= COEFF_FLOOR}
        self._max_support = max((i.support() for i in self._terms), default=0)
        self._packed: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    @property
    def terms(self) -> Mapping[MultiIndex, complex]:
        return MappingProxyType(self._terms)

    @property
    def max_support(self) -> int:
        return self._max_support

    def coefficient(self, index: MultiIndex) -> complex:
        return self._terms.get(index, 0j)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, FourierSeries) and self._terms == other._terms

    def __repr__(self) -> str:
        return f"FourierSeries({len(self._terms)} terms, max_support={self._max_support})"

    def _pack(self, dim: int) -> tuple[np.ndarray, np.ndarray]:
        packed = self._packed.get(dim)
        if packed is None:
            matrix = np.zeros((len(self._terms), dim))
            coeffs = np.empty(len(self._terms), dtype=complex)
            for row, (index, coeff) in enumerate(sorted(
                self._terms.items(), key=lambda kv: kv[0].entries
            )):
                for coord, m in index.entries:
                    matrix[row, coord - 1] = m
                coeffs[row] = coeff
            packed = self._packed[dim] = (matrix, coeffs)
        return packed

    def evaluate(self, theta: TorusPoint) -> complex:
        """Value sum a(m) e^{2 pi i <m, theta>} at one torus point."""
        if theta.dim < self._max_support:
            raise InvalidInputError(
                f"series reaches coordinate {self._max_support}, point has {theta.dim}"
            )
        return complex(self.evaluate_many(theta.coords[None, :])[0])

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an (n, d) array of torus coordinates."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2:
            raise InvalidInputError("points must be a 2-d array")
        if points.shape[1] < self._max_support:
            raise InvalidInputError(
                f"series reaches coordinate {self._max_support}, "
                f"points have {points.shape[1]}"
            )
        if not self._terms:
            return np.zeros(points.shape[0], dtype=complex)
        matrix, coeffs = self._pack(points.shape[1])
        return np.exp(2j * np.pi * (points @ matrix.T)) @ coeffs

    def partial_sum(self, r: int) -> "FourierSeries":
        """Restriction to multi-indices supported on the first r coordinates."""
        r = int(r)
        if r < 1:
            raise InvalidInputError("rank must be at least 1")
        if r >= self._max_support:
            return self
        return FourierSeries({i: c for i, c in self._terms.items() if i.support() <= r})

    def l2_tail(self, r: int) -> float:
        """sum |a(m)|^2 over multi-indices not supported on the first r coordinates.

        Rank 0 leaves only the constant term in the head, so the tail is the
        squared norm of the non-constant part.
        """
        r = int(r)
        if r < 0:
            raise InvalidInputError("rank must be nonnegative")
        return float(sum(abs(c) ** 2 for i, c in self._terms.items() if i.support() > r))

    def l2_norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self._terms.values()))

    def space_average(self) -> complex:
        """Integral against the product measure: the zero-index coefficient."""
        return self._terms.get(MultiIndex.zero(), 0j)

    def to_json_dict(self) -> dict:
        terms = []
        for index, coeff in sorted(self._terms.items(), key=lambda kv: kv[0].entries):
            terms.append(
                {
                    "index": {str(c): m for c, m in index.entries},
                    "re": coeff.real,
                    "im": coeff.imag,
                }
            )
        return {"terms": terms}

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "FourierSeries":
        if not isinstance(doc, Mapping) or "terms" not in doc:
            raise InvalidInputError("series document must contain a 'terms' list")
        pairs = []
        for entry in doc["terms"]:
            index = MultiIndex({int(k): int(v) for k, v in entry["index"].items()})
            pairs.append((index, complex(float(entry["re"]), float(entry.get("im", 0.0)))))
        return cls(pairs)


@dataclass(frozen=True)
class RankSchedule:
    """Strictly increasing truncation ranks with verified L2 step sizes.

    ``tail_bounds[k-2]`` is the exact squared L2 norm of the difference
    between the rank-k and rank-(k-1) partial sums; each must sit under
    2^(-2k) for its position.
    """

    ranks: tuple[int, ...]
    tail_bounds: tuple[float, ...]

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        bounds = tuple(float(b) for b in self.tail_bounds)
        if len(ranks) < 1 or ranks[0] < 1:
            raise InvalidInputError("schedule needs at least one positive rank")
        if any(b <= a for a, b in zip(ranks, ranks[1:])):
            raise InvalidInputError("ranks must be strictly increasing")
        if len(bounds) != len(ranks) - 1:
            raise InvalidInputError("one tail bound is required per rank step")
        for k, bound in enumerate(bounds, start=2):
            if bound > 2.0 ** (-2 * k):
                raise InvalidInputError(
                    f"step {k} has L2 difference {bound} above 2^(-{2 * k})"
                )
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "tail_bounds", bounds)

    def __len__(self) -> int:
        return len(self.ranks)


def _column_masses(f: FourierSeries) -> np.ndarray:
    """Squared-coefficient mass per maximal support coordinate, 1-based."""
    masses = np.zeros(f.max_support + 1)
    for index, coeff in f.terms.items():
        masses[index.support()] += abs(coeff) ** 2
    return masses  # entry 0 (the constant) never enters a rank difference


def select_rank_schedule(f: FourierSeries, count: int) -> RankSchedule:
    """Smallest (lexicographically) ranks whose successive L2 differences
    fall under the 4^-k ladder.

    Each step's squared difference is a plain coefficient sum over the
    coordinates the step opens up, so the returned tail_bounds are exact.
    Once the ranks pass the series support the differences are exactly zero
    and the schedule keeps incrementing by one.
    """
    count = int(count)
    if count < 2:
        raise InvalidInputError("a schedule needs at least two ranks")
    masses = _column_masses(f)
    top = f.max_support
    prefix = np.concatenate([[0.0], np.cumsum(masses[1:])]) if top else np.zeros(1)
    total = prefix[-1] if top else 0.0

    def window(p: int, r: int) -> float:
        # mass of terms whose maximal coordinate lies in (p, r]
        hi = prefix[min(r, top)] if top else 0.0
        lo = prefix[min(p, top)] if top else 0.0
        return float(hi - lo)

    def rest_feasible(k: int, prev: int) -> bool:
        # extend each remaining window as far as its bound allows; maximal
        # windows dominate, so failure here means genuine infeasibility
        for kk in range(k, count + 1):
            limit = 2.0 ** (-2 * kk)
            if total - (prefix[min(prev, top)] if top else 0.0) <= limit:
                return True  # everything left fits in one window
            r = prev + 1
            if window(prev, r) > limit:
                return False
            while r < top and window(prev, r + 1) <= limit:
                r += 1
            prev = r
        return True

    ranks: list[int] = []
    prev = 0
    for k in range(1, count + 1):
        limit = math.inf if k == 1 else 2.0 ** (-2 * k)
        r = prev + 1
        while window(prev, r) > limit or not rest_feasible(k + 1, r):
            r += 1
            if r > top + count:  # cannot happen for finite support; guard anyway
                raise InvalidInputError("no admissible rank schedule found")
        ranks.append(r)
        prev = r
    bounds = tuple(window(a, b) for a, b in zip(ranks, ranks[1:]))
    return RankSchedule(tuple(ranks), bounds)


def majorant_windows(f: FourierSeries, schedule: RankSchedule) -> list[FourierSeries]:
    """The first partial sum and the successive rank differences.

    The telescoping majorant is the sum of the absolute values of these
    windows; each term of f lands in exactly one window (or none, beyond
    the last rank).
    """
    windows = [f.partial_sum(schedule.ranks[0])]
    for prev, rank in zip(schedule.ranks, schedule.ranks[1:]):
        windows.append(
            FourierSeries(
                {i: c for i, c in f.terms.items() if prev < i.support() <= rank}
            )
        )
    return windows


def telescoping_majorant_many(
    f: FourierSeries, schedule: RankSchedule, points: np.ndarray
) -> np.ndarray:
    """Vectorized |f_{r_1}| + sum_k |f_{r_k} - f_{r_{k-1}}| over (n, d) points."""
    windows = majorant_windows(f, schedule)
    points = np.asarray(points, dtype=float)
    out = np.zeros(points.shape[0])
    for w in windows:
        out += np.abs(w.evaluate_many(points))
    return out


def telescoping_majorant(f: FourierSeries, schedule: RankSchedule, theta: TorusPoint) -> float:
    """Pointwise dominating function for every scheduled partial sum."""
    if theta.dim < max(f.partial_sum(schedule.ranks[-1]).max_support, 1):
        raise InvalidInputError("point dimension does not cover the schedule support")
    return float(telescoping_majorant_many(f, schedule, theta.coords[None, :])[0])


@dataclass(frozen=True)
class CoefficientRule:
    """Lazily generated coefficients with certified tail declarations.

    ``coefficient`` maps a MultiIndex to its value.  ``box_l1_tail(rank,
    radius)`` must return a certified upper bound on the l1 mass of
    coefficients supported on the first ``rank`` coordinates but outside the
    max-norm box of the given radius; ``l1_diverges(rank)`` certifies that
    the rank-restricted l1 mass is infinite.  Rules without either
    declaration cannot answer absolute-convergence queries.
    """

    coefficient: Callable[[MultiIndex], complex]
    box_l1_tail: Callable[[int, int], float] | None = None
    l1_diverges: Callable[[int], bool] | None = None


@dataclass(frozen=True)
class L1MassReport:
    """Rank-restricted absolute coefficient mass and its convergence verdict."""

    rank: int
    mass: float
    converges: bool
    partial: float
    tail_bound: float
    box_radius: int


_BOX_BUDGET = 2_000_000


def _box_l1_sum(rule: CoefficientRule, rank: int, radius: int) -> float:
    if (2 * radius + 1) ** rank > _BOX_BUDGET:
        raise BudgetError(
            f"box enumeration at rank {rank}, radius {radius} is too large",
            "declare a faster-shrinking tail bound or reduce the rank",
        )
    total = 0.0
    for combo in itertools.product(range(-radius, radius + 1), repeat=rank):
        index = MultiIndex({c + 1: m for c, m in enumerate(combo)})
        total += abs(complex(rule.coefficient(index)))
    return total


def l1_mass(
    series: FourierSeries | CoefficientRule,
    rank: int,
    abs_tol: float = 1e-12,
) -> L1MassReport:
    """Absolute coefficient mass over the first ``rank`` coordinates.

    Finitely supported series always converge and report their plain sum.
    Rule-generated series are summed over doubling boxes until the declared
    tail bound certifies the total; a declared divergence short-circuits to
    a non-member verdict, and a rule with no declaration raises.
    """
    rank = int(rank)
    if rank < 1:
        raise InvalidInputError("rank must be at least 1")
    if isinstance(series, FourierSeries):
        partial = sum(abs(c) for i, c in series.terms.items() if i.support() <= rank)
        return L1MassReport(rank, float(partial), True, float(partial), 0.0, 0)

    rule = series
    if rule.l1_diverges is not None and rule.l1_diverges(rank):
        return L1MassReport(rank, math.inf, False, math.nan, math.inf, 0)
    if rule.box_l1_tail is None:
        raise IndeterminateTailError(
            "rule-generated series declared no l1 tail bound; "
            "convergence cannot be decided"
        )
    radius = 1
    for _ in range(40):
        bound = float(rule.box_l1_tail(rank, radius))
        if math.isfinite(bound) and bound <= abs_tol:
            partial = _box_l1_sum(rule, rank, radius)
            return L1MassReport(rank, partial + bound, True, partial, bound, radius)
        radius *= 2
    raise IndeterminateTailError(
        f"declared tail bound did not certify convergence by radius {radius}"
    )


def permute_index(sigma: FinitePermutation, index: MultiIndex) -> MultiIndex:
    """Coordinate shuffle on a multi-index: entry i of the result is m_{sigma(i)}."""
    entries = index.as_dict()
    out: dict[int, int] = {}
    for i in range(1, sigma.support_bound + 1):
        v = entries.get(sigma(i), 0)
        if v:
            out[i] = v
    for coord, v in entries.items():
        if coord > sigma.support_bound:
            out[coord] = v
    return MultiIndex(out)


def permute_series(sigma: FinitePermutation, f: FourierSeries) -> FourierSeries:
    """Apply a finite permutation to every term's support simultaneously."""
    return FourierSeries({permute_index(sigma, i): c for i, c in f.terms.items()})
