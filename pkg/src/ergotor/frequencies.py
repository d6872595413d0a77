"""Generation and numerical validation of rationally independent frequencies.

Two classically independent families are shipped (square roots of squarefree
integers, logarithms of primes) plus an Explicit escape hatch.  Independence
is certified only by bounded brute force over integer combinations; relations
with larger coefficients or more frequencies than the scan covers are not
excluded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import BudgetError, InvalidInputError

__all__ = [
    "FrequencyFamily",
    "FrequencySequence",
    "IndependenceReport",
    "generate",
    "check_independence",
]

MAX_DIMENSION = 6
MAX_COEFF_BOUND = 20
MAX_ENUMERATION = 120_000_000
_CHUNK = 1 << 20


class FrequencyFamily(str, Enum):
    SQRT_SQUAREFREE = "sqrt_squarefree"
    LOG_PRIMES = "log_primes"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class FrequencySequence:
    """Strictly increasing positive frequencies with generating metadata."""

    values: tuple[float, ...]
    family: FrequencyFamily

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) < 1:
            raise InvalidInputError("at least one frequency is required")
        if not all(math.isfinite(v) for v in values):
            raise InvalidInputError("frequencies must be finite")
        if values[0] <= 0.0:
            raise InvalidInputError("frequencies must be strictly positive")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InvalidInputError("frequencies must be strictly increasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "family", FrequencyFamily(self.family))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class IndependenceReport:
    """Outcome of a bounded brute-force scan for integer relations."""

    min_combination: float
    witness: tuple[int, ...]
    bound: int
    tolerance: float
    passed: bool


def _is_squarefree(n: int) -> bool:
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


def _squarefree_integers(count: int) -> list[int]:
    out, n = [], 2
    while len(out) < count:
        if _is_squarefree(n):
            out.append(n)
        n += 1
    return out


def _primes(count: int) -> list[int]:
    out, n = [], 2
    while len(out) < count:
        if all(n % p for p in out if p * p <= n):
            out.append(n)
        n += 1
    return out


def generate(
    family: FrequencyFamily | str,
    d: int,
    values: Sequence[float] | None = None,
) -> FrequencySequence:
    """Build d frequencies from the named family.

    Explicit echoes ``values`` after validating positivity and strict
    monotonicity; the computed families are deterministic in (family, d).
    """
    family = FrequencyFamily(family)
    d = int(d)
    if d < 1:
        raise InvalidInputError("d must be at least 1")
    if family is FrequencyFamily.SQRT_SQUAREFREE:
        vals = tuple(math.sqrt(n) for n in _squarefree_integers(d))
    elif family is FrequencyFamily.LOG_PRIMES:
        vals = tuple(math.log(p) for p in _primes(d))
    else:
        if values is None:
            raise InvalidInputError("explicit family requires values")
        if len(values) != d:
            raise InvalidInputError(f"expected {d} values, got {len(values)}")
        vals = tuple(float(v) for v in values)
    return FrequencySequence(vals, family)


def check_independence(
    lam: FrequencySequence,
    coeff_bound: int,
    tolerance: float,
) -> IndependenceReport:
    """Scan all nonzero integer vectors c with |c_i| <= coeff_bound.

    Reports the minimum |<c, lambda>| and the achieving vector (sign fixed
    so its first nonzero entry is positive).  ``passed`` means the minimum
    exceeds ``tolerance``.  Integer combinations of exactly representable
    values (e.g. small integers) are evaluated exactly in double precision,
    so genuine rational dependences report 0.0.
    """
    coeff_bound = int(coeff_bound)
    if coeff_bound < 1:
        raise InvalidInputError("coeff_bound must be at least 1")
    if not (tolerance > 0.0):
        raise InvalidInputError("tolerance must be positive")
    d = len(lam)
    side = 2 * coeff_bound + 1
    total = side**d
    if d > MAX_DIMENSION or coeff_bound > MAX_COEFF_BOUND or total > MAX_ENUMERATION:
        suggestion = f"use d <= {MAX_DIMENSION} and coeff_bound <= {MAX_COEFF_BOUND}"
        if total > MAX_ENUMERATION and d <= MAX_DIMENSION:
            fit = int((MAX_ENUMERATION ** (1.0 / d) - 1) // 2)
            suggestion = f"coeff_bound <= {min(fit, MAX_COEFF_BOUND)} fits the budget at d = {d}"
        raise BudgetError(
            f"enumeration of {total} integer vectors exceeds the scan budget",
            suggestion,
        )

    values = lam.as_array()
    zero_linear = (total - 1) // 2  # linear index of the all-zero vector
    best = math.inf
    best_vec: np.ndarray | None = None
    shape = (side,) * d
    for start in range(0, total, _CHUNK):
        linear = np.arange(start, min(start + _CHUNK, total))
        coeffs = np.stack(np.unravel_index(linear, shape), axis=1) - coeff_bound
        combo = np.abs(coeffs @ values)
        inside = (linear == zero_linear)
        if inside.any():
            combo[inside] = math.inf
        k = int(np.argmin(combo))
        if combo[k] < best:
            best = float(combo[k])
            best_vec = coeffs[k].copy()

    assert best_vec is not None
    witness = best_vec
    first = witness[np.nonzero(witness)[0][0]]
    if first < 0:
        witness = -witness
    passed = best > tolerance
    return IndependenceReport(
        min_combination=best,
        witness=tuple(int(c) for c in witness),
        bound=coeff_bound,
        tolerance=float(tolerance),
        passed=passed,
    )
