"""Points of the truncated torus, the linear semiflow, and finite permutations.

Infinite torus points are represented by their first ``d`` coordinates;
coordinates beyond the truncation are treated as zero.  All types are
immutable values and all operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "TorusPoint",
    "FinitePermutation",
    "wrap_fractional",
    "flow",
    "flow_many",
    "tychonoff_distance",
    "apply_permutation",
]


def _frac(x: np.ndarray) -> np.ndarray:
    # x - floor(x) can round up to exactly 1.0 for x just below an integer;
    # fold that back to 0.0 so results stay in [0, 1).
    r = x - np.floor(x)
    return np.where(r >= 1.0, 0.0, r)


def frequency_values(lam) -> np.ndarray:
    """Coerce a FrequencySequence (or any float sequence) to an array."""
    values = getattr(lam, "values", lam)
    return np.asarray(values, dtype=float)


@dataclass(frozen=True, eq=False)
class TorusPoint:
    """A point of [0,1)^d standing in for a truncated torus point."""

    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float, copy=True).reshape(-1)
        if coords.size < 1:
            raise InvalidInputError("a torus point needs at least one coordinate")
        if not np.all(np.isfinite(coords)):
            raise InvalidInputError("torus coordinates must be finite")
        if np.any(coords < 0.0) or np.any(coords >= 1.0):
            raise InvalidInputError("torus coordinates must lie in [0, 1)")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def zero(cls, dim: int) -> "TorusPoint":
        return cls(np.zeros(int(dim)))

    @property
    def dim(self) -> int:
        return self.coords.size

    def as_array(self) -> np.ndarray:
        return self.coords

    def __eq__(self, other) -> bool:
        if not isinstance(other, TorusPoint):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(
            np.all(self.coords == other.coords)
        )

    def __repr__(self) -> str:
        return f"TorusPoint({self.coords.tolist()!r})"


def wrap_fractional(x) -> TorusPoint:
    """Componentwise fractional part {x}, always in [0, 1)."""
    arr = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("wrap_fractional requires finite coordinates")
    return TorusPoint(_frac(arr))


def flow(u: TorusPoint, t: float, lam) -> TorusPoint:
    """Advance u along the semiflow: coordinate i becomes {u_i + t*lambda_i}."""
    values = frequency_values(lam)
    if u.dim > values.size:
        raise InvalidInputError(
            f"point dimension {u.dim} exceeds frequency count {values.size}"
        )
    if not np.isfinite(t):
        raise InvalidInputError("flow time must be finite")
    return TorusPoint(_frac(u.coords + float(t) * values[: u.dim]))


def flow_many(u: TorusPoint, times, lam) -> np.ndarray:
    """Flow coordinates for a whole batch of times.

    Returns an (n, d) array; row k is flow(u, times[k], lam) without the
    TorusPoint wrapper.  This is the hot path used by quadrature and the
    event sweep.
    """
    values = frequency_values(lam)
    if u.dim > values.size:
        raise InvalidInputError(
            f"point dimension {u.dim} exceeds frequency count {values.size}"
        )
    t = np.asarray(times, dtype=float).reshape(-1)
    return _frac(u.coords[None, :] + t[:, None] * values[None, : u.dim])


def tychonoff_distance(a: TorusPoint, b: TorusPoint) -> float:
    """Exponentially weighted coordinate metric sum(e^(1-n) |a_n - b_n|).

    Induces the product topology on the full torus; the discarded tail of a
    d-coordinate truncation contributes at most e^(1-d).
    """
    if a.dim != b.dim:
        raise InvalidInputError("points must share a dimension")
    n = np.arange(1, a.dim + 1)
    return float(np.sum(np.exp(1.0 - n) * np.abs(a.coords - b.coords)))


@dataclass(frozen=True)
class FinitePermutation:
    """A bijection of {1,..,n}; indices beyond n are fixed.

    ``images[i-1]`` is the 1-based image of i.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(v) for v in self.images)
        n = len(images)
        if n < 1:
            raise InvalidInputError("permutation needs at least one index")
        if sorted(images) != list(range(1, n + 1)):
            raise InvalidInputError("images must be a bijection of {1,..,n}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> "FinitePermutation":
        return cls(tuple(range(1, int(n) + 1)))

    @classmethod
    def transposition(cls, i: int, j: int, n: int | None = None) -> "FinitePermutation":
        n = max(i, j) if n is None else n
        images = list(range(1, n + 1))
        images[i - 1], images[j - 1] = images[j - 1], images[i - 1]
        return cls(tuple(images))

    @property
    def support_bound(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        """Image of the 1-based index i (identity beyond the support bound)."""
        return self.images[i - 1] if 1 <= i <= len(self.images) else i

    def inverse(self) -> "FinitePermutation":
        inv = [0] * len(self.images)
        for i, v in enumerate(self.images, start=1):
            inv[v - 1] = i
        return FinitePermutation(tuple(inv))


def apply_permutation(sigma: FinitePermutation, theta: TorusPoint) -> TorusPoint:
    """Shuffle coordinates: result coordinate i is theta_{sigma(i)}."""
    if sigma.support_bound > theta.dim:
        raise InvalidInputError(
            f"permutation support {sigma.support_bound} exceeds dimension {theta.dim}"
        )
    idx = np.arange(theta.dim)
    idx[: sigma.support_bound] = np.asarray(sigma.images) - 1
    return TorusPoint(theta.coords[idx])
