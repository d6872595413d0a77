"""Time averages of observables along the linear torus flow.

Trigonometric polynomials admit an exact closed form: each character
integrates to a phase-average factor, so the whole average is a finite sum.
General callables fall back to oscillation-aware panel quadrature.  The
closed form is the oracle; quadrature is always tested against it, never
the reverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._phase import gauss_panel_nodes, mean_phase_factor
from .errors import BudgetError, InvalidInputError, NoConvergenceError, ResonanceError
from .fourier_sparse import FourierSeries, MultiIndex
from .frequencies import FrequencySequence
from .torus_core import TorusPoint, flow_many

__all__ = [
    "AverageReport",
    "QuadratureEstimate",
    "time_average_analytic",
    "time_average_quadrature",
    "ergodic_error_bound",
    "oscillation_rate",
    "convergence_sweep",
    "reports_to_rows",
    "REPORT_COLUMNS",
]

MAX_REFINEMENTS = 20
_NODE_BUDGET = 40_000_000


def _term_rates(f: FourierSeries, lam: FrequencySequence) -> list[tuple[MultiIndex, complex, float]]:
    """(index, coefficient, <m, lambda>) per non-constant term; rejects resonance."""
    out = []
    for index, coeff in f.terms.items():
        if index.is_zero():
            continue
        rate = index.dot(lam)
        if rate == 0.0:
            raise ResonanceError(index)
        out.append((index, coeff, rate))
    return out


def time_average_analytic(
    f: FourierSeries, u: TorusPoint, lam: FrequencySequence, T: float
) -> complex:
    """(1/T) * integral over [0, T] of f along the flow started at u, exactly.

    Each character contributes its coefficient times a unimodular phase at u
    times the mean-phase factor of its total phase sweep 2 pi T <m, lambda>.
    """
    if not (T > 0.0):
        raise InvalidInputError("horizon T must be positive")
    if f.max_support > u.dim:
        raise InvalidInputError("series support exceeds the point dimension")
    total = f.space_average()
    for index, coeff, rate in _term_rates(f, lam):
        phase = np.exp(2j * np.pi * index.dot(u.coords))
        total += coeff * phase * mean_phase_factor(2.0 * np.pi * T * rate)
    return complex(total)


def oscillation_rate(f: FourierSeries, lam: FrequencySequence) -> float:
    """Fastest rotation rate max |<m, lambda>| over the support of f."""
    rates = [abs(index.dot(lam)) for index in f.terms if not index.is_zero()]
    return max(rates, default=0.0)


@dataclass(frozen=True)
class QuadratureEstimate:
    """Converged composite-panel estimate with its final refinement delta."""

    value: complex
    delta: float
    panels: int
    refinements: int


def time_average_quadrature(
    h: Callable[[np.ndarray], np.ndarray],
    u: TorusPoint,
    lam: FrequencySequence,
    T: float,
    tol: float,
    nu_max: float,
) -> QuadratureEstimate:
    """Panel quadrature of (1/T) * integral of h along the flow.

    ``h`` maps an (n, d) array of torus coordinates to an (n,) array (use
    ``series.evaluate_many`` for Fourier series).  ``nu_max`` must bound the
    oscillation rate of t -> h(flow(u, t)); panels no wider than a quarter
    of the fastest oscillation keep every harmonic well resolved, and the
    panel count is then doubled until two successive composite estimates
    agree within ``tol``.
    """
    if not (T > 0.0):
        raise InvalidInputError("horizon T must be positive")
    if not (tol > 0.0):
        raise InvalidInputError("tolerance must be positive")
    if nu_max < 0.0:
        raise InvalidInputError("oscillation bound must be nonnegative")

    width = T if nu_max == 0.0 else min(T, 1.0 / (4.0 * nu_max))
    panels = int(math.ceil(T / width))

    def composite(n_panels: int) -> complex:
        if n_panels * 8 > _NODE_BUDGET:
            raise BudgetError(
                f"composite rule with {n_panels} panels exceeds the node budget",
                "loosen tol or reduce T * nu_max",
            )
        nodes, weights = gauss_panel_nodes(0.0, T, n_panels)
        values = np.asarray(h(flow_many(u, nodes, lam)))
        return complex(np.sum(weights * values) / T)

    previous = composite(panels)
    for refinement in range(1, MAX_REFINEMENTS + 1):
        panels *= 2
        current = composite(panels)
        delta = abs(current - previous)
        if delta < tol:
            return QuadratureEstimate(current, delta, panels, refinement)
        previous = current
    raise NoConvergenceError(
        f"no convergence to {tol} within {MAX_REFINEMENTS} halvings",
        last_estimates=(previous, current),
    )


def ergodic_error_bound(f: FourierSeries, lam: FrequencySequence, T: float) -> float:
    """Uniform-in-u bound sum |a(m)| / (pi T |<m, lambda>|) on the average error.

    Follows from |e^{ix} - 1| <= 2 applied to each character's phase-average
    factor, so it holds for every starting point.
    """
    if not (T > 0.0):
        raise InvalidInputError("horizon T must be positive")
    return float(
        sum(abs(c) / (math.pi * T * abs(rate)) for _, c, rate in _term_rates(f, lam))
    )


@dataclass(frozen=True)
class AverageReport:
    """Convergence record of the time average toward the space average."""

    u: TorusPoint
    u_id: int
    T_grid: tuple[float, ...]
    values: tuple[complex, ...]
    space_avg: complex
    errors: tuple[float, ...]
    bounds: tuple[float, ...]
    provenance: str = ""

    def to_json_dict(self) -> dict:
        return {
            "u_id": self.u_id,
            "u": list(self.u.coords),
            "space_avg": {"re": self.space_avg.real, "im": self.space_avg.imag},
            "T_grid": list(self.T_grid),
            "values": [{"re": v.real, "im": v.imag} for v in self.values],
            "errors": list(self.errors),
            "bounds": list(self.bounds),
            "provenance": self.provenance,
        }


REPORT_COLUMNS = ("u_id", "T", "re_value", "im_value", "error", "bound")


def convergence_sweep(
    f: FourierSeries,
    u_set: Sequence[TorusPoint],
    lam: FrequencySequence,
    T_grid: Sequence[float],
    provenance: str = "",
) -> list[AverageReport]:
    """Exact time averages for every starting point over an increasing T grid."""
    grid = tuple(float(T) for T in T_grid)
    if any(b <= a for a, b in zip(grid, grid[1:])) or (grid and grid[0] <= 0.0):
        raise InvalidInputError("T_grid must be positive and strictly increasing")
    space_avg = f.space_average()
    bounds = tuple(ergodic_error_bound(f, lam, T) for T in grid)
    reports = []
    for u_id, u in enumerate(u_set):
        values = tuple(time_average_analytic(f, u, lam, T) for T in grid)
        errors = tuple(abs(v - space_avg) for v in values)
        reports.append(
            AverageReport(u, u_id, grid, values, space_avg, errors, bounds, provenance)
        )
    return reports


def reports_to_rows(reports: Sequence[AverageReport]) -> list[list]:
    """Flatten sweep reports into CSV-ready rows (see REPORT_COLUMNS)."""
    rows = []
    for report in reports:
        for T, value, error, bound in zip(
            report.T_grid, report.values, report.errors, report.bounds
        ):
            rows.append([report.u_id, T, value.real, value.imag, error, bound])
    return rows
