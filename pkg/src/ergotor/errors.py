"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: bad inputs and configs exit 2,
numerical failures (resonance, non-convergence, exhausted budgets) exit 3.
"""

from __future__ import annotations


class InvalidInputError(ValueError):
    """An argument violates an operation's preconditions."""


class ResonanceError(ArithmeticError):
    """A nonzero multi-index has frequency combination exactly zero.

    Impossible under rational independence; raised for user-supplied
    frequency sets where a term would stop oscillating along the flow.
    """

    def __init__(self, index, message: str | None = None):
        self.index = index
        super().__init__(message or f"resonant multi-index {index!r}: <m, lambda> = 0")


class NoConvergenceError(ArithmeticError):
    """Refinement budget exhausted before the requested tolerance was met."""

    def __init__(self, message: str, last_estimates: tuple[complex, complex] | None = None):
        self.last_estimates = last_estimates
        super().__init__(message)


class BudgetError(RuntimeError):
    """An enumeration or event budget would be exceeded.

    Carries a human-readable suggestion for smaller inputs.
    """

    def __init__(self, message: str, suggestion: str | None = None):
        self.suggestion = suggestion
        super().__init__(message if suggestion is None else f"{message} ({suggestion})")


class IndeterminateTailError(RuntimeError):
    """A rule-generated series declared no usable tail bound, so absolute
    convergence can be neither certified nor refuted."""
