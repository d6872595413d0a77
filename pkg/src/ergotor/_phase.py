"""Cancellation-safe phase averages shared by the averaging modules."""

from __future__ import annotations

import numpy as np

# Below this |x| the direct quotient (e^{ix}-1)/(ix) loses digits to
# cancellation; a four-term series keeps both branches within 1e-12 of
# each other at the crossover.
_SERIES_THRESHOLD = 1e-4

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def mean_phase_factor(x):
    """(e^{ix} - 1) / (ix), the mean of e^{i s} over s in [0, x].

    Accepts scalars or arrays; exact 1.0 at x = 0.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    small = np.abs(x) < _SERIES_THRESHOLD
    ix = 1j * x
    # series: sum_{n>=0} (ix)^n / (n+1)!
    series = 1.0 + ix / 2.0 + ix**2 / 6.0 + ix**3 / 24.0
    safe = np.where(small, 1.0, ix)
    direct = np.expm1(ix) / safe
    out = np.where(small, series, direct)
    return complex(out[0]) if scalar else out


def segment_phase_integrals(starts, lengths, rate: float, base_phase: float) -> np.ndarray:
    """Exact integrals of e^{2 pi i (base_phase + rate t)} over [start, start+length].

    Vectorized over segments; a zero rate degenerates to length * e^{2 pi i base}.
    """
    starts = np.asarray(starts, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    lead = np.exp(2j * np.pi * (base_phase + starts * rate))
    return lengths * lead * mean_phase_factor(2.0 * np.pi * lengths * rate)


def gauss_panel_nodes(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite 8-point Gauss-Legendre rule on [a, b].

    Returns flat arrays of panels*8 nodes and matching weights that sum to b-a.
    """
    edges = np.linspace(a, b, panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights
