"""Desk-scale numerics for linear flows on the truncated torus.

The toolkit verifies, with exact oracles wherever possible, that time
averages along the flow {x + t*lambda} match product-measure space
averages, that occupation ratios of Jordan boxes converge to their
volumes, and that telescoping-majorant superlevel sets obey their
Chebyshev bounds.
"""

__version__ = "0.1.0"

from .equidistribution import (
    DiscrepancyResult,
    JordanRegion,
    OccupationResult,
    anchored_discrepancy,
    discrepancy_estimate,
    occupation_measure,
    region_integral,
    restricted_time_average,
    weyl_sum,
)
from .ergodic_averages import (
    AverageReport,
    QuadratureEstimate,
    convergence_sweep,
    ergodic_error_bound,
    oscillation_rate,
    time_average_analytic,
    time_average_quadrature,
)
from .errors import (
    BudgetError,
    IndeterminateTailError,
    InvalidInputError,
    NoConvergenceError,
    ResonanceError,
)
from .fourier_sparse import (
    CoefficientRule,
    FourierSeries,
    L1MassReport,
    MultiIndex,
    RankSchedule,
    l1_mass,
    majorant_windows,
    permute_index,
    permute_series,
    select_rank_schedule,
    telescoping_majorant,
    telescoping_majorant_many,
)
from .frequencies import (
    FrequencyFamily,
    FrequencySequence,
    IndependenceReport,
    check_independence,
    generate,
)
from .montecarlo_measure import (
    MCEstimate,
    chebyshev_bound,
    mc_measure_superlevel,
    mc_space_integral,
)
from .torus_core import (
    FinitePermutation,
    TorusPoint,
    apply_permutation,
    flow,
    flow_many,
    tychonoff_distance,
    wrap_fractional,
)

__all__ = [
    "__version__",
    "TorusPoint",
    "FinitePermutation",
    "wrap_fractional",
    "flow",
    "flow_many",
    "tychonoff_distance",
    "apply_permutation",
    "FrequencyFamily",
    "FrequencySequence",
    "IndependenceReport",
    "generate",
    "check_independence",
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
    "AverageReport",
    "QuadratureEstimate",
    "time_average_analytic",
    "time_average_quadrature",
    "ergodic_error_bound",
    "oscillation_rate",
    "convergence_sweep",
    "JordanRegion",
    "OccupationResult",
    "DiscrepancyResult",
    "occupation_measure",
    "restricted_time_average",
    "region_integral",
    "weyl_sum",
    "discrepancy_estimate",
    "anchored_discrepancy",
    "MCEstimate",
    "mc_space_integral",
    "mc_measure_superlevel",
    "chebyshev_bound",
    "InvalidInputError",
    "ResonanceError",
    "NoConvergenceError",
    "BudgetError",
    "IndeterminateTailError",
]
