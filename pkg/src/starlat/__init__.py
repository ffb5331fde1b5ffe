"""Rate analysis and link-level Monte Carlo for a three-pair star relay network."""

from .lattice import (
    NestedLatticePair,
    RateUnderflowError,
    build_pair,
    equivalent_noise_power,
    mmse_gamma,
)
from .rates import (
    ASYMPTOTIC_LATTICE_GAP,
    GapSummary,
    PhaseSplit,
    RateCurvePoint,
    SnrPoint,
    af_exchange,
    curve_point,
    df_exchange,
    df_exchange_optimal,
    df_two_r_slack,
    gap_report,
    lattice_exchange,
    lattice_exchange_optimal,
    ub_exchange,
    ub_exchange_optimal,
    ub_sum_constraints,
)
from .sim import (
    ConfigError,
    EquivalentNoiseResult,
    SimConfig,
    StrategyResult,
    equivalent_noise_curve,
    measure_equivalent_noise,
    run_trials,
)

__version__ = "0.1.0"

__all__ = [
    "ASYMPTOTIC_LATTICE_GAP",
    "ConfigError",
    "EquivalentNoiseResult",
    "GapSummary",
    "NestedLatticePair",
    "PhaseSplit",
    "RateCurvePoint",
    "RateUnderflowError",
    "SimConfig",
    "SnrPoint",
    "StrategyResult",
    "__version__",
    "af_exchange",
    "build_pair",
    "curve_point",
    "df_exchange",
    "df_exchange_optimal",
    "df_two_r_slack",
    "equivalent_noise_curve",
    "equivalent_noise_power",
    "gap_report",
    "lattice_exchange",
    "lattice_exchange_optimal",
    "measure_equivalent_noise",
    "mmse_gamma",
    "run_trials",
    "ub_exchange",
    "ub_exchange_optimal",
    "ub_sum_constraints",
]
