"""Spectral pricing of proportional double-barrier step call options.

The occupation-time discount outside a barrier band maps the pricing problem
onto a finite square well; prices are bound-state expansions, checked against
an independent Monte Carlo simulator.
"""

from .curves import ParamCurve
from .errors import (
    ConfigError,
    DomainError,
    LevelIndexError,
    NoBoundStatesError,
    StepwellError,
    UnsupportedConfigurationError,
)
from .montecarlo import McConfig, McEstimate, simulate_price, simulate_prices
from .pricing import (
    Contract,
    DivergentTailWarning,
    PriceQuery,
    PriceResult,
    drift_transform,
    kernel_const,
    price_const,
    price_sdb_limit,
)
from .timedep import LevelUnbindingWarning, accumulate_td, closed_form_case, kernel_td, price_td
from .well import EigenLevel, Spectrum, WellSpec, build_spectrum, count_bound_states, solve_level

__version__ = "0.1.0"
