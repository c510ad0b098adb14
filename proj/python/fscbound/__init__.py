"""Bounds on the capacity of non-controllable finite-state channels.

Thin Python wrapper over the C++ core: channel construction, belief-grid
value iteration for upper bounds, and simulation-based rate estimates.
"""

from ._core import (
    Channel,
    ConfigError,
    DpResult,
    GridTooLarge,
    PolicySpaceTooLarge,
    RateEstimate,
    bsc,
    context_counts,
    directed_info_rate,
    exact_directed_info,
    gilbert_elliott,
    grid_size,
    markov_lower_bound,
    parse_config,
    quantize,
    run_oracle_checks,
    value_iteration,
)

__all__ = [
    "Channel",
    "ConfigError",
    "DpResult",
    "GridTooLarge",
    "PolicySpaceTooLarge",
    "RateEstimate",
    "bsc",
    "context_counts",
    "directed_info_rate",
    "exact_directed_info",
    "gilbert_elliott",
    "grid_size",
    "markov_lower_bound",
    "parse_config",
    "quantize",
    "run_oracle_checks",
    "value_iteration",
]
