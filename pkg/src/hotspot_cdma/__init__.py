"""Uplink user capacity of two-tier CDMA systems with hotspot microcells.

Monte Carlo simulation and mean-method approximations for finite terminal
power and finitely dispersive multipath channels, for one macrocell with one
microcell and for grids of macrocells with many embedded microcells.
"""
from ._mc import CapacityResult
from .analytic import (
    MeanStats,
    capacity_analytic,
    capacity_by_df,
    capacity_infinite,
    capacity_uniform,
    estimate_mean_stats,
    mean_method_probs,
    outage_analytic,
    prob_power_exceeded,
)
from .channel import (
    BasePropagation,
    DelayProfile,
    DomainError,
    builtin_profile,
    diversity_factor,
    kappa_cdf,
    kappa_pdf,
    mean_inverse_rho,
    path_gain_normalized,
    rho_pdf_uniform,
    sample_rho,
    sample_shadow,
)
from .multicell import (
    MulticellLayout,
    capacity_multicell_analytic,
    capacity_multicell_df,
    generate_multicell_scenario,
    multicell_capacity_mc,
    p_loss,
    solve_powers_general,
)
from .params import TABLE1, SystemParams
from .twocell import (
    capacity_search,
    cross_tier_interference,
    generate_scenario,
    outage_probability_mc,
    select_base,
    solve_powers,
    user_power_exceeds,
)

__version__ = "0.1.0"
