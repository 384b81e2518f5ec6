"""One macrocell with one embedded hotspot microcell.

Users are placed, assigned to a base by mean path gain, and tested for
power-control feasibility and terminal power limits. Outage is estimated by
Monte Carlo over placements (positions plus shadowing) and, for finitely
dispersive channels, over multipath fading draws at each placement.

Received powers are normalized by ``eta*W``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _mc
from ._mc import CapacityResult
from .channel import DelayProfile, path_gain_normalized, sample_rho
from .params import SystemParams


@dataclass(frozen=True)
class Scenario:
    """A placement of N users with their normalized mean gains.

    ``gain_macro`` / ``gain_micro`` are the normalized gains ``T'`` toward
    each base; the true macro/micro gain ratio is ``gain_ratio * T'_M / T'_mu``.
    """

    positions: np.ndarray
    shadow_macro: np.ndarray
    shadow_micro: np.ndarray
    gain_macro: np.ndarray
    gain_micro: np.ndarray
    is_macro: np.ndarray
    gain_ratio: float

    @property
    def n_users(self) -> int:
        return self.is_macro.size

    @property
    def n_macro(self) -> int:
        return int(self.is_macro.sum())

    @property
    def n_micro(self) -> int:
        return self.n_users - self.n_macro

    @property
    def macro_to_micro(self) -> np.ndarray:
        """True-gain ratio ``T_M / T_mu`` per user."""
        return self.gain_ratio * self.gain_macro / self.gain_micro


@dataclass(frozen=True)
class FadingDraw:
    """Multipath gains toward the macro and micro base, shape ``(..., N)``."""

    rho_macro: np.ndarray
    rho_micro: np.ndarray


@dataclass(frozen=True)
class OutageEstimate:
    n: int
    trials: int
    infeasible: float
    power_exceeded: float

    @property
    def outage_fraction(self) -> float:
        return self.infeasible + self.power_exceeded


def hotspot_center(params: SystemParams) -> np.ndarray:
    # hotspot lies on the +x axis
    return np.array([params.hotspot_distance, 0.0])


def select_base(gain_macro_full, gain_micro_full, delta: float = 1.0):
    """True where the macro base is chosen (ties go to the macro)."""
    return np.asarray(gain_macro_full) >= delta * np.asarray(gain_micro_full)


def _place_users(params: SystemParams, n: int, gens) -> np.ndarray:
    g_hot, g_big, g_small = gens
    half = params.region_side / 2
    in_hotspot = g_hot.random(n) < 0.5
    xy = g_big.uniform(-half, half, (n, 2))
    hs = g_small.uniform(-params.hotspot_side / 2, params.hotspot_side / 2, (n, 2))
    xy[in_hotspot] = hs[in_hotspot] + hotspot_center(params)
    return xy


def scenario_from_positions(params: SystemParams, positions, shadow_macro, shadow_micro) -> Scenario:
    """Build a scenario from given positions (meters) and shadow draws (dB)."""
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    d_max = params.max_distance
    macro, micro = params.macro, params.micro
    d_macro = macro.distance(np.hypot(positions[:, 0], positions[:, 1]), params.h_mobile)
    rel = positions - hotspot_center(params)
    d_micro = micro.distance(np.hypot(rel[:, 0], rel[:, 1]), params.h_mobile)
    shadow_macro = np.broadcast_to(np.asarray(shadow_macro, dtype=float), d_macro.shape)
    shadow_micro = np.broadcast_to(np.asarray(shadow_micro, dtype=float), d_micro.shape)
    g_macro = np.atleast_1d(path_gain_normalized(macro, d_macro, shadow_macro, d_max))
    g_micro = np.atleast_1d(path_gain_normalized(micro, d_micro, shadow_micro, d_max))
    is_macro = select_base(params.gain_ratio * g_macro, g_micro, params.delta)
    return Scenario(positions, shadow_macro, shadow_micro, g_macro, g_micro, is_macro,
                    params.gain_ratio)


def generate_scenario(params: SystemParams, n: int, rng: np.random.Generator) -> Scenario:
    """Place ``n`` users: each in the hotspot square with probability 1/2,
    otherwise uniformly over the whole region."""
    if n < 1:
        raise ValueError("need at least one user")
    gens = _mc.generators(int(rng.integers(2**63)), n=5)
    return _scenario(params, n, gens)


def _scenario(params, n, gens) -> Scenario:
    # one stream per attribute keeps user k identical for every n > k
    xy = _place_users(params, n, gens[:3])
    sh_macro = gens[3].normal(0.0, params.sigma_macro, n) if params.sigma_macro > 0 else np.zeros(n)
    sh_micro = gens[4].normal(0.0, params.sigma_micro, n) if params.sigma_micro > 0 else np.zeros(n)
    return scenario_from_positions(params, xy, sh_macro, sh_micro)


def cross_tier_interference(scenario: Scenario, fading: FadingDraw | None = None):
    """Normalized cross-tier interference ``(I_M, I_mu)``.

    ``I_M`` sums ``T_M/T_mu`` over micro users, ``I_mu`` sums ``T_mu/T_M``
    over macro users. With ``fading`` each term is scaled by the ratio of the
    users' multipath gains; leading axes of the fading arrays broadcast.
    """
    ratio = scenario.macro_to_micro
    micro = ~scenario.is_macro
    if fading is None:
        return float(ratio[micro].sum()), float((1.0 / ratio[scenario.is_macro]).sum())
    kappa = np.asarray(fading.rho_macro) / np.asarray(fading.rho_micro)
    i_macro = (kappa * np.where(micro, ratio, 0.0)).sum(axis=-1)
    i_micro = (np.where(micro, 0.0, 1.0 / ratio) / kappa).sum(axis=-1)
    return i_macro, i_micro


def solve_powers(n_macro, n_micro, i_macro, i_micro, K: float):
    """Required normalized received powers ``(S'_M, S'_mu)``.

    Infeasible instances (nonpositive common denominator, or a tier at or
    above pole capacity) come back as NaN.
    """
    n_macro, n_micro, i_macro, i_micro = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (n_macro, n_micro, i_macro, i_micro)))
    a_macro = K - n_macro
    a_micro = K - n_micro
    den = a_micro * a_macro - i_macro * i_micro
    feasible = (a_macro > 0) & (a_micro > 0) & (den > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_macro = np.where(feasible, (a_micro + i_macro) / den, np.nan)
        s_micro = np.where(feasible, (a_macro + i_micro) / den, np.nan)
    if s_macro.ndim == 0:
        return float(s_macro), float(s_micro)
    return s_macro, s_micro


def user_power_exceeds(s_serving, gain_serving, F: float, gain_ratio: float, serving_macro,
                       rho=None):
    """True where a terminal would need more than its power cap.

    The cap is ``F`` for micro users and ``F * gain_ratio`` for macro users,
    compared strictly against ``S' / (rho * T')``.
    """
    gain = np.asarray(gain_serving, dtype=float)
    if rho is not None:
        gain = gain * np.asarray(rho)
    cap = np.where(serving_macro, F * gain_ratio, F)
    return np.asarray(s_serving) / gain > cap


def _placement_outcomes(scn: Scenario, params: SystemParams, profile, n_draws, fade_gens):
    """(infeasible, power_exceeded) instant counts for one placement."""
    K = params.pole_capacity
    n_macro, n_micro = scn.n_macro, scn.n_micro
    if n_macro >= K or n_micro >= K:
        return n_draws, 0
    if profile is None:
        fading = None
        i_macro, i_micro = cross_tier_interference(scn)
    else:
        n = scn.n_users
        # (N, draws) then transpose: user k's draws do not depend on N
        fading = FadingDraw(sample_rho(profile, fade_gens[0], (n, n_draws)).T,
                            sample_rho(profile, fade_gens[1], (n, n_draws)).T)
        i_macro, i_micro = cross_tier_interference(scn, fading)
    s_macro, s_micro = solve_powers(n_macro, n_micro, i_macro, i_micro, K)
    feasible = np.isfinite(s_macro)
    n_inf = int(np.size(feasible) - np.count_nonzero(feasible)) if profile is not None else int(not feasible)
    if not math.isfinite(params.F):
        return n_inf, 0
    s_macro = np.atleast_1d(s_macro)[:, None]
    s_micro = np.atleast_1d(s_micro)[:, None]
    serving_gain = np.where(scn.is_macro, scn.gain_macro, scn.gain_micro)
    s_serving = np.where(scn.is_macro, s_macro, s_micro)
    rho = None
    if fading is not None:
        rho = np.where(scn.is_macro, fading.rho_macro, fading.rho_micro)
    with np.errstate(invalid="ignore"):
        exceeded = user_power_exceeds(s_serving, serving_gain, params.F, params.gain_ratio,
                                      scn.is_macro, rho).any(axis=-1)
    n_pow = int(np.count_nonzero(exceeded & np.atleast_1d(feasible)))
    return n_inf, n_pow


def _outage_chunk(chunk, params, n, profile, n_draws, seed):
    n_inf = n_pow = 0
    for i in chunk:
        gens = _mc.generators(seed, _mc.PLACEMENT, i, n=7)
        scn = _scenario(params, n, gens[:5])
        a, b = _placement_outcomes(scn, params, profile, n_draws, gens[5:])
        n_inf += a
        n_pow += b
    return n_inf, n_pow


def outage_probability_mc(params: SystemParams, n: int, profile: DelayProfile | None = None,
                          placements: int = 200, fading_draws: int = 200, seed: int = 0,
                          workers: int = 1) -> OutageEstimate:
    """Monte Carlo outage probability for ``n`` users.

    An instant is in outage when the powers are infeasible or, for finite
    ``F``, any terminal exceeds its cap. Without a profile the channel is
    infinitely dispersive and one instant is evaluated per placement.
    Placement ``i`` uses the same random streams for every ``n``.
    """
    if placements < 1 or fading_draws < 1:
        raise ValueError("placements and fading_draws must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    draws = fading_draws if profile is not None else 1
    parts = _mc.run_chunks(_outage_chunk, placements, workers, params, n, profile, draws, seed)
    n_inf = sum(p[0] for p in parts)
    n_pow = sum(p[1] for p in parts)
    trials = placements * draws
    return OutageEstimate(n, trials, n_inf / trials, n_pow / trials)


def feasibility_cap(K: float) -> int:
    """Largest population that can possibly be feasible with two bases."""
    return 2 * (math.ceil(K) - 1)


def capacity_search(params: SystemParams, profile: DelayProfile | None = None,
                    placements: int = 200, fading_draws: int = 200, seed: int = 0,
                    workers: int = 1, n_start: int = 1, method: str = "linear") -> CapacityResult:
    """Largest N whose simulated outage stays at or below ``params.outage``."""
    cap = feasibility_cap(params.pole_capacity)

    def outage_of(n):
        return outage_probability_mc(params, n, profile, placements, fading_draws, seed,
                                     workers).outage_fraction

    n_star, trace = _mc.scan_capacity(outage_of, params.outage, min(n_start, cap), cap, method)
    return CapacityResult(n_star, trace, "simulation", seed)
