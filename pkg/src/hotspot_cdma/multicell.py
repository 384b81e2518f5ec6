"""Multiple macrocells with embedded hotspot microcells.

The region is an ``m x m`` grid of abutting macrocell squares of side ``S``.
Each macrocell square is split into ``n x n`` sub-squares; every sub-square
except the one holding the macro base is a candidate hotspot. Feasibility
of a user placement is decided by solving the full (L+M)-base power-control
system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _mc
from ._mc import CapacityResult
from .analytic import capacity_infinite
from .channel import DelayProfile, DomainError, path_gain_normalized, sample_rho
from .params import SystemParams


@dataclass(frozen=True)
class MulticellLayout:
    """Base sites and hotspot squares.

    Macro bases come first in every per-base array; ties in base selection
    therefore go to the macro tier.
    """

    params: SystemParams
    macro_sites: np.ndarray
    micro_sites: np.ndarray
    hotspot_side: float
    half_extent: float
    hotspot_indices: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "macro_sites", np.atleast_2d(np.asarray(self.macro_sites, float)).reshape(-1, 2))
        object.__setattr__(self, "micro_sites", np.asarray(self.micro_sites, float).reshape(-1, 2))
        if self.n_macro < 1:
            raise ValueError("need at least one macrocell")

    @property
    def n_macro(self) -> int:
        return self.macro_sites.shape[0]

    @property
    def n_micro(self) -> int:
        return self.micro_sites.shape[0]

    @property
    def n_bases(self) -> int:
        return self.n_macro + self.n_micro

    @property
    def sites(self) -> np.ndarray:
        return np.vstack([self.macro_sites, self.micro_sites])

    @property
    def is_macro_base(self) -> np.ndarray:
        return np.arange(self.n_bases) < self.n_macro

    @classmethod
    def two_cell(cls, params: SystemParams) -> "MulticellLayout":
        """One macrocell and one hotspot as in the two-cell model."""
        return cls(params, [[0.0, 0.0]], [[params.hotspot_distance, 0.0]],
                   params.hotspot_side, params.region_side / 2)

    @classmethod
    def grid(cls, params: SystemParams, m: int, n: int, selected=()) -> "MulticellLayout":
        """``m*m`` macrocells; microcells at the chosen candidate squares."""
        centers = candidate_centers(params, m, n)
        selected = tuple(int(i) for i in selected)
        if len(set(selected)) != len(selected):
            raise ValueError("hotspot indices must be distinct")
        if any(i < 0 or i >= len(centers) for i in selected):
            raise ValueError("hotspot index out of range")
        side = params.region_side
        offsets = (np.arange(m) - (m - 1) / 2) * side
        macro = np.array([[x, y] for y in offsets for x in offsets])
        return cls(params, macro, centers[list(selected)].reshape(-1, 2), side / n,
                   m * side / 2, selected)


def candidate_centers(params: SystemParams, m: int, n: int) -> np.ndarray:
    """Centers of the ``m*m*(n*n-1)`` candidate hotspot squares."""
    if m < 1 or n < 3 or n % 2 == 0:
        raise ValueError("need m >= 1 and odd n >= 3 (the macro base sits in the middle square)")
    side = params.region_side
    sub = side / n
    offsets = (np.arange(m) - (m - 1) / 2) * side
    local = (np.arange(n) - (n - 1) / 2) * sub
    out = []
    for cy in offsets:
        for cx in offsets:
            for j, ly in enumerate(local):
                for i, lx in enumerate(local):
                    if i == j == (n - 1) // 2:
                        continue
                    out.append((cx + lx, cy + ly))
    return np.array(out)


def random_layout(params: SystemParams, m: int, n: int, n_hotspots: int,
                  rng: np.random.Generator) -> MulticellLayout:
    """Grid layout with ``n_hotspots`` candidate squares chosen uniformly without replacement."""
    n_cand = m * m * (n * n - 1)
    if not 0 <= n_hotspots <= n_cand:
        raise ValueError(f"n_hotspots must lie in [0, {n_cand}]")
    chosen = np.sort(rng.choice(n_cand, size=n_hotspots, replace=False))
    return MulticellLayout.grid(params, m, n, chosen)


@dataclass(frozen=True)
class MultiScenario:
    """Users of a multicell placement.

    ``gains`` holds true mean gains (up to the common factor
    ``(b/d_max)**4``), shape ``(N, bases)``; ``serving`` the chosen base.
    """

    positions: np.ndarray
    shadow_db: np.ndarray
    gains: np.ndarray
    serving: np.ndarray
    in_hotspot: np.ndarray
    n_bases: int

    @property
    def n_users(self) -> int:
        return self.serving.size

    @property
    def load(self) -> np.ndarray:
        """Users per base."""
        return np.bincount(self.serving, minlength=self.n_bases)


@dataclass(frozen=True)
class PowerSolution:
    powers: np.ndarray
    feasible: np.ndarray


def _multi_scenario(layout: MulticellLayout, n: int, gens) -> MultiScenario:
    p = layout.params
    g_kind, g_which, g_big, g_small, g_shadow = gens
    n_macro, n_micro = layout.n_macro, layout.n_micro
    h = layout.half_extent
    xy = g_big.uniform(-h, h, (n, 2))
    in_hotspot = np.zeros(n, dtype=bool)
    if n_micro:
        in_hotspot = g_kind.random(n) >= n_macro / (n_micro + n_macro)
        which = g_which.integers(0, n_micro, n)
        local = g_small.uniform(-layout.hotspot_side / 2, layout.hotspot_side / 2, (n, 2))
        hs = layout.micro_sites[which] + local
        xy[in_hotspot] = hs[in_hotspot]
    macro = layout.is_macro_base
    sigma = np.where(macro, p.sigma_macro, p.sigma_micro)
    shadow = g_shadow.normal(0.0, 1.0, (n, layout.n_bases)) * sigma
    return scenario_from_positions(layout, xy, shadow, in_hotspot)


def scenario_from_positions(layout: MulticellLayout, positions, shadow_db, in_hotspot=None) -> MultiScenario:
    p = layout.params
    positions = np.atleast_2d(np.asarray(positions, float))
    shadow_db = np.asarray(shadow_db, float).reshape(positions.shape[0], layout.n_bases)
    macro = layout.is_macro_base
    rel = positions[:, None, :] - layout.sites[None, :, :]
    horiz = np.hypot(rel[..., 0], rel[..., 1])
    gains = np.empty_like(horiz)
    for tier, prop in ((macro, p.macro), (~macro, p.micro)):
        if tier.any():
            d3 = prop.distance(horiz[:, tier], p.h_mobile)
            gains[:, tier] = prop.gain * path_gain_normalized(prop, d3, shadow_db[:, tier], p.max_distance)
    score = gains * np.where(macro, 1.0, p.delta)
    serving = np.argmax(score, axis=1)
    if in_hotspot is None:
        in_hotspot = np.zeros(positions.shape[0], dtype=bool)
    return MultiScenario(positions, shadow_db, gains, serving, np.asarray(in_hotspot), layout.n_bases)


def generate_multicell_scenario(layout: MulticellLayout, n: int, rng: np.random.Generator) -> MultiScenario:
    """Place ``n`` users: with probability ``M/(L+M)`` uniformly over the
    region, otherwise uniformly inside one of the L hotspots."""
    if n < 1:
        raise ValueError("need at least one user")
    gens = _mc.generators(int(rng.integers(2**63)), n=5)
    return _multi_scenario(layout, n, gens)


def coupling_matrix(scenario: MultiScenario, fading=None) -> np.ndarray:
    """``G[b, b']``: interference at base ``b`` from users of ``b'``, in units of ``S_b'``.

    ``fading`` is an array of multipath gains shaped ``(..., N, bases)``;
    the result gains the same leading axes. The diagonal is zeroed.
    """
    gains = scenario.gains
    if fading is not None:
        gains = gains * fading
    idx = np.arange(scenario.n_users)
    own = gains[..., idx, scenario.serving]
    ratio = gains / own[..., None]
    onehot = np.zeros((scenario.n_users, scenario.n_bases))
    onehot[idx, scenario.serving] = 1.0
    g = np.swapaxes(ratio, -1, -2) @ onehot
    diag = np.arange(scenario.n_bases)
    g[..., diag, diag] = 0.0
    return g


def solve_powers_general(scenario: MultiScenario, K: float, fading=None) -> PowerSolution:
    """Solve ``(K - N_b) S_b - sum_b' G[b,b'] S_b' = 1`` for every base.

    Feasible iff every base serves fewer than K users and the solution is
    strictly positive. Batched over the leading axes of ``fading``.
    """
    load = scenario.load
    g = coupling_matrix(scenario, fading)
    a = -g
    diag = np.arange(scenario.n_bases)
    a[..., diag, diag] = K - load
    batch = a.shape[:-2]
    rhs = np.ones(batch + (scenario.n_bases, 1))
    if np.any(load >= K):
        return PowerSolution(np.full(batch + (scenario.n_bases,), np.nan), np.zeros(batch, dtype=bool))
    try:
        s = np.linalg.solve(a, rhs)[..., 0]
    except np.linalg.LinAlgError:
        s = _solve_each(a.reshape((-1,) + a.shape[-2:])).reshape(batch + (scenario.n_bases,))
    feasible = np.all(np.isfinite(s) & (s > 0), axis=-1)
    s = np.where(feasible[..., None], s, np.nan)
    return PowerSolution(s, feasible)


def _solve_each(a):
    out = np.full(a.shape[:2], np.nan)
    for k, mat in enumerate(a):
        try:
            out[k] = np.linalg.solve(mat, np.ones(mat.shape[0]))
        except np.linalg.LinAlgError:
            pass
    return out


def _infeasible_count(layout, n, profile, n_draws, gens) -> int:
    scn = _multi_scenario(layout, n, gens[:5])
    K = layout.params.pole_capacity
    if np.any(scn.load >= K):
        return n_draws
    if profile is None:
        return int(not solve_powers_general(scn, K).feasible)
    # (N, bases, draws): user k's draws do not depend on N
    rho = sample_rho(profile, gens[5], (n, layout.n_bases, n_draws))
    sol = solve_powers_general(scn, K, np.moveaxis(rho, -1, 0))
    return int(n_draws - np.count_nonzero(sol.feasible))


def _outage_chunk(chunk, layout, n, profile, n_draws, seed, selection):
    total = 0
    for i in chunk:
        gens = _mc.generators(seed, _mc.SELECTION, selection, i + 1, n=6)
        total += _infeasible_count(layout, n, profile, n_draws, gens)
    return total


def multicell_outage_mc(layout: MulticellLayout, n: int, profile: DelayProfile | None = None,
                        placements: int = 100, fading_draws: int = 50, seed: int = 0,
                        workers: int = 1, selection: int = 0) -> float:
    """Fraction of infeasible instants (terminal power is unlimited here)."""
    if placements < 1 or fading_draws < 1:
        raise ValueError("placements and fading_draws must be >= 1")
    draws = fading_draws if profile is not None else 1
    parts = _mc.run_chunks(_outage_chunk, placements, workers, layout, n, profile, draws, seed,
                           selection)
    return sum(parts) / (placements * draws)


@dataclass(frozen=True)
class MulticellCapacity:
    mean: float
    std: float
    results: tuple = field(default_factory=tuple)

    @property
    def n_stars(self) -> list[int]:
        return [r.n_star for r in self.results]


def multicell_capacity_mc(params: SystemParams, m: int, n: int, n_hotspots: int,
                          profile: DelayProfile | None = None, selections: int = 24,
                          placements: int = 100, fading_draws: int = 50, seed: int = 0,
                          workers: int = 1, method: str = "bisect") -> MulticellCapacity:
    """Capacity averaged over random hotspot selections.

    For each selection the largest N with infeasibility at or below
    ``params.outage`` is found; mean and population standard deviation over
    selections are reported.
    """
    results = []
    for r in range(selections):
        (g_sel,) = _mc.generators(seed, _mc.SELECTION, r, n=1)
        layout = random_layout(params, m, n, n_hotspots, g_sel)
        results.append(layout_capacity_mc(layout, profile, placements, fading_draws, seed,
                                          workers, method, selection=r))
    n_stars = np.array([res.n_star for res in results], dtype=float)
    return MulticellCapacity(float(n_stars.mean()), float(n_stars.std()), tuple(results))


def layout_capacity_mc(layout: MulticellLayout, profile: DelayProfile | None = None,
                       placements: int = 100, fading_draws: int = 50, seed: int = 0,
                       workers: int = 1, method: str = "bisect", selection: int = 0,
                       n_start: int | None = None) -> CapacityResult:
    """Capacity of one fixed layout."""
    p = layout.params
    K = p.pole_capacity
    cap = layout.n_bases * (math.ceil(K) - 1)
    if n_start is None:
        n_start = max(1, int(K) * layout.n_macro)

    def outage_of(n):
        return multicell_outage_mc(layout, n, profile, placements, fading_draws, seed, workers,
                                   selection)

    n_star, trace = _mc.scan_capacity(outage_of, p.outage, min(n_start, cap), cap, method)
    return CapacityResult(n_star, trace, "simulation", seed)


def capacity_multicell_analytic(K: float, v_product: float, n_micro: int, n_macro: int) -> float:
    """``K (L+M) / (1 + sqrt((L/M + M - 1) v_M v_mu))``."""
    if n_micro < 0 or n_macro < 1:
        raise DomainError("need L >= 0 and M >= 1")
    if v_product < 0:
        raise DomainError("v_product must be non-negative")
    L, M = n_micro, n_macro
    return K * (L + M) / (1.0 + math.sqrt((L / M + M - 1) * v_product))


def p_loss(df: float, v_product: float) -> float:
    """Fraction of infinite-dispersion capacity retained at diversity factor ``df``."""
    if df <= 1:
        raise DomainError("diversity factor must exceed 1")
    if math.isinf(df):
        return 1.0
    root = math.sqrt(v_product)
    return (1.0 + root) / (1.0 + df / (df - 1.0) * root)


def capacity_multicell_df(K: float, v_product: float, n_micro: int, n_macro: int, df: float) -> float:
    return p_loss(df, v_product) * capacity_multicell_analytic(K, v_product, n_micro, n_macro)


def capacity_two_cell_df(K: float, v_product: float, df: float) -> float:
    """``N_DF(1,1)``; equals the uniform-channel law at ``L_p = df``."""
    return p_loss(df, v_product) * capacity_infinite(K, v_product)
