"""Closed-form and mean-method capacity approximations for the two-cell system.

The single-term interference statistics (``v_M``, ``v_mu``), the assignment
probability and the per-tier gain distributions are estimated once by
sampling users (:func:`estimate_mean_stats`). The infeasibility probability
and the feasible-conditioned mean received powers for a given N are then
obtained by resampling sums of stored terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaincc, gammaln, logsumexp

from . import _mc
from ._mc import CapacityResult
from .channel import DelayProfile, DomainError, diversity_factor
from .params import SystemParams
from .twocell import _scenario, feasibility_cap, solve_powers

CACHE_VERSION = 1
_TABLES = ("v_macro_terms", "v_micro_terms", "gain_macro", "gain_micro")


class EstimationError(RuntimeError):
    """Statistics could not be estimated or are missing."""


@dataclass(frozen=True, eq=False)
class MeanStats:
    """Sampled single-user statistics.

    ``v_macro_terms`` holds ``T_M/T_mu`` for micro-assigned users (terms of
    ``I_M``), ``v_micro_terms`` holds ``T_mu/T_M`` for macro-assigned users,
    ``gain_macro`` / ``gain_micro`` the serving normalized gains ``T'``. All
    tables are sorted.
    """

    p: float
    v_macro_terms: np.ndarray
    v_micro_terms: np.ndarray
    gain_macro: np.ndarray
    gain_micro: np.ndarray
    pole_capacity: float
    gain_ratio: float
    seed: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def v_macro(self) -> float:
        return float(self.v_macro_terms.mean())

    @property
    def v_micro(self) -> float:
        return float(self.v_micro_terms.mean())

    @property
    def v_product(self) -> float:
        return self.v_macro * self.v_micro

    @staticmethod
    def quantile(table: np.ndarray, q):
        """Empirical quantile of a sorted table (monotone in ``q``)."""
        return np.quantile(table, q, method="inverted_cdf")

    def save(self, path) -> None:
        Path(path).write_text(dumps(self))

    @classmethod
    def load(cls, path) -> "MeanStats":
        return loads(Path(path).read_text())


def estimate_mean_stats(params: SystemParams, samples: int = 100_000, seed: int = 0) -> MeanStats:
    """Sample ``samples`` users from the two-cell placement law."""
    if samples < 10_000:
        raise ValueError("need at least 1e4 samples")
    gens = _mc.generators(seed, _mc.STATS, n=5)
    scn = _scenario(params, samples, gens)
    micro = ~scn.is_macro
    if not micro.any() or micro.all():
        raise EstimationError("sampled users all chose the same base; geometry is degenerate")
    ratio = scn.macro_to_micro
    return MeanStats(
        p=float(scn.is_macro.mean()),
        v_macro_terms=np.sort(ratio[micro]),
        v_micro_terms=np.sort(1.0 / ratio[scn.is_macro]),
        gain_macro=np.sort(scn.gain_macro[scn.is_macro]),
        gain_micro=np.sort(scn.gain_micro[micro]),
        pole_capacity=params.pole_capacity,
        gain_ratio=params.gain_ratio,
        seed=seed,
    )


def dumps(stats: MeanStats) -> str:
    lines = [f"# hotspot_cdma mean-stats v{CACHE_VERSION}", "[scalars]"]
    for name in ("p", "pole_capacity", "gain_ratio"):
        lines.append(f"{name} = {float(getattr(stats, name))!r}")
    lines.append(f"seed = {int(stats.seed)}")
    for name in _TABLES:
        table = getattr(stats, name)
        lines.append(f"[{name}] {table.size}")
        lines.extend(repr(float(x)) for x in table)
    return "\n".join(lines) + "\n"


def loads(text: str) -> MeanStats:
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"# hotspot_cdma mean-stats v{CACHE_VERSION}":
        raise EstimationError("not a mean-stats cache file (or unsupported version)")
    scalars: dict[str, float] = {}
    tables: dict[str, np.ndarray] = {}
    i = 1
    section = None
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        if line.startswith("["):
            head, _, count = line.partition("]")
            section = head[1:]
            if section in _TABLES:
                n = int(count)
                tables[section] = np.array([float(x) for x in lines[i:i + n]])
                if tables[section].size != n:
                    raise EstimationError(f"table {section} truncated")
                i += n
            continue
        if section != "scalars":
            raise EstimationError(f"unexpected line {i}: {line!r}")
        key, _, value = line.partition("=")
        scalars[key.strip()] = float(value)
    missing = [t for t in _TABLES if t not in tables]
    if missing:
        raise EstimationError(f"cache file missing tables {missing}")
    return MeanStats(p=scalars["p"], pole_capacity=scalars["pole_capacity"],
                     gain_ratio=scalars["gain_ratio"], seed=int(scalars.get("seed", 0)), **tables)


# closed forms


def capacity_infinite(K: float, v_product: float) -> float:
    """Mean-method capacity ``2K / (1 + sqrt(v_M v_mu))``."""
    if v_product < 0:
        raise DomainError("v_product must be non-negative")
    return 2.0 * K / (1.0 + math.sqrt(v_product))


def capacity_uniform(K: float, v_product: float, n_taps: float) -> float:
    """Capacity with ``n_taps`` equal-power Rayleigh paths; ``E{1/rho}`` inflates both terms."""
    if n_taps < 2:
        raise DomainError("the uniform-channel approximation needs at least 2 paths")
    if v_product < 0:
        raise DomainError("v_product must be non-negative")
    if math.isinf(n_taps):
        return capacity_infinite(K, v_product)
    return 2.0 * K / (1.0 + n_taps / (n_taps - 1.0) * math.sqrt(v_product))


def capacity_by_df(K: float, v_product: float, profile: DelayProfile) -> float:
    """Uniform-channel capacity evaluated at the profile's (real) diversity factor."""
    df = diversity_factor(profile)
    if df <= 1:
        raise DomainError("diversity factor must exceed 1")
    if df >= 2:
        return capacity_uniform(K, v_product, df)
    # 1 < DF < 2: same law, outside the range where uniform channels exist
    return 2.0 * K / (1.0 + df / (df - 1.0) * math.sqrt(v_product))


def prob_power_exceeded(p: float, p_macro: float, p_micro: float, n: int) -> float:
    """Probability some of ``n`` feasible users exceeds its power cap.

    Binomial mixture over the number of macro users, each term
    ``C(n,k) p^k q^(n-k) (1 - p_M^k p_mu^(n-k))``, summed in log space.
    """
    for name, val in (("p", p), ("p_macro", p_macro), ("p_micro", p_micro)):
        if not 0.0 <= val <= 1.0:
            raise DomainError(f"{name} must be a probability")
    if n <= 0:
        return 0.0
    k = np.arange(n + 1)
    with np.errstate(divide="ignore"):
        log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        log_w = log_binom + _xlogy(k, p) + _xlogy(n - k, 1.0 - p)
        log_all_ok = _xlogy(k, p_macro) + _xlogy(n - k, p_micro)
        # log(1 - p_M^k p_mu^(n-k)), accurate when the product is near 1
        log_fail = np.log(-np.expm1(log_all_ok))
    out = float(np.exp(logsumexp(log_w + log_fail)))
    return min(max(out, 0.0), 1.0)


def _xlogy(k, x):
    k = np.asarray(k, dtype=float)
    if x == 0.0:
        return np.where(k == 0, 0.0, -np.inf)
    return k * math.log(x)


# resampling estimates


def _fading_taps(profile: DelayProfile | None) -> int | None:
    if profile is None:
        return None
    return max(1, int(round(diversity_factor(profile))))


def power_moments(stats: MeanStats, n: int, n_taps: int | None = None,
                  resamples: int = 100_000, seed: int | None = None, split: str = "binomial"):
    """``(P_inf, E{S'_M}, E{S'_mu})`` for ``n`` users.

    Each resample assigns the users to tiers (binomially with the sampled
    macro probability, or ``split="equal"`` for ``ceil(n/2)`` macro users),
    then sums stored ``v_M`` terms over the micro users and ``v_mu`` terms
    over the macro users. With ``n_taps`` every term is multiplied by an
    independent ratio of unit-mean Gamma(``n_taps``) variates. Means are
    over feasible resamples only (NaN if there are none).
    """
    if split not in ("binomial", "equal"):
        raise ValueError(f"unknown split {split!r}")
    key = (n, n_taps, resamples, seed, split)
    if key in stats._cache:
        return stats._cache[key]
    K = stats.pole_capacity
    base_seed = stats.seed if seed is None else seed
    g = _mc.generators(base_seed, _mc.RESAMPLE, n, 0 if n_taps is None else n_taps, n=3)
    n_feasible = 0
    sum_macro = sum_micro = 0.0
    for chunk in _mc.chunked(resamples, -(-resamples // _CHUNK)):
        size = len(chunk)
        if split == "binomial":
            n_macro = g[0].binomial(n, stats.p, size)
        else:
            n_macro = np.full(size, (n + 1) // 2)
        n_micro = n - n_macro
        slots = np.arange(n)
        i_macro = _resampled_sum(stats.v_macro_terms, slots < n_micro[:, None], g[1], g[2], n_taps)
        i_micro = _resampled_sum(stats.v_micro_terms, slots < n_macro[:, None], g[1], g[2], n_taps)
        s_macro, s_micro = solve_powers(n_macro, n_micro, i_macro, i_micro, K)
        ok = np.isfinite(s_macro)
        n_feasible += int(ok.sum())
        sum_macro += float(s_macro[ok].sum())
        sum_micro += float(s_micro[ok].sum())
    if n_feasible:
        out = (1.0 - n_feasible / resamples, sum_macro / n_feasible, sum_micro / n_feasible)
    else:
        out = (1.0, math.nan, math.nan)
    stats._cache[key] = out
    return out


_CHUNK = 20_000


def _resampled_sum(table, mask, g_pick, g_fade, n_taps):
    terms = table[g_pick.integers(0, table.size, mask.shape)]
    if n_taps is not None:
        rho = g_fade.gamma(n_taps, 1.0 / n_taps, (2,) + mask.shape)
        terms = terms * (rho[0] / rho[1])
    return np.where(mask, terms, 0.0).sum(axis=1)


def mean_method_probs(stats: MeanStats, n: int, F: float, profile: DelayProfile | None = None,
                      resamples: int = 100_000, split: str = "binomial"):
    """``(p_M, p_mu)``: probability a random macro / micro user stays within its cap
    when the received power is replaced by its mean."""
    if stats is None:
        raise EstimationError("mean statistics must be estimated first")
    if math.isinf(F):
        return 1.0, 1.0
    if F <= 0:
        return 0.0, 0.0
    n_taps = _fading_taps(profile)
    _, es_macro, es_micro = power_moments(stats, n, n_taps, resamples, split=split)
    if not math.isfinite(es_macro):
        return 0.0, 0.0
    c_macro = es_macro / (F * stats.gain_ratio)
    c_micro = es_micro / F
    if n_taps is None:
        p_macro = 1.0 - np.searchsorted(stats.gain_macro, c_macro, side="left") / stats.gain_macro.size
        p_micro = 1.0 - np.searchsorted(stats.gain_micro, c_micro, side="left") / stats.gain_micro.size
        return float(p_macro), float(p_micro)
    # Pr[rho >= c/T'] averaged over the stored gain table
    L = n_taps
    p_macro = gammaincc(L, L * c_macro / stats.gain_macro).mean()
    p_micro = gammaincc(L, L * c_micro / stats.gain_micro).mean()
    return float(p_macro), float(p_micro)


def outage_analytic(stats: MeanStats, n: int, F: float = math.inf,
                    profile: DelayProfile | None = None, resamples: int = 100_000,
                    split: str = "binomial") -> float:
    """``P_inf + (1 - P_inf) * Pr[P > P_max | N]``."""
    p_inf, _, _ = power_moments(stats, n, _fading_taps(profile), resamples, split=split)
    if math.isinf(F) or p_inf >= 1.0:
        return p_inf
    p_macro, p_micro = mean_method_probs(stats, n, F, profile, resamples, split)
    return p_inf + (1.0 - p_inf) * prob_power_exceeded(stats.p, p_macro, p_micro, n)


def capacity_analytic(stats: MeanStats, params: SystemParams, profile: DelayProfile | None = None,
                      resamples: int = 100_000, n_start: int = 1,
                      split: str = "binomial") -> CapacityResult:
    """Largest N whose approximate outage stays at or below ``params.outage``."""
    cap = feasibility_cap(stats.pole_capacity)
    n_star, trace = _mc.scan_capacity(
        lambda n: outage_analytic(stats, n, params.F, profile, resamples, split),
        params.outage, min(n_start, cap), cap, "linear")
    return CapacityResult(n_star, trace, "analytic", stats.seed)
