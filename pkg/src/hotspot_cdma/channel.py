"""Propagation and multipath-fading primitives.

Gains are kept in the normalized form used throughout the package: for a
base with breakpoint ``b`` and antenna gain factor ``H_l`` the true mean gain
is ``H_l * (b / d_max)**4 * T'``, and only ``T'`` is ever materialized.

The RAKE output gain ``rho`` is the sum of independent exponentially
distributed tap powers, scaled so that ``E{rho} = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.special import gammaln, logsumexp


class DomainError(ValueError):
    """Argument outside the domain where a formula is defined."""


@dataclass(frozen=True)
class BasePropagation:
    """Large-scale propagation parameters of one base station.

    Parameters
    ----------
    breakpoint : float
        Dual-slope breakpoint distance in meters.
    gain : float
        Antenna gain factor ``H_l``. Only ratios between bases matter.
    sigma_db : float
        Shadow-fading standard deviation in dB.
    height : float
        Antenna height in meters.
    """

    breakpoint: float
    gain: float
    sigma_db: float
    height: float

    def __post_init__(self):
        if self.breakpoint <= 0:
            raise ValueError("breakpoint must be positive")
        if self.gain <= 0:
            raise ValueError("gain must be positive")
        if self.sigma_db < 0:
            raise ValueError("sigma_db must be non-negative")

    def distance(self, horizontal, h_mobile: float):
        """3-D distance from a terminal at height ``h_mobile``."""
        if self.height <= h_mobile:
            raise ValueError("base antenna must be above the terminal")
        return np.hypot(horizontal, self.height - h_mobile)


def path_gain_normalized(base: BasePropagation, d3, shadow_db, d_max: float):
    """Normalized mean path gain ``T'`` (dimensionless).

    ``(d_max/d)**2 (d_max/b)**2`` inside the breakpoint, ``(d_max/d)**4`` at
    or beyond it, times the shadow factor ``10**(shadow_db/10)``.
    """
    d3 = np.asarray(d3, dtype=float)
    if d_max <= 0:
        raise DomainError("d_max must be positive")
    if np.any(d3 <= 0):
        raise DomainError("distance must be positive")
    b = base.breakpoint
    near = (d_max / d3) ** 2 * (d_max / b) ** 2
    far = (d_max / d3) ** 4
    gain = np.where(d3 < b, near, far) * 10.0 ** (np.asarray(shadow_db) / 10.0)
    return gain[()] if gain.ndim == 0 else gain


def sample_shadow(sigma_db: float, rng: np.random.Generator, size=None):
    """Zero-mean Gaussian shadow fading in dB."""
    if sigma_db < 0:
        raise ValueError("sigma_db must be non-negative")
    if sigma_db == 0:
        return np.zeros(size) if size is not None else 0.0
    return rng.normal(0.0, sigma_db, size)


@dataclass(frozen=True)
class DelayProfile:
    """Mean tap powers of a multipath delay profile.

    Taps are normalized to unit sum on construction so the RAKE output gain
    has unit mean.
    """

    taps: np.ndarray
    label: str = ""
    _uniform: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        taps = np.atleast_1d(np.asarray(self.taps, dtype=float))
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("a delay profile needs at least one tap")
        if np.any(~np.isfinite(taps)) or np.any(taps <= 0):
            raise ValueError("tap powers must be finite and positive")
        taps = taps / taps.sum()
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "_uniform", bool(np.ptp(taps) <= 1e-12 * taps.max()))

    @classmethod
    def uniform(cls, n_taps: int) -> "DelayProfile":
        """``n_taps`` i.i.d. Rayleigh paths of equal mean power."""
        if int(n_taps) != n_taps or n_taps < 1:
            raise ValueError("n_taps must be a positive integer")
        return cls(np.ones(int(n_taps)), label=f"uniform:{int(n_taps)}")

    @classmethod
    def from_db(cls, powers_db, label: str = "") -> "DelayProfile":
        return cls(10.0 ** (np.asarray(powers_db, dtype=float) / 10.0), label=label)

    @classmethod
    def from_file(cls, path, label: str | None = None) -> "DelayProfile":
        """Read a profile file.

        One tap per line, either ``<power_dB>`` or ``<delay_ns> <power_dB>``.
        Delays are accepted and discarded. ``#`` starts a comment.
        """
        path = Path(path)
        powers = []
        for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.replace(",", " ").split()
            if len(fields) not in (1, 2):
                raise ValueError(f"{path}:{lineno}: expected '<power_dB>' or '<delay_ns> <power_dB>'")
            try:
                powers.append(float(fields[-1]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad power value {fields[-1]!r}") from None
        if not powers:
            raise ValueError(f"{path}: no taps found")
        return cls.from_db(powers, label=label if label is not None else path.stem)

    @property
    def n_taps(self) -> int:
        return self.taps.size

    @property
    def is_uniform(self) -> bool:
        return self._uniform

    @property
    def diversity_factor(self) -> float:
        return diversity_factor(self)


BUILTIN_PROFILES = ("ra", "ht", "tu")


def builtin_profile(name: str) -> DelayProfile:
    """Shipped RA / HT / TU profiles (data files under ``profiles/``)."""
    name = name.lower()
    if name not in BUILTIN_PROFILES:
        raise KeyError(f"unknown profile {name!r}; choose from {BUILTIN_PROFILES}")
    ref = resources.files("hotspot_cdma") / "profiles" / f"{name}.txt"
    with resources.as_file(ref) as path:
        return DelayProfile.from_file(path, label=name.upper())


def parse_profile_spec(spec: str | None) -> DelayProfile | None:
    """``none`` | ``uniform:<L>`` | ``ra`` / ``ht`` / ``tu`` | path to a profile file."""
    if spec is None:
        return None
    spec = spec.strip()
    if spec.lower() in ("", "none", "inf"):
        return None
    if spec.lower().startswith("uniform:"):
        value = spec.split(":", 1)[1].strip()
        if value.lower() == "inf":
            return None
        return DelayProfile.uniform(int(value))
    if spec.lower() in BUILTIN_PROFILES:
        return builtin_profile(spec)
    path = Path(spec)
    if not path.is_file():
        raise FileNotFoundError(f"profile file not found: {spec}")
    return DelayProfile.from_file(path)


def sample_rho(profile: DelayProfile, rng: np.random.Generator, size=None):
    """Draw RAKE output gains ``rho = sum_n r_n`` with ``r_n ~ Exp(E{r_n})``."""
    if profile.is_uniform:
        # sum of L i.i.d. Exp(1/L) is Gamma(L, 1/L); one call instead of L
        n = profile.n_taps
        return rng.gamma(n, 1.0 / n, size)
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    draws = rng.exponential(1.0, shape + (profile.n_taps,))
    return draws @ profile.taps


def rho_pdf_uniform(x, n_taps: int):
    """Density of ``rho`` for ``n_taps`` equal-power Rayleigh paths."""
    x = np.asarray(x, dtype=float)
    if n_taps < 1:
        raise DomainError("n_taps must be >= 1")
    if np.any(x <= 0):
        raise DomainError("rho density is defined for x > 0")
    L = n_taps
    logf = np.log(L) - gammaln(L) + (L - 1) * np.log(x * L) - x * L
    out = np.exp(logf)
    return out[()] if out.ndim == 0 else out


def mean_inverse_rho(n_taps) -> float:
    """``E{1/rho}`` for a uniform channel, ``L/(L-1)``; diverges for one path."""
    if n_taps <= 1:
        raise DomainError("E{1/rho} is undefined (infinite) for n_taps <= 1")
    return n_taps / (n_taps - 1.0)


def _kappa_terms(x, n_taps):
    x = np.asarray(x, dtype=float)
    if int(n_taps) != n_taps or n_taps < 1:
        raise DomainError("n_taps must be a positive integer")
    if np.any(x <= 0):
        raise DomainError("kappa distribution is evaluated for x > 0")
    L = int(n_taps)
    i = np.arange(L)
    # log[(L-1+i)! / ((L-1)! i!)]
    logc = gammaln(L + i) - gammaln(L) - gammaln(i + 1)
    return x[..., None], L, i, logc


def kappa_cdf(x, n_taps: int):
    """CDF of the ratio of two i.i.d. unit-mean Gamma(``n_taps``) variates."""
    xb, L, i, logc = _kappa_terms(x, n_taps)
    log_terms = logc + i * np.log(xb) - (L + i) * np.log1p(xb)
    out = -np.expm1(logsumexp(log_terms, axis=-1))
    return out[()] if out.ndim == 0 else out


def kappa_pdf(x, n_taps: int):
    """Density of the ratio of two i.i.d. unit-mean Gamma(``n_taps``) variates.

    Differentiating the CDF sum term by term telescopes to the single term
    ``L C(2L-1, L) x**(L-1) / (1+x)**(2L)``, evaluated in log space. The
    term-by-term form cancels catastrophically for small ``x``.
    """
    xb, L, _, _ = _kappa_terms(x, n_taps)
    xb = xb[..., 0]
    log_norm = math.log(L) + gammaln(2 * L) - gammaln(L) - gammaln(L + 1)
    out = np.exp(log_norm + (L - 1) * np.log(xb) - 2 * L * np.log1p(xb))
    return out[()] if out.ndim == 0 else out


def diversity_factor(profile: DelayProfile) -> float:
    """Squared mean over variance of ``rho``: ``(sum E r_n)**2 / sum (E r_n)**2``."""
    taps = np.asarray(profile.taps if isinstance(profile, DelayProfile) else profile, dtype=float)
    return float(taps.sum() ** 2 / np.sum(taps**2))
