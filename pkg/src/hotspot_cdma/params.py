"""System parameters for the two-tier uplink model, with the default parameter set."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

from .channel import BasePropagation


@dataclass(frozen=True)
class SystemParams:
    """Two-tier uplink parameter set.

    Lengths are meters, ``sinr_db`` and the shadow deviations are dB. Powers
    are normalized by the receiver noise ``eta*W``; the terminal power cap
    only enters through the dimensionless ``F``.
    """

    processing_gain: float = 128.0
    sinr_db: float = 7.0
    delta: float = 1.0
    gain_ratio: float = 10.0
    breakpoint: float = 100.0
    sigma_macro: float = 8.0
    sigma_micro: float = 4.0
    h_macro: float = 60.0
    h_micro: float = 9.0
    h_mobile: float = 1.5
    region_side: float = 1000.0
    hotspot_side: float = 200.0
    hotspot_distance: float = 300.0
    d_max: float | None = None
    F: float = math.inf
    outage: float = 0.05

    def __post_init__(self):
        if self.processing_gain <= 0:
            raise ValueError("processing_gain must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.gain_ratio <= 0:
            raise ValueError("gain_ratio must be positive")
        if not self.F > 0:
            raise ValueError("F must be positive (or inf)")
        if not 0 < self.outage <= 1:
            raise ValueError("outage target must lie in (0, 1]")
        if not 0 < self.hotspot_side < self.region_side:
            raise ValueError("hotspot_side must be positive and smaller than region_side")
        half = self.region_side / 2
        if self.hotspot_distance + self.hotspot_side / 2 > half:
            raise ValueError("hotspot square must lie inside the region")
        if self.d_max is not None and self.d_max <= 0:
            raise ValueError("d_max must be positive")
        if min(self.h_macro, self.h_micro) <= self.h_mobile:
            raise ValueError("base antennas must be above the terminal height")

    @property
    def sinr_linear(self) -> float:
        return 10.0 ** (self.sinr_db / 10.0)

    @property
    def pole_capacity(self) -> float:
        """``K = 1 + (W/R)/Gamma``."""
        return 1.0 + self.processing_gain / self.sinr_linear

    @property
    def max_distance(self) -> float:
        """Normalization distance ``d_max``; defaults to the macrocell radius ``S/2``."""
        if self.d_max is not None:
            return self.d_max
        return self.region_side / 2.0

    @property
    def macro(self) -> BasePropagation:
        return BasePropagation(self.breakpoint, self.gain_ratio, self.sigma_macro, self.h_macro)

    @property
    def micro(self) -> BasePropagation:
        return BasePropagation(self.breakpoint, 1.0, self.sigma_micro, self.h_micro)

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


TABLE1 = SystemParams()
