"""Propagation and multipath primitives.

Walks through the normalized dual-slope gain, the RAKE output gain rho for
uniform and shipped delay profiles, and the distribution of the ratio of two
independent rho values.

Run:  python demos/01_channel_and_profiles.py
"""
import numpy as np

from hotspot_cdma import TABLE1, DelayProfile, builtin_profile, kappa_cdf, sample_rho
from hotspot_cdma.channel import path_gain_normalized

p = TABLE1
d_max = p.max_distance

# Gain falls as d^-2 inside the breakpoint and d^-4 beyond it.
# It is normalized so that T' = 1 at d_max.
d = np.array([20.0, 50.0, 100.0, 200.0, d_max])
print("d [m]   T'_micro")
for di, g in zip(d, path_gain_normalized(p.micro, d, 0.0, d_max)):
    print(f"{di:6.0f}  {g:10.4g}")

# Diversity factor: squared mean over variance of rho
print("\nprofile  taps  DF")
for name in ("ra", "ht", "tu"):
    prof = builtin_profile(name)
    print(f"{name:7s}  {prof.n_taps:4d}  {prof.diversity_factor:.3f}")
print(f"uniform  {4:4d}  {DelayProfile.uniform(4).diversity_factor:.3f}")

# rho has unit mean; its spread shrinks as the diversity factor grows
rng = np.random.default_rng(0)
for name in ("ra", "tu"):
    rho = sample_rho(builtin_profile(name), rng, 200_000)
    print(f"{name}: mean {rho.mean():.3f}  var {rho.var():.3f}  1/DF {1 / builtin_profile(name).diversity_factor:.3f}")

# Ratio of macro and micro fading gains; its median is 1 for every L
x = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
print("\nx      " + "  ".join(f"L={L:<4d}" for L in (1, 2, 4, 8)))
for xi in x:
    print(f"{xi:5.2f}  " + "  ".join(f"{kappa_cdf(xi, L):.4f}" for L in (1, 2, 4, 8)))

# compare with sampled ratios for L=2
r = sample_rho(DelayProfile.uniform(2), rng, 10**6) / sample_rho(DelayProfile.uniform(2), rng, 10**6)
print("\nempirical P[kappa <= x], L=2:", np.round([(r <= xi).mean() for xi in x], 4))
