"""Finitely dispersive channels.

With L equal-power Rayleigh paths each cross-tier term is scaled by a ratio
of fading gains whose mean is L/(L-1), so capacity rises toward the
infinitely dispersive value as L grows. Realistic profiles map onto the
uniform curve through their diversity factor.

Run:  python demos/03_dispersion.py   (under a minute)
"""
from hotspot_cdma import TABLE1, DelayProfile, builtin_profile, capacity_search, capacity_uniform, estimate_mean_stats

K = TABLE1.pole_capacity
v = estimate_mean_stats(TABLE1).v_product
budget = dict(placements=100, fading_draws=100, n_start=int(K))

print("L_p  sim  N_u(L_p)")
for L in (2, 3, 4, 6, 8):
    n = capacity_search(TABLE1, DelayProfile.uniform(L), **budget).n_star
    print(f"{L:3d}  {n:3d}  {capacity_uniform(K, v, L):8.1f}")
print(f"inf  {capacity_search(TABLE1, **budget).n_star:3d}")

print("\nprofile   DF    sim")
for name in ("ra", "ht", "tu"):
    prof = builtin_profile(name)
    n = capacity_search(TABLE1, prof, **budget).n_star
    print(f"{name:7s}  {prof.diversity_factor:.2f}  {n:4d}")
