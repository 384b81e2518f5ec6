"""Two-cell capacity as the terminal power cap tightens.

F bundles the power cap and the coverage radius into one number. Above
roughly F = 1 capacity behaves as if power were unlimited; below it,
capacity falls off quickly. Simulation and the mean-method approximation
are shown side by side.

Run:  python demos/02_capacity_vs_power.py   (under a minute)
"""
import math

from hotspot_cdma import TABLE1, capacity_analytic, capacity_infinite, capacity_search, estimate_mean_stats

K = TABLE1.pole_capacity
stats = estimate_mean_stats(TABLE1, samples=100_000, seed=0)
print(f"K = {K:.3f}, p_macro = {stats.p:.3f}, v_M v_mu = {stats.v_product:.4f}")
print(f"mean-interference estimate 2K/(1+sqrt(v)) = {capacity_infinite(K, stats.v_product):.1f}\n")

print("    F   sim  analytic")
for F in (0.1, 0.2, 0.3, 0.5, 1.0, 3.0, 10.0, math.inf):
    params = TABLE1.with_(F=F)
    sim = capacity_search(params, placements=200, n_start=int(K)).n_star
    ana = capacity_analytic(stats, params, n_start=int(K)).n_star
    print(f"{F:5g}  {sim:4d}  {ana:8d}")

# Heavier shadowing costs capacity mainly when power is limited
print("\n(sigma_M, sigma_mu)  F=0.5  F=inf")
for sm, su in ((4, 2), (8, 4), (12, 6)):
    row = [capacity_search(TABLE1.with_(F=F, sigma_macro=sm, sigma_micro=su), placements=200,
                           n_start=int(K)).n_star for F in (0.5, math.inf)]
    print(f"({sm:2d}, {su})            {row[0]:5d}  {row[1]:5d}")
