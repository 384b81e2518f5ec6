"""Macrocells with many embedded hotspots.

A single macrocell is split into a 5x5 grid. L of the 24 outer squares get a
microcell and carry a share of the traffic. Capacity grows roughly linearly
in L, reported as mean and spread over random hotspot selections.

Run:  python demos/04_multicell.py   (under a minute)
"""
import numpy as np

from hotspot_cdma import TABLE1, capacity_multicell_analytic, estimate_mean_stats, multicell_capacity_mc
from hotspot_cdma.multicell import MulticellLayout, random_layout

K = TABLE1.pole_capacity
v = estimate_mean_stats(TABLE1).v_product

lay = random_layout(TABLE1, 1, 5, 4, np.random.default_rng(2))
print("macro site:", lay.macro_sites[0], " hotspot centers:\n", lay.micro_sites)

print("\n L   mean N*  spread  closed form")
for L in (0, 1, 2, 4, 8, 12):
    res = multicell_capacity_mc(TABLE1, 1, 5, L, selections=4, placements=60)
    ref = capacity_multicell_analytic(K, v, L, 1)
    print(f"{L:2d}  {res.mean:8.1f}  {res.std:6.1f}  {ref:11.1f}")

# one hotspot on the two-cell geometry, for comparison with demo 02
two = MulticellLayout.two_cell(TABLE1)
print("\ntwo-cell layout sites:", two.sites.tolist())
