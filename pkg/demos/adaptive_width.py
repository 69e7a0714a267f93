"""
Choosing the cell width from the data
=====================================

Run the scan for every candidate width and keep the one whose run splits at
the smallest level. Only the sample is used: no exponents, no constants of
the true density.
"""

import numpy as np

from histclust import AdaptiveParams, Dataset, candidate_interval, select

###############################################################################
# Two well separated uniform blocks on the unit interval.
rng = np.random.default_rng(0)
n = 20_000
x = np.where(rng.random(n) < 0.5, rng.uniform(0.1, 0.3, n), rng.uniform(0.6, 0.9, n))
data = Dataset(x)

print("default candidate interval:", candidate_interval(n, 1))

# A short explicit grid keeps the demo quick.
grid = tuple(np.linspace(0.02, 0.3, 15))
out = select(data, [(0.0, 1.0)], AdaptiveParams(grid_override=grid))
for run in out.per_delta:
    print(f"delta={run.delta:.3f} eps={run.eps:.4f} -> {run.output.status:12s} level {run.output.rho_star_hat:.4f}")
print("selected delta", out.delta_star, "level", out.rho_star)
