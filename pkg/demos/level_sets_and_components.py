"""
Histogram level sets and their tau-components
=============================================

Draw a sample from the bimodal test density, fit a histogram and look at how
the level sets break apart as the level rises.
"""

import numpy as np

from histclust import build_partition, fit, level_set, tau_components
from histclust.synthetic import level_intervals, make_spec, sample

###############################################################################
# The density has a valley at level 0.1 around the origin and two plateaus
# on [-2, -1] and [1, 2].
spec = make_spec(theta=2, beta=1, rho_star=0.1)
print("normalising constant c =", spec.c)
print("valley level", spec.rho_star, "plateau level", spec.rho_star_star)

data = sample(spec, 20_000, seed=1)
partition = build_partition(spec.box, 0.05)
hist = fit(data, partition)
print(partition.cells_per_axis, "cells of width", partition.sides[0])

###############################################################################
# Walk up the levels. Below the valley there is one component, above it two.
for rho in np.linspace(0.0, spec.rho_star_star, 8):
    lab = tau_components(level_set(hist, rho), tau=0.3)
    truth = level_intervals(spec, rho)
    print(f"rho={rho:.3f}  components={len(lab)}  true intervals={len(truth)}")
