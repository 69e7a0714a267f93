"""
Estimating the split level with known exponents
================================================

The scan walks up the levels in steps of eps and stops just after the level
set stops being a single surviving component. Here eps, the cell width and
tau are taken from the rate sequences that use the true exponents.
"""

from histclust import HistogramFamily, ScanParams, build_partition, fit, run_scan
from histclust.experiments import oracle_parameters
from histclust.synthetic import ground_truth, make_spec, match_clusters, sample

spec = make_spec(2, 1, 0.1)
truth = ground_truth(spec)

for n in (2 ** 12, 2 ** 14, 2 ** 16):
    delta, eps, tau = oracle_parameters(truth, n)
    hist = fit(sample(spec, n, seed=0), build_partition(spec.box, delta))
    out = run_scan(HistogramFamily(hist), ScanParams(eps, tau))
    match = match_clusters(out.components, truth.clusters)
    print(f"n={n:6d} delta={delta:.3f} eps={eps:.4f} tau={tau:.3f} -> {out.status}, "
          f"rho_err={out.rho_star_hat - truth.rho_star:.4f}, symdiff={match.total:.3f}")

###############################################################################
# The trace records every inspected level: number of components and how many
# of them reach two steps higher.
for step in out.trace[:6]:
    print(step)
