"""
A small convergence-rate study
==============================

Repeat the oracle-parameter run over a grid of sample sizes and fit the
log-log slope of the median errors. The full-size study behind the
acceptance suite uses n = 2**12 .. 2**18 and 50 replications; this one is
shrunk to run in a few seconds.
"""

from histclust.experiments import ExperimentConfig, rows_to_csv, run_rates

config = ExperimentConfig(mode="rates", n_grid=(2 ** 12, 2 ** 13, 2 ** 14, 2 ** 15), reps=8, seed=0)
report = run_rates(config, strict=False)

print("expected exponents:", report.expected)
for name, fit in report.fitted.items():
    print(name, fit)
for name, medians in report.medians.items():
    print(name, [(n, round(v, 4)) for n, v in medians])

###############################################################################
# The rows are also available as CSV for external plotting.
print(rows_to_csv(report.rows[:5]))
