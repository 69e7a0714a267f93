"""Histogram-based estimation of the first split of density level sets."""

from . import adaptive, connectivity, errors, experiments, histogram, partition, scan, synthetic
from .adaptive import AdaptiveOutput, AdaptiveParams, candidate_grid, candidate_interval, select, tau_for
from .connectivity import (
    compare_partitions,
    compose,
    connected_components,
    dilate,
    erode,
    tau_components,
    tau_star,
)
from .histogram import (
    ConfidenceInputs,
    Dataset,
    EmpiricalHistogram,
    eps_adaptive,
    eps_bounded,
    eps_general,
    fit,
    level_set,
)
from .partition import CellSet, PartitionSpec, build_partition, cell_distance, locate
from .scan import ClusterOutput, HistogramFamily, ScanParams, run_scan
from .synthetic import ThetaBetaSpec, Strip2DSpec, ground_truth, make_spec, sample

__version__ = "0.1.0"
