"""Empirical histograms, plug-in level sets and the uniform-deviation widths."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyData, InvalidSup, SampleTooSmall
from .partition import CellSet, PartitionSpec, cell_measure, locate_points

__all__ = [
    "Dataset",
    "EmpiricalHistogram",
    "ConfidenceInputs",
    "fit",
    "level_set",
    "eps_general",
    "eps_bounded",
    "eps_adaptive",
    "load_dataset",
    "save_dataset",
]


@dataclass(frozen=True)
class Dataset:
    """``n`` points in ``d`` dimensions, stored as an ``(n, d)`` float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-D array of shape (n, d)")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def load_dataset(path) -> Dataset:
    """Read one point per line, coordinates separated by commas."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise EmptyData(f"no points in {path}")
    return Dataset(np.array(rows, dtype=float))


def save_dataset(dataset: Dataset, path) -> None:
    np.savetxt(path, dataset.points, delimiter=",", fmt="%.17g")


@dataclass(frozen=True)
class ConfidenceInputs:
    varsigma: float = 1.0
    h_sup: float | None = None
    C: float = 1.0

    def __post_init__(self):
        if self.varsigma < 1:
            raise ValueError("varsigma must be >= 1")
        if self.C < 1:
            raise ValueError("C must be >= 1")
        if self.h_sup is not None and self.h_sup <= 0:
            raise InvalidSup("h_sup must be positive")


@dataclass(frozen=True)
class EmpiricalHistogram:
    partition: PartitionSpec
    counts: np.ndarray
    n: int
    values: np.ndarray

    @property
    def max_value(self) -> float:
        return float(self.values.max())

    def integral(self) -> float:
        return float(self.values.sum() * cell_measure(self.partition))


def fit(dataset: Dataset, partition: PartitionSpec) -> EmpiricalHistogram:
    """Histogram density: count of each cell over ``n`` times the cell measure."""
    if dataset.n == 0:
        raise EmptyData("cannot fit a histogram to an empty dataset")
    ids = locate_points(partition, dataset.points)
    counts = np.bincount(ids, minlength=partition.n_cells)
    values = counts / (dataset.n * cell_measure(partition))
    counts.flags.writeable = False
    values.flags.writeable = False
    return EmpiricalHistogram(partition, counts, dataset.n, values)


def level_set(hist: EmpiricalHistogram, rho: float) -> CellSet:
    """Cells whose histogram value is at least ``rho``."""
    if rho < 0:
        raise ValueError("rho must be non-negative")
    return CellSet(hist.partition, hist.values >= rho)


def _log_term(varsigma, c_p, d, delta, grid_size=1):
    return varsigma + math.log(2 * c_p * grid_size) - d * math.log(delta)


def eps_general(varsigma, delta, n, c_p, d) -> float:
    """Smallest width valid for arbitrary distributions."""
    E = _log_term(varsigma, c_p, d, delta)
    return c_p * math.sqrt(E / (2 * delta ** (2 * d) * n))


def eps_bounded(varsigma, delta, n, c_p, d, h_sup) -> float:
    """Smallest width valid when the density is bounded by ``h_sup``."""
    if h_sup is None or not h_sup > 0:
        raise InvalidSup(f"h_sup must be positive, got {h_sup}")
    E = _log_term(varsigma, c_p, d, delta)
    vol = delta ** d * n
    return math.sqrt(2 * c_p * (1 + h_sup) * E / vol) + 2 * c_p * E / (3 * vol)


def eps_adaptive(C, varsigma, delta, n, c_p, d, grid_size) -> float:
    """Width used by the data-driven selection over ``grid_size`` candidates.

    Requires ``n >= 16`` so that ``ln ln n`` is positive.
    """
    if n < 16:
        raise SampleTooSmall(f"adaptive width needs n >= 16, got {n}")
    if grid_size < 1:
        raise ValueError("grid_size must be >= 1")
    E = _log_term(varsigma, c_p, d, delta, grid_size)
    vol = delta ** d * n
    return C * math.sqrt(c_p * E * math.log(math.log(n)) / vol) + 2 * c_p * E / (3 * vol)
