"""Data-driven choice of the cell width.

For every width on a candidate grid the scan is run with the width's own
confidence width ``eps`` and linking distance ``tau``; the width whose run
splits into two clusters at the smallest level wins. Ties go to the
smaller width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .connectivity import ComponentLabeling, link_radius, tau_components
from .errors import AllCandidatesFailed, DegenerateInterval, SampleTooSmall
from .histogram import Dataset, eps_adaptive, fit
from .partition import _normalize_box, build_partition
from .scan import TWO_CLUSTERS, ClusterOutput, HistogramFamily, ScanParams, run_scan

__all__ = [
    "AdaptiveParams",
    "DeltaRun",
    "AdaptiveOutput",
    "candidate_interval",
    "candidate_grid",
    "tau_for",
    "select",
]


@dataclass(frozen=True)
class AdaptiveParams:
    """Inputs of the selection.

    ``grid_override`` replaces the default candidate grid. ``grid_size``
    replaces the grid cardinality inside the ``eps`` formula; by default it
    is the number of candidates actually run.
    """

    C: float = 1.0
    gamma: float = 1.0
    varsigma: float = 1.0
    grid_override: tuple | None = None
    grid_size: int | None = None

    def __post_init__(self):
        if not self.C >= 1:
            raise ValueError(f"C must be >= 1, got {self.C}")
        if not (0 < self.gamma <= 1):
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not self.varsigma >= 1:
            raise ValueError(f"varsigma must be >= 1, got {self.varsigma}")
        if self.grid_override is not None:
            grid = tuple(float(v) for v in self.grid_override)
            if not grid:
                raise ValueError("grid_override must not be empty")
            object.__setattr__(self, "grid_override", grid)
        if self.grid_size is not None and self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")


@dataclass(frozen=True)
class DeltaRun:
    delta: float
    eps: float
    tau: float
    output: ClusterOutput

    @property
    def succeeded(self) -> bool:
        return self.output.status == TWO_CLUSTERS


@dataclass
class AdaptiveOutput:
    per_delta: list
    delta_star: float
    rho_star: float
    eps_sel: float
    tau_sel: float
    components: list = field(default_factory=list)
    grid_size: int = 0
    selected_index: int = -1

    @property
    def selected(self) -> DeltaRun:
        return self.per_delta[self.selected_index]


def candidate_interval(n: int, d: int) -> tuple:
    """Endpoints of the interval the candidate widths are drawn from."""
    if n < 16:
        raise SampleTooSmall(f"candidate widths need n >= 16, got {n}")
    lln = math.log(math.log(n))
    lo = (math.log(n) * lln ** 2 / n) ** (1.0 / d)
    hi = (1.0 / lln) ** (1.0 / d)
    return lo, hi


def candidate_grid(n: int, d: int) -> list:
    """Evenly spaced widths covering the candidate interval with step at most ``n**(-1/d)``.

    Both endpoints are included and the grid never has more than ``n`` points;
    if the step rule would need more, the grid is coarsened uniformly.
    """
    lo, hi = candidate_interval(n, d)
    if lo > hi:
        raise DegenerateInterval(f"candidate interval [{lo}, {hi}] is empty for n={n}, d={d}")
    if lo == hi:
        return [lo]
    step = n ** (-1.0 / d)
    points = min(n, math.ceil((hi - lo) / step) + 1)
    grid = np.linspace(lo, hi, max(points, 2))
    grid[0], grid[-1] = lo, hi
    return grid.tolist()


def tau_for(delta: float, n: int, gamma: float) -> float:
    """Linking distance ``delta**gamma * ln ln ln n`` (unit-box scale)."""
    if n <= 15:
        raise SampleTooSmall(f"ln ln ln n is not positive for n={n}")
    return delta ** gamma * math.log(math.log(math.log(n)))


class _MemoLabeler:
    """Caches tau-components by (partition, link radius, cell mask)."""

    def __init__(self):
        self._cache = {}

    def __call__(self, A, tau) -> ComponentLabeling:
        p = A.partition
        key = (p.cells_per_axis, link_radius(p, tau), A.mask.tobytes())
        hit = self._cache.get(key)
        if hit is None:
            hit = tau_components(A, tau)
            self._cache[key] = hit
        return hit


def select(dataset: Dataset, box, params: AdaptiveParams = AdaptiveParams()) -> AdaptiveOutput:
    """Run the scan for every candidate width and keep the smallest split level.

    ``tau`` is converted to domain units by the longest side of ``box``.
    Raises :class:`AllCandidatesFailed` when no run splits into exactly two
    clusters; the exception carries every per-width run.
    """
    box = _normalize_box(box)
    n, d = dataset.n, dataset.d
    if n < 16:
        raise SampleTooSmall(f"adaptive selection needs n >= 16, got {n}")
    if len(box) != d:
        raise ValueError(f"box has {len(box)} axes, data has {d}")
    grid = list(params.grid_override) if params.grid_override is not None else candidate_grid(n, d)
    grid_size = params.grid_size if params.grid_size is not None else len(grid)
    c_p = 2 ** d
    scale = max(b - a for a, b in box)
    families = {}
    labeler = _MemoLabeler()
    runs = []
    for delta in grid:
        p = build_partition(box, delta)
        fam = families.get(p.cells_per_axis)
        if fam is None:
            fam = families[p.cells_per_axis] = HistogramFamily(fit(dataset, p))
        eps = eps_adaptive(params.C, params.varsigma, delta, n, c_p, d, grid_size)
        tau = tau_for(delta, n, params.gamma) * scale
        out = run_scan(fam, ScanParams(eps, tau), labeler=labeler)
        runs.append(DeltaRun(delta, eps, tau, out))

    ok = [(r.output.rho_star_hat, r.delta, i) for i, r in enumerate(runs) if r.succeeded]
    if not ok:
        raise AllCandidatesFailed("no candidate width produced two clusters", runs)
    _, _, best = min(ok)
    win = runs[best]
    return AdaptiveOutput(
        per_delta=runs,
        delta_star=win.delta,
        rho_star=win.output.rho_star_hat,
        eps_sel=win.eps,
        tau_sel=win.tau,
        components=win.output.components,
        grid_size=grid_size,
        selected_index=best,
    )
