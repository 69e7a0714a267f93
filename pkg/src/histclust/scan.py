"""Level scan that detects the first persistent split of a decreasing family of sets.

Starting at level 0 the scan moves up in steps of ``eps``. At every visited
level it keeps the tau-connected components of the level set that still
meet the level set ``2 * eps`` higher, and it stops as soon as the number of
kept components differs from one. The returned level lies ``3 * eps`` above
the last inspected level: one step from the loop and two more afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .connectivity import tau_components
from .errors import InvalidFamily, ScanExhausted
from .histogram import EmpiricalHistogram, level_set
from .partition import CellSet

__all__ = [
    "ScanParams",
    "ScanStep",
    "ClusterOutput",
    "HistogramFamily",
    "surviving_components",
    "run_scan",
    "TWO_CLUSTERS",
    "NO_SURVIVOR",
    "SINGLE_CLUSTER",
    "MULTI_SPLIT",
]

TWO_CLUSTERS = "TwoClusters"
NO_SURVIVOR = "NoSurvivor"
SINGLE_CLUSTER = "SingleCluster"
MULTI_SPLIT = "MultiSplit"


@dataclass(frozen=True)
class ScanParams:
    eps: float
    tau: float
    rho_max: float | None = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.rho_max is not None and self.rho_max < self.eps:
            raise ValueError("rho_max must be at least eps")


@dataclass(frozen=True)
class ScanStep:
    rho: float
    n_components: int
    n_survivors: int


@dataclass
class ClusterOutput:
    rho_star_hat: float
    components: list
    status: str
    trace: list = field(default_factory=list)
    eps: float = math.nan
    tau: float = math.nan

    @property
    def n_components(self) -> int:
        return len(self.components)


class HistogramFamily:
    """The plug-in family ``rho -> {h >= rho}`` of a fitted histogram."""

    def __init__(self, hist: EmpiricalHistogram):
        self.hist = hist
        self.partition = hist.partition

    @property
    def max_value(self) -> float:
        return self.hist.max_value

    def __call__(self, rho: float) -> CellSet:
        return level_set(self.hist, rho)


def surviving_components(family, rho: float, eps: float, tau: float) -> list:
    """tau-components of ``family(rho)`` that meet ``family(rho + 2 * eps)``."""
    return _survivors(family(rho), family(rho + 2 * eps), tau)[1]


def _survivors(current: CellSet, upper: CellSet, tau: float, labeler=None):
    if not upper.issubset(current):
        raise InvalidFamily("family is not decreasing in rho")
    if not current:
        return 0, []
    comps = (labeler or tau_components)(current, tau).components
    if not upper:
        return len(comps), []
    return len(comps), [c for c in comps if c.intersects(upper)]


def run_scan(family, params: ScanParams, labeler=None) -> ClusterOutput:
    """Scan ``family`` upward and return the split level and its components.

    ``family`` maps a level to a :class:`CellSet` and must be decreasing.
    When ``params.rho_max`` is ``None`` the ceiling is the family's
    ``max_value`` plus ``3 * eps`` (infinite if the family has none).
    ``labeler`` replaces :func:`tau_components`, e.g. by a memoized version.
    """
    eps, tau = params.eps, params.tau
    rho_max = params.rho_max
    if rho_max is None:
        top = getattr(family, "max_value", math.inf)
        rho_max = top + 3 * eps
    cache = {}

    def level(k):
        if k not in cache:
            cache[k] = family(k * eps)
        return cache[k]

    trace = []
    k = 0
    while True:
        rho = k * eps
        if rho > rho_max:
            raise ScanExhausted(f"scan passed rho_max={rho_max} without terminating", trace)
        n_comp, surv = _survivors(level(k), level(k + 2), tau, labeler)
        trace.append(ScanStep(rho, n_comp, len(surv)))
        k += 1
        if len(surv) != 1:
            break
    k += 2
    n_comp, surv = _survivors(level(k), level(k + 2), tau, labeler)
    trace.append(ScanStep(k * eps, n_comp, len(surv)))
    m = len(surv)
    if m == 2:
        status = TWO_CLUSTERS
    elif m == 0:
        status = NO_SURVIVOR
    elif m == 1:
        status = SINGLE_CLUSTER
    else:
        status = MULTI_SPLIT
    return ClusterOutput(k * eps, surv, status, trace, eps, tau)
