"""Benchmark densities with closed-form level sets, clusters and exponents.

The 1-D family lives on ``[-3, 3]``::

    h(x) = rho* + c * ( |x|**theta          on |x| in [0, 1]
                      + 1                    on |x| in [1, 2]
                      + (3 - |x|)**beta      on |x| in [2, 3] )

It has a valley of depth ``rho*`` at the origin and two plateaus of height
``rho** = rho* + c``. Infinite exponents are the pointwise limits: the
valley (or the outer shoulders) become flat at ``rho*``.

The 2-D strip is the product of this density with the uniform density on
``[-1, 1]``; every density level is halved and every level set is the
1-D level set times ``[-1, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AboveTop, InvalidEps, InvalidLevel, NoFeasibleEps
from .histogram import Dataset
from .partition import CellSet, PartitionSpec

__all__ = [
    "ThetaBetaSpec",
    "Strip2DSpec",
    "GroundTruth",
    "Exponents",
    "MatchResult",
    "normalize",
    "density",
    "density2d",
    "evaluate",
    "cdf",
    "sample",
    "level_set_truth",
    "level_intervals",
    "tau_star_truth",
    "epsilon_star_truth",
    "sym_diff_measure",
    "match_clusters",
    "expected_exponents",
    "ground_truth",
    "flatness_measure",
    "interval_tube",
    "cells_meeting",
    "cells_inside",
    "make_spec",
]

HALF_WIDTH = 3.0


def normalize(theta, beta, rho_star) -> float:
    """Constant ``c`` making the 1-D density integrate to one."""
    if not (0.0 <= rho_star < 1.0 / 6.0):
        raise InvalidLevel(f"rho_star must lie in [0, 1/6), got {rho_star}")
    if not (theta > 0 and beta > 0):
        raise ValueError("theta and beta must be positive")
    return (1.0 - 6.0 * rho_star) / (2.0 / (theta + 1.0) + 2.0 + 2.0 / (beta + 1.0))


@dataclass(frozen=True)
class ThetaBetaSpec:
    theta: float
    beta: float
    rho_star: float

    def __post_init__(self):
        normalize(self.theta, self.beta, self.rho_star)

    @property
    def c(self) -> float:
        return normalize(self.theta, self.beta, self.rho_star)

    @property
    def rho_star_star(self) -> float:
        return self.rho_star + self.c

    base = property(lambda self: self)
    dim = 1
    scale = 1.0
    box = ((-HALF_WIDTH, HALF_WIDTH),)


@dataclass(frozen=True)
class Strip2DSpec:
    base: ThetaBetaSpec

    dim = 2
    scale = 0.5
    box = ((-HALF_WIDTH, HALF_WIDTH), (-1.0, 1.0))

    @property
    def c(self) -> float:
        return self.scale * self.base.c

    @property
    def rho_star(self) -> float:
        return self.scale * self.base.rho_star

    @property
    def rho_star_star(self) -> float:
        return self.rho_star + self.c


def make_spec(theta, beta, rho_star, dim=1):
    base = ThetaBetaSpec(float(theta), float(beta), float(rho_star))
    if dim == 1:
        return base
    if dim == 2:
        return Strip2DSpec(base)
    raise ValueError(f"dim must be 1 or 2, got {dim}")


def density(spec: ThetaBetaSpec, x):
    """1-D density, vectorized; zero outside ``[-3, 3]``."""
    spec = spec.base
    t = np.abs(np.asarray(x, dtype=float))
    c = spec.c
    with np.errstate(over="ignore", invalid="ignore"):
        shape = np.where(
            t <= 1.0, t ** spec.theta,
            np.where(t <= 2.0, 1.0, np.clip(3.0 - t, 0.0, None) ** spec.beta))
    out = spec.rho_star + c * shape
    return np.where(t <= HALF_WIDTH, out, 0.0)


def density2d(spec: Strip2DSpec, xy):
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    inside = np.abs(xy[:, 1]) <= 1.0
    return np.where(inside, spec.scale * density(spec.base, xy[:, 0]), 0.0)


def evaluate(spec, points):
    """Density of either spec at an ``(n, d)`` array of points."""
    pts = np.asarray(points, dtype=float)
    if spec.dim == 1:
        return density(spec, pts.reshape(-1))
    return density2d(spec, pts.reshape(-1, 2))


def _half_mass(spec: ThetaBetaSpec, t):
    """Mass of ``[0, t]`` under the 1-D density, ``t`` in ``[0, 3]``."""
    th, be, c, r = spec.theta, spec.beta, spec.c, spec.rho_star
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        valley = 1.0 / (th + 1.0)
        g = np.where(
            t <= 1.0, np.minimum(t, 1.0) ** (th + 1.0) / (th + 1.0),
            np.where(t <= 2.0, valley + (t - 1.0),
                     valley + 1.0 + (1.0 - np.clip(3.0 - t, 0.0, 1.0) ** (be + 1.0)) / (be + 1.0)))
    return r * t + c * g


def cdf(spec, x):
    """Distribution function of the 1-D density (of the x-marginal for the strip)."""
    spec = spec.base
    x = np.asarray(x, dtype=float)
    t = np.clip(np.abs(x), 0.0, HALF_WIDTH)
    return np.clip(0.5 + np.sign(x) * _half_mass(spec, t), 0.0, 1.0)


def sample(spec, n: int, seed) -> Dataset:
    """Draw ``n`` i.i.d. points by inverting the closed-form distribution function.

    The inversion is a vectorized bisection on ``|x|`` down to 1e-12.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    base = spec.base
    u = rng.random(n) - 0.5
    target = np.abs(u)
    lo = np.zeros(n)
    hi = np.full(n, HALF_WIDTH)
    iters = math.ceil(math.log2(HALF_WIDTH / 1e-12))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = _half_mass(base, mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = np.sign(u) * 0.5 * (lo + hi)
    if spec.dim == 1:
        return Dataset(x.reshape(-1, 1))
    y = rng.uniform(-1.0, 1.0, n)
    return Dataset(np.column_stack([x, y]))


def level_intervals(spec, rho) -> list:
    """x-intervals of the level set at ``rho``; empty above the top level."""
    base = spec.base
    c = spec.c
    if rho <= spec.rho_star:
        return [(-HALF_WIDTH, HALF_WIDTH)]
    if rho > spec.rho_star_star:
        return []
    s = min(1.0, (rho - spec.rho_star) / c)
    x1 = s ** (1.0 / base.theta)
    x2 = HALF_WIDTH - s ** (1.0 / base.beta)
    return [(-x2, -x1), (x1, x2)]


def _lift(spec, intervals) -> list:
    """Turn x-intervals into boxes of the spec's domain."""
    rest = tuple(spec.box[1:])
    return [((a, b),) + rest for a, b in intervals]


def level_set_truth(spec, rho) -> list:
    """Closed level set at ``rho`` as a list of boxes (tuples of per-axis intervals)."""
    if rho > spec.rho_star_star:
        raise AboveTop(f"rho={rho} exceeds the top level {spec.rho_star_star}")
    return _lift(spec, level_intervals(spec, rho))


def tau_star_truth(spec, eps) -> float:
    """One third of the gap between the two components at level ``rho* + eps``."""
    if not (0.0 < eps <= spec.c * (1 + 1e-12)):
        raise InvalidEps(f"eps must lie in (0, {spec.c}], got {eps}")
    s = min(1.0, eps / spec.c)
    return (2.0 / 3.0) * s ** (1.0 / spec.base.theta)


def epsilon_star_truth(spec, eps, tau) -> float:
    """``eps`` plus the smallest level offset whose separation reaches ``tau``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    theta = spec.base.theta
    if math.isinf(theta):
        if tau > 2.0 / 3.0:
            raise NoFeasibleEps(f"tau={tau} exceeds the constant separation 2/3")
        return eps
    needed = spec.c * (1.5 * tau) ** theta
    if needed > spec.c * (1 + 1e-12):
        raise NoFeasibleEps(f"tau={tau} exceeds the separation at the top level")
    return eps + needed


def _box_volume(boxes, domain) -> float:
    total = 0.0
    for box in boxes:
        vol = 1.0
        for (a, b), (lo, hi) in zip(box, domain):
            vol *= max(0.0, min(b, hi) - max(a, lo))
        total += vol
    return total


def _overlaps(p: PartitionSpec, boxes) -> np.ndarray:
    """Per-cell overlap volume with a union of disjoint boxes."""
    lo, hi = p.cell_bounds()
    out = np.zeros(p.n_cells)
    for box in boxes:
        vol = np.ones(p.n_cells)
        for axis, (a, b) in enumerate(box):
            vol *= np.clip(np.minimum(hi[:, axis], b) - np.maximum(lo[:, axis], a), 0.0, None)
        out += vol
    return out


def sym_diff_measure(estimate: CellSet, truth) -> float:
    """Lebesgue measure of the symmetric difference of a cell set and a union of boxes."""
    p = estimate.partition
    cell_vol = float(np.prod(p.sides))
    inter = float(_overlaps(p, truth)[estimate.mask].sum())
    value = len(estimate) * cell_vol + _box_volume(truth, p.box) - 2.0 * inter
    return max(0.0, value)


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple
    costs: tuple
    total: float
    extra: tuple = ()


def match_clusters(estimates, truths) -> MatchResult:
    """Order at most two estimates against two true clusters to minimize total error.

    ``pairs[i]`` is the estimate index assigned to truth ``i`` (``None`` for an
    empty estimate). Estimates beyond the two largest are charged with their
    full measure and listed in ``extra``.
    """
    estimates = list(estimates)
    truths = list(truths)
    if len(truths) != 2:
        raise ValueError("exactly two true clusters are required")
    extra = ()
    extra_cost = 0.0
    if len(estimates) > 2:
        order = sorted(range(len(estimates)), key=lambda k: (-len(estimates[k]), k))
        keep, rest = sorted(order[:2]), order[2:]
        extra = tuple(sorted(rest))
        extra_cost = sum(estimates[k].measure() for k in rest)
    else:
        keep = list(range(len(estimates)))
    slots = keep + [None] * (2 - len(keep))

    def cost(est_idx, truth):
        if est_idx is None:
            return _box_volume(truth, _domain_of(estimates, truth))
        return sym_diff_measure(estimates[est_idx], truth)

    best = None
    for perm in ((slots[0], slots[1]), (slots[1], slots[0])):
        costs = tuple(cost(e, t) for e, t in zip(perm, truths))
        total = sum(costs) + extra_cost
        if best is None or total < best.total:
            best = MatchResult(perm, costs, total, extra)
    return best


def _domain_of(estimates, truth):
    if estimates:
        return estimates[0].partition.box
    return tuple((-math.inf, math.inf) for _ in truth[0]) if truth else ()


def interval_tube(intervals, radius, sign, domain=(-HALF_WIDTH, HALF_WIDTH)) -> list:
    """Continuum tube of a union of disjoint closed intervals inside ``domain``.

    ``sign=+1`` adds a ``radius``-tube, ``sign=-1`` removes one. Endpoints on
    the domain boundary never move since the complement does not reach them.
    """
    lo_dom, hi_dom = domain
    out = []
    if sign > 0:
        for a, b in sorted(intervals):
            a, b = max(lo_dom, a - radius), min(hi_dom, b + radius)
            if out and a <= out[-1][1]:
                out[-1] = (out[-1][0], max(out[-1][1], b))
            else:
                out.append((a, b))
        return out
    for a, b in sorted(intervals):
        a2 = a if a <= lo_dom else a + radius
        b2 = b if b >= hi_dom else b - radius
        if a2 <= b2:
            out.append((a2, b2))
    return out


def cells_meeting(p: PartitionSpec, intervals, tol=1e-12) -> CellSet:
    """Cells whose interior meets one of the x-intervals."""
    lo, hi = p.cell_bounds()
    mask = np.zeros(p.n_cells, dtype=bool)
    for a, b in intervals:
        mask |= (lo[:, 0] < b - tol) & (hi[:, 0] > a + tol)
    return CellSet(p, mask)


def cells_inside(p: PartitionSpec, intervals, tol=1e-12) -> CellSet:
    """Cells contained in the union of the x-intervals."""
    lo, hi = p.cell_bounds()
    mask = np.zeros(p.n_cells, dtype=bool)
    for a, b in intervals:
        mask |= (lo[:, 0] >= a - tol) & (hi[:, 0] <= b + tol)
    return CellSet(p, mask)


def flatness_measure(spec, s) -> float:
    """Measure of ``{0 < h - rho* < s}``."""
    base = spec.base
    if spec.dim == 2:
        return 2.0 * flatness_measure(base, s / spec.scale)
    if s <= 0:
        return 0.0
    u = s / base.c
    total = 2.0 if u > 1.0 else 0.0
    if not math.isinf(base.theta):
        total += 2.0 * min(1.0, u ** (1.0 / base.theta))
    if not math.isinf(base.beta):
        total += 2.0 * min(1.0, u ** (1.0 / base.beta))
    return total


@dataclass(frozen=True)
class GroundTruth:
    spec: object
    rho_star: float
    rho_star_star: float
    h_sup: float
    clusters: tuple
    kappa: float
    gamma: float
    vartheta: float
    alpha: float
    c_sep_lower: float
    c_sep_upper: float
    c_flat: float
    c_bound: float
    c_thick: float
    delta_thick: float

    @property
    def dim(self) -> int:
        return self.spec.dim

    def psi(self, delta: float) -> float:
        """Thickness function ``3 * c_thick * delta**gamma``."""
        return 3.0 * self.c_thick * delta ** self.gamma

    def tau_star_fn(self, eps: float) -> float:
        return tau_star_truth(self.spec, eps)

    def epsilon_star(self, eps: float, tau: float) -> float:
        return epsilon_star_truth(self.spec, eps, tau)


def ground_truth(spec) -> GroundTruth:
    base = spec.base
    theta, beta = base.theta, base.beta
    finite = [1.0 / e for e in (theta, beta) if not math.isinf(e)]
    vartheta = min(finite) if finite else math.inf
    top_measure = 2.0 + sum(2.0 for e in (theta, beta) if not math.isinf(e))
    c_flat = top_measure ** (1.0 / vartheta) / base.c
    c_sep = (2.0 / 3.0) * spec.c ** (-1.0 / theta)
    x1 = 1.0 if math.isinf(theta) else 0.0
    x2 = 2.0 if math.isinf(beta) else HALF_WIDTH
    clusters = (tuple(_lift(spec, [(-x2, -x1)])), tuple(_lift(spec, [(x1, x2)])))
    c_bound = 4.0
    if spec.dim == 2:
        c_flat = 2.0 ** (1.0 + 1.0 / vartheta) * c_flat
        c_bound = 8.0
    return GroundTruth(
        spec=spec,
        rho_star=spec.rho_star,
        rho_star_star=spec.rho_star_star,
        h_sup=spec.rho_star_star,
        clusters=clusters,
        kappa=theta,
        gamma=1.0,
        vartheta=vartheta,
        alpha=1.0,
        c_sep_lower=c_sep,
        c_sep_upper=c_sep,
        c_flat=c_flat,
        c_bound=c_bound,
        c_thick=1.0,
        delta_thick=0.5,
    )


@dataclass(frozen=True)
class Exponents:
    rho_rate: float | None
    cluster_rate: float | None
    varrho: float | None
    flags: tuple = ()


def expected_exponents(truth: GroundTruth, d: int | None = None) -> Exponents:
    """Polynomial rate exponents for the split level and for the clusters.

    Infinite separation or flatness exponents only admit logarithmic
    statements; those come back as ``None`` with a flag.
    """
    d = truth.dim if d is None else d
    kappa, gamma, vt, alpha = truth.kappa, truth.gamma, truth.vartheta, truth.alpha
    flags = []
    if math.isinf(kappa):
        rho_rate = None
        flags.append("kappa_infinite: eps_n ~ (ln n * ln ln n / n)^(1/2)")
    else:
        rho_rate = gamma * kappa / (2 * gamma * kappa + d)
    if math.isinf(kappa) or math.isinf(vt):
        varrho = None
        cluster_rate = None
        flags.append("vartheta_or_kappa_infinite: cluster rate not polynomial in closed form")
    else:
        varrho = min(alpha, vt * gamma * kappa)
        cluster_rate = vt * varrho / (2 * varrho + vt * d)
    return Exponents(rho_rate, cluster_rate, varrho, tuple(flags))
