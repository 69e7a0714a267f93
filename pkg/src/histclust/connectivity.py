"""tau-connected components, tube operators and partition comparison on cell sets.

All geometry is exact in index space. Two closed cells with index offset
``k`` along axis ``a`` are ``sides[a] * max(0, |k| - 1)`` apart along that
axis, and their sup-norm distance is the maximum over axes. Linking under
``distance < tau`` is therefore a box neighbourhood in index space whose
half-width per axis is the largest ``k`` with ``sides[a] * (k - 1) < tau``.

Components are labelled on a grid upsampled by two: every member cell sits
on an even node, is grown by a box of that half-width, and the grown union
is labelled with full (3**d) connectivity. Two grown boxes touch exactly
when the original offsets are within the link radius on every axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import EmptySet, NotNested
from .partition import CellSet, PartitionSpec

__all__ = [
    "ComponentLabeling",
    "CrmResult",
    "tau_components",
    "connected_components",
    "tau_star",
    "dilate",
    "erode",
    "compare_partitions",
    "compose",
    "link_radius",
    "tube_radius",
]


@dataclass(frozen=True)
class ComponentLabeling:
    """Components of ``source``; ``labels[k]`` belongs to ``source.members[k]``."""

    source: CellSet
    labels: np.ndarray
    components: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class CrmResult:
    comparable: bool
    map: tuple | None
    n_target: int = 0
    injective: bool = False
    surjective: bool = False
    bijective: bool = False

    @property
    def persistent(self) -> bool:
        return self.bijective


def _largest_k(side: float, limit: float, strict: bool, cap: int) -> int:
    """Largest integer ``k >= 1`` (at most ``cap``) with ``side * (k - 1)`` below ``limit``."""

    def ok(k):
        gap = side * (k - 1)
        return gap < limit if strict else gap <= limit

    if math.isinf(limit):
        return cap
    k = min(cap, max(1, int(math.floor(limit / side)) + 1))
    while k > 1 and not ok(k):
        k -= 1
    while k < cap and ok(k + 1):
        k += 1
    return k


def link_radius(p: PartitionSpec, tau: float) -> tuple:
    """Per-axis index radius linking cells at distance ``< tau``."""
    return tuple(_largest_k(s, tau, True, p.cells_per_axis) for s in p.sides)


def tube_radius(p: PartitionSpec, delta: float) -> tuple:
    """Per-axis index radius reaching cells at distance ``<= delta``."""
    return tuple(_largest_k(s, delta, False, p.cells_per_axis) for s in p.sides)


def _labeling(A: CellSet, radius: tuple) -> ComponentLabeling:
    p = A.partition
    members = A.members
    if members.size == 0:
        return ComponentLabeling(A, np.zeros(0, dtype=np.int64), [])
    grid = A.grid
    structure = np.ones((3,) * p.d, dtype=bool)
    if all(r == 1 for r in radius):
        lab, _ = ndimage.label(grid, structure=structure)
        raw = lab.reshape(-1)[members]
    else:
        up_shape = tuple(2 * m - 1 for m in grid.shape)
        up = np.zeros(up_shape, dtype=np.uint8)
        up[(slice(None, None, 2),) * p.d] = grid
        grown = ndimage.maximum_filter(up, size=tuple(2 * r + 1 for r in radius), mode="constant", cval=0)
        lab, _ = ndimage.label(grown, structure=structure)
        raw = lab[(slice(None, None, 2),) * p.d].reshape(-1)[members]
    # relabel by smallest member id; members are already sorted
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    labels = rank[inverse]
    components = []
    for k in range(order.size):
        mask = np.zeros(p.n_cells, dtype=bool)
        mask[members[labels == k]] = True
        components.append(CellSet(p, mask))
    return ComponentLabeling(A, labels, components)


def tau_components(A: CellSet, tau: float) -> ComponentLabeling:
    """tau-connected components of the union of the closed cells in ``A``.

    Cells are chained when their distance is strictly below ``tau``.
    Components are ordered by their smallest member id.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return _labeling(A, link_radius(A.partition, tau))


def connected_components(A: CellSet) -> ComponentLabeling:
    """Topological components: cells are linked when they touch, corners included."""
    return _labeling(A, (1,) * A.partition.d)


def tau_star(A: CellSet) -> float:
    """Smallest distance between two distinct topological components of ``A``.

    Infinite when ``A`` has at most one component.
    """
    if not A:
        raise EmptySet("tau_star of an empty set")
    lab = connected_components(A)
    if len(lab) <= 1:
        return math.inf
    p = A.partition
    coords = np.stack(np.unravel_index(A.members, p.shape), axis=1)
    labels = lab.labels
    sides = p.sides
    best = math.inf
    chunk = max(1, 2_000_000 // max(1, coords.shape[0]))
    for start in range(0, coords.shape[0], chunk):
        block = coords[start:start + chunk]
        gaps = np.maximum(0, np.abs(block[:, None, :] - coords[None, :, :]) - 1)
        dist = (gaps * sides).max(axis=2)
        same = labels[start:start + chunk, None] == labels[None, :]
        dist[same] = math.inf
        best = min(best, float(dist.min()))
    return best


def dilate(A: CellSet, delta: float) -> CellSet:
    """All cells within sup-norm distance ``delta`` of ``A`` (touching cells always included)."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if not A:
        return A
    radius = tube_radius(A.partition, delta)
    grown = ndimage.maximum_filter(A.grid.astype(np.uint8), size=tuple(2 * r + 1 for r in radius),
                                   mode="constant", cval=0)
    return CellSet(A.partition, grown.reshape(-1).astype(bool))


def erode(A: CellSet, delta: float) -> CellSet:
    """Complement of the dilated complement."""
    return dilate(A.complement(), delta).complement()


def compare_partitions(src, dst) -> CrmResult:
    """Relate two families of disjoint cell sets with ``union(src) <= union(dst)``.

    ``src`` is comparable to ``dst`` when every member of ``src`` lies inside a
    single member of ``dst``; the resulting map sends each source index to
    that target index.
    """
    src = list(src)
    dst = list(dst)
    if not dst:
        if any(src_set for src_set in src):
            raise NotNested("non-empty source against an empty target")
        return CrmResult(True, tuple(), 0, True, True, True)
    p = dst[0].partition
    for fam, name in ((src, "source"), (dst, "target")):
        total = np.zeros(p.n_cells, dtype=np.int64)
        for s in fam:
            total += s.mask
        if total.max(initial=0) > 1:
            raise ValueError(f"{name} sets are not disjoint")
    owner = np.full(p.n_cells, -1, dtype=np.int64)
    for k, s in enumerate(dst):
        owner[s.mask] = k
    for s in src:
        if (owner[s.mask] < 0).any():
            raise NotNested("source union is not contained in target union")
    mapping = []
    comparable = True
    for s in src:
        targets = np.unique(owner[s.mask])
        if targets.size != 1:
            comparable = False
            break
        mapping.append(int(targets[0]))
    if not comparable:
        return CrmResult(False, None, len(dst))
    injective = len(set(mapping)) == len(mapping)
    surjective = set(mapping) == set(range(len(dst)))
    return CrmResult(True, tuple(mapping), len(dst), injective, surjective, injective and surjective)


def compose(first: CrmResult, second: CrmResult) -> CrmResult:
    """Map of ``A -> C`` obtained from ``A -> B`` followed by ``B -> C``."""
    if not (first.comparable and second.comparable):
        raise ValueError("both maps must come from comparable partitions")
    mapping = tuple(second.map[k] for k in first.map)
    injective = len(set(mapping)) == len(mapping)
    surjective = set(mapping) == set(range(second.n_target))
    return CrmResult(True, mapping, second.n_target, injective, surjective, injective and surjective)
