"""Hypercube partitions of box domains and sets of their cells.

Every partition is built in unit-box coordinates: the requested width
``delta`` picks the unique integer ``ell`` with ``1/(ell+1) < delta <= 1/ell``
and each axis of the box is cut into ``ell + 1`` equal pieces. Distances are
measured with the sup-norm in domain units, so on a non-unit box the cell
side differs per axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDomain, InvalidWidth, OutOfDomain

__all__ = [
    "PartitionSpec",
    "CellSet",
    "build_partition",
    "locate",
    "locate_points",
    "cell_distance",
    "cell_measure",
    "unravel",
    "ravel",
]


@dataclass(frozen=True)
class PartitionSpec:
    """Regular grid of ``cells_per_axis ** d`` closed hypercubes.

    Attributes
    ----------
    box : tuple of (float, float)
        Per-axis closed interval of the domain.
    delta : float
        Requested width in unit-box coordinates.
    cells_per_axis : int
        ``ell + 1``.
    h : float
        Realized side length in unit-box coordinates, ``1 / (ell + 1)``.
    """

    box: tuple
    delta: float = field(compare=False)
    cells_per_axis: int
    h: float = field(compare=False)

    @property
    def d(self) -> int:
        return len(self.box)

    @property
    def ell(self) -> int:
        return self.cells_per_axis - 1

    @property
    def shape(self) -> tuple:
        return (self.cells_per_axis,) * self.d

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis ** self.d

    @property
    def lengths(self) -> np.ndarray:
        return np.array([b - a for a, b in self.box], dtype=float)

    @property
    def lower(self) -> np.ndarray:
        return np.array([a for a, _ in self.box], dtype=float)

    @property
    def sides(self) -> np.ndarray:
        """Cell side per axis in domain units."""
        return self.lengths / self.cells_per_axis

    @property
    def diameter(self) -> float:
        """Sup-norm diameter of one cell in domain units."""
        return float(self.sides.max())

    def edges(self, axis: int) -> np.ndarray:
        a, b = self.box[axis]
        return a + (b - a) * np.arange(self.cells_per_axis + 1) / self.cells_per_axis

    def cell_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper corners of all cells, shape ``(n_cells, d)``, flat-id order."""
        idx = np.stack(np.unravel_index(np.arange(self.n_cells), self.shape), axis=1)
        lo = self.lower + idx * self.sides
        return lo, lo + self.sides

    def empty(self) -> CellSet:
        return CellSet(self, np.zeros(self.n_cells, dtype=bool))

    def full(self) -> CellSet:
        return CellSet(self, np.ones(self.n_cells, dtype=bool))

    def cellset(self, ids) -> CellSet:
        mask = np.zeros(self.n_cells, dtype=bool)
        ids = np.asarray(list(ids) if not isinstance(ids, np.ndarray) else ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.n_cells):
            raise IndexError("cell id out of range")
        mask[ids] = True
        return CellSet(self, mask)


class CellSet:
    """A union of cells of one partition, stored as a dense boolean mask."""

    __slots__ = ("partition", "mask")

    def __init__(self, partition: PartitionSpec, mask):
        mask = np.asarray(mask, dtype=bool).reshape(-1)
        if mask.size != partition.n_cells:
            raise ValueError(f"mask has {mask.size} entries, partition has {partition.n_cells} cells")
        self.partition = partition
        self.mask = mask
        self.mask.flags.writeable = False

    @property
    def members(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def grid(self) -> np.ndarray:
        return self.mask.reshape(self.partition.shape)

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __bool__(self) -> bool:
        return bool(self.mask.any())

    def __iter__(self):
        return iter(self.members.tolist())

    def __contains__(self, cell_id) -> bool:
        return bool(self.mask[cell_id])

    def _check(self, other: CellSet) -> None:
        if self.partition != other.partition:
            raise ValueError("cell sets live on different partitions")

    def __eq__(self, other) -> bool:
        if not isinstance(other, CellSet):
            return NotImplemented
        return self.partition == other.partition and bool(np.array_equal(self.mask, other.mask))

    __hash__ = None

    def __or__(self, other: CellSet) -> CellSet:
        self._check(other)
        return CellSet(self.partition, self.mask | other.mask)

    def __and__(self, other: CellSet) -> CellSet:
        self._check(other)
        return CellSet(self.partition, self.mask & other.mask)

    def __sub__(self, other: CellSet) -> CellSet:
        self._check(other)
        return CellSet(self.partition, self.mask & ~other.mask)

    def complement(self) -> CellSet:
        return CellSet(self.partition, ~self.mask)

    def issubset(self, other: CellSet) -> bool:
        self._check(other)
        return not bool((self.mask & ~other.mask).any())

    def __le__(self, other: CellSet) -> bool:
        return self.issubset(other)

    def intersects(self, other: CellSet) -> bool:
        self._check(other)
        return bool((self.mask & other.mask).any())

    def measure(self) -> float:
        return len(self) * cell_measure(self.partition)

    def __repr__(self) -> str:
        ids = self.members
        shown = ", ".join(map(str, ids[:8])) + (", ..." if ids.size > 8 else "")
        return f"CellSet({{{shown}}}, n_cells={self.partition.n_cells})"


def build_partition(box, delta: float) -> PartitionSpec:
    """Partition ``box`` into hypercubes whose unit-box side is at most ``delta``.

    Parameters
    ----------
    box : sequence of (a, b) pairs, or a single (a, b) pair for 1-D
    delta : float in (0, 1]

    Examples
    --------
    >>> p = build_partition([(0.0, 1.0)], 0.3)
    >>> p.cells_per_axis, p.h
    (4, 0.25)
    """
    box = _normalize_box(box)
    delta = float(delta)
    if not (0.0 < delta <= 1.0) or math.isnan(delta):
        raise InvalidWidth(f"delta must lie in (0, 1], got {delta}")
    ell = max(1, math.floor(1.0 / delta))
    # 1/delta may round across an integer
    while 1.0 / (ell + 1) >= delta:
        ell += 1
    while ell > 1 and delta > 1.0 / ell:
        ell -= 1
    return PartitionSpec(box=box, delta=delta, cells_per_axis=ell + 1, h=1.0 / (ell + 1))


def _normalize_box(box) -> tuple:
    arr = np.asarray(box, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise InvalidDomain(f"box must be a sequence of (a, b) pairs, got {box!r}")
    if not np.all(np.isfinite(arr)) or np.any(arr[:, 1] <= arr[:, 0]):
        raise InvalidDomain(f"degenerate box {box!r}")
    return tuple((float(a), float(b)) for a, b in arr)


def locate_points(p: PartitionSpec, points) -> np.ndarray:
    """Flat cell ids for an ``(n, d)`` array of points.

    Cells are half-open ``[lo, hi)`` except on the upper face of the domain.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if p.d == 1 else pts.reshape(1, -1)
    if pts.shape[1] != p.d:
        raise OutOfDomain(f"points have dimension {pts.shape[1]}, partition has {p.d}")
    lo = p.lower
    hi = lo + p.lengths
    if np.any(pts < lo) or np.any(pts > hi) or not np.all(np.isfinite(pts)):
        raise OutOfDomain("point outside the partition box")
    u = (pts - lo) / p.lengths
    idx = np.floor(u * p.cells_per_axis).astype(np.int64)
    np.clip(idx, 0, p.cells_per_axis - 1, out=idx)
    return np.ravel_multi_index(tuple(idx.T), p.shape)


def locate(p: PartitionSpec, point) -> tuple:
    """Index tuple of the cell containing a single point."""
    flat = locate_points(p, np.asarray(point, dtype=float).reshape(1, p.d))[0]
    return unravel(p, flat)


def unravel(p: PartitionSpec, flat_id) -> tuple:
    return tuple(int(i) for i in np.unravel_index(int(flat_id), p.shape))


def ravel(p: PartitionSpec, idx) -> int:
    idx = tuple(int(i) for i in idx)
    if len(idx) != p.d or any(i < 0 or i >= p.cells_per_axis for i in idx):
        raise IndexError(f"invalid cell index {idx}")
    return int(np.ravel_multi_index(idx, p.shape))


def cell_distance(p: PartitionSpec, i, j) -> float:
    """Sup-norm distance between two closed cells given as index tuples."""
    i = np.asarray(unravel(p, ravel(p, i)))
    j = np.asarray(unravel(p, ravel(p, j)))
    gaps = np.maximum(0, np.abs(i - j) - 1)
    return float(np.max(p.sides * gaps))


def cell_measure(p: PartitionSpec) -> float:
    """Lebesgue measure of one cell in domain units."""
    return float(np.prod(p.sides))
