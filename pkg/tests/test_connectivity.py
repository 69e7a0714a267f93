import math

import numpy as np
import pytest

from histclust.connectivity import (
    compare_partitions,
    compose,
    connected_components,
    dilate,
    erode,
    tau_components,
    tau_star,
)
from histclust.errors import EmptySet, NotNested
from histclust.partition import CellSet, build_partition
from oracles import all_cells, bfs_components, dilate_ids, erode_ids

# A 10-cell grid with side 0.1 on the unit interval.
TEN = build_partition([(0.0, 1.0)], 0.105)


def comps(labeling):
    return [frozenset(c.members.tolist()) for c in labeling.components]


def test_ten_cell_grid():
    assert TEN.cells_per_axis == 10
    assert TEN.h == pytest.approx(0.1)


def test_tau_components_example():
    A = TEN.cellset([0, 1, 5])
    assert comps(tau_components(A, 0.15)) == [frozenset({0, 1}), frozenset({5})]


def test_tau_components_large_tau_and_singleton():
    A = TEN.cellset([0, 3, 9])
    assert len(tau_components(A, 2.0)) == 1
    assert comps(tau_components(TEN.cellset([4]), 0.01)) == [frozenset({4})]
    assert len(tau_components(TEN.empty(), 0.5)) == 0


def test_tau_must_be_positive():
    with pytest.raises(ValueError):
        tau_components(TEN.full(), 0.0)


def test_strict_link_threshold():
    A = TEN.cellset([0, 3])  # gap 0.2
    assert len(tau_components(A, 0.2)) == 2
    assert len(tau_components(A, 0.2000001)) == 1


def test_connected_components_examples():
    assert comps(connected_components(TEN.cellset([0, 1, 2, 4, 5]))) == [frozenset({0, 1, 2}), frozenset({4, 5})]
    assert len(connected_components(TEN.full())) == 1
    sq = build_partition([(0.0, 1.0)] * 2, 0.21)
    board = np.add.outer(np.arange(5), np.arange(5)) % 2 == 0
    assert len(connected_components(CellSet(sq, board))) == 1


def test_labels_align_with_members():
    A = TEN.cellset([1, 2, 6, 7, 9])
    lab = tau_components(A, 0.05)
    assert lab.labels.tolist() == [0, 0, 1, 1, 2]


def test_tau_star_examples():
    assert tau_star(TEN.cellset([2, 3, 4])) == math.inf
    assert tau_star(TEN.cellset([0, 1, 5])) == pytest.approx(0.3)
    assert tau_star(TEN.cellset([0, 4, 7])) == pytest.approx(0.2)
    with pytest.raises(EmptySet):
        tau_star(TEN.empty())


def test_tau_star_threshold_against_components():
    sq = build_partition([(0.0, 2.0), (0.0, 1.0)], 0.1)
    rng = np.random.default_rng(8)
    for _ in range(30):
        A = CellSet(sq, rng.random(sq.n_cells) < 0.15)
        if len(connected_components(A)) < 2:
            continue
        ts = tau_star(A)
        assert comps(tau_components(A, ts)) == comps(connected_components(A))
        assert comps(tau_components(A, min(sq.sides) * 0.5)) == comps(connected_components(A))
        assert len(tau_components(A, ts * (1 + 1e-9))) < len(connected_components(A))


def test_dilate_examples():
    sq = build_partition([(0.0, 1.0)] * 2, 0.21)
    centre = sq.cellset([12])
    assert len(dilate(centre, 0.1)) == 9
    assert len(dilate(centre, 0.0)) == 9
    assert dilate(centre, 10.0) == sq.full()
    assert len(dilate(TEN.cellset([5]), 0.0)) == 3


def test_erode_examples():
    assert erode(TEN.full(), 0.3) == TEN.full()
    assert erode(TEN.cellset(range(2, 8)), 0.1) == TEN.cellset([4, 5])
    A = TEN.cellset([1, 2, 3, 7])
    assert erode(A, 0.05) <= A


def test_tubes_against_bruteforce():
    rng = np.random.default_rng(2)
    for d, delta in ((1, 0.08), (2, 0.15), (3, 0.3)):
        p = build_partition([(0.0, 1.0)] * (d - 1) + [(0.0, 2.0)], delta)
        for _ in range(5):
            A = CellSet(p, rng.random(p.n_cells) < 0.3)
            r = float(rng.uniform(0, 0.5))
            ids = set(A.members.tolist())
            assert set(dilate(A, r).members.tolist()) == dilate_ids(ids, p.shape, p.sides, r)
            assert set(erode(A, r).members.tolist()) == erode_ids(ids, p.shape, p.sides, r)


def test_tau_components_against_bfs_small_cases():
    rng = np.random.default_rng(4)
    for d, delta in ((1, 0.03), (2, 0.1), (3, 0.26)):
        p = build_partition([(0.0, 1.5)] + [(0.0, 1.0)] * (d - 1), delta)
        cells = all_cells(p.shape)
        for _ in range(10):
            A = CellSet(p, rng.random(p.n_cells) < rng.uniform(0.05, 0.5))
            tau = float(rng.uniform(0.001, 0.8))
            expected = bfs_components({c: cells[c] for c in A.members.tolist()}, p.sides, tau)
            assert comps(tau_components(A, tau)) == expected


def test_crm_identity_refinement_and_straddle():
    a, b = TEN.cellset([0, 1]), TEN.cellset([4, 5, 6])
    same = compare_partitions([a, b], [a, b])
    assert same.comparable and same.bijective and same.map == (0, 1)
    fine = compare_partitions([TEN.cellset([4]), TEN.cellset([6])], [b])
    assert fine.comparable and not fine.injective and fine.map == (0, 0)
    straddle = compare_partitions([TEN.cellset([1, 4])], [a, b])
    assert not straddle.comparable and straddle.map is None


def test_crm_not_nested_and_overlap():
    with pytest.raises(NotNested):
        compare_partitions([TEN.cellset([9])], [TEN.cellset([0])])
    with pytest.raises(ValueError):
        compare_partitions([TEN.cellset([0, 1]), TEN.cellset([1])], [TEN.full()])


def test_crm_compose():
    A = [TEN.cellset([0]), TEN.cellset([6])]
    B = [TEN.cellset([0, 1]), TEN.cellset([5, 6])]
    C = [TEN.cellset([0, 1, 2]), TEN.cellset([4, 5, 6, 7])]
    ab, bc, ac = compare_partitions(A, B), compare_partitions(B, C), compare_partitions(A, C)
    comp = compose(ab, bc)
    assert comp.map == ac.map and comp.bijective == ac.bijective
    assert comp.persistent
