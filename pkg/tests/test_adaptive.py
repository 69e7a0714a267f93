import math

import numpy as np
import pytest

from histclust.adaptive import (
    AdaptiveParams,
    candidate_grid,
    candidate_interval,
    select,
    tau_for,
)
from histclust.errors import AllCandidatesFailed, SampleTooSmall
from histclust.histogram import Dataset
from histclust.scan import TWO_CLUSTERS


def two_blocks(n=20000, seed=0):
    rng = np.random.default_rng(seed)
    x = np.where(rng.random(n) < 0.5, rng.uniform(0.1, 0.3, n), rng.uniform(0.6, 0.9, n))
    return Dataset(x)


GRID = tuple(np.linspace(0.02, 0.3, 15).tolist())


def test_params_validation():
    for bad in ({"C": 0.5}, {"gamma": 0.0}, {"gamma": 1.5}, {"varsigma": 0.5},
                {"grid_override": ()}, {"grid_size": 0}):
        with pytest.raises(ValueError):
            AdaptiveParams(**bad)


def test_candidate_interval_small_n():
    lo, hi = candidate_interval(16, 1)
    assert lo == pytest.approx(0.18021032806514292, rel=1e-12)
    assert hi == pytest.approx(0.9806022744169713, rel=1e-12)
    grid = candidate_grid(16, 1)
    assert grid[0] == lo and grid[-1] == hi
    assert max(np.diff(grid)) <= 1 / 16 + 1e-15
    with pytest.raises(SampleTooSmall):
        candidate_grid(15, 1)


def test_candidate_grid_large_n_two_dims():
    n = 10 ** 6
    lo, hi = candidate_interval(n, 2)
    lln = math.log(math.log(n))
    assert lo == pytest.approx(math.sqrt(math.log(n) * lln ** 2 / n), abs=1e-12)
    assert hi == pytest.approx(math.sqrt(1 / lln), abs=1e-12)
    assert lo == pytest.approx(0.009759864230218383, abs=1e-12)
    assert hi == pytest.approx(0.6171203199127706, abs=1e-12)
    grid = candidate_grid(n, 2)
    assert len(grid) <= n and grid[0] == lo and grid[-1] == hi
    assert max(np.diff(grid)) <= n ** -0.5 + 1e-15
    assert all(lo <= g <= hi for g in grid)


def test_candidate_grid_is_capped_at_n_points():
    # at n=20 in one dimension the unit step would need more than n points only
    # if the interval were longer than 1; check the cap via a wide 3-D interval
    for n, d in ((16, 1), (100, 1), (5000, 3)):
        grid = candidate_grid(n, d)
        assert 2 <= len(grid) <= n
        assert np.all(np.diff(grid) > 0)


def test_tau_for_examples():
    assert tau_for(0.25, 10 ** 6, 1) == pytest.approx(0.24134563306298965, rel=1e-12)
    assert tau_for(1.0, 16, 1) == pytest.approx(0.019588330354098925, rel=1e-12)
    assert tau_for(1.0, 16, 1) > 0
    assert tau_for(0.5, 10 ** 6, 1) == pytest.approx(2 * tau_for(0.25, 10 ** 6, 1))
    assert tau_for(0.25, 10 ** 6, 0.5) == pytest.approx(0.5 * math.log(math.log(math.log(1e6))))
    with pytest.raises(SampleTooSmall):
        tau_for(0.1, 15, 1)


def test_select_minimises_the_level():
    out = select(two_blocks(), [(0.0, 1.0)], AdaptiveParams(grid_override=GRID))
    ok = [r for r in out.per_delta if r.succeeded]
    assert out.rho_star == min(r.output.rho_star_hat for r in ok)
    assert out.selected.delta == out.delta_star
    assert out.eps_sel == out.selected.eps and out.tau_sel == out.selected.tau
    assert out.components == out.selected.output.components
    assert out.selected.output.status == TWO_CLUSTERS
    assert out.grid_size == len(GRID) and len(out.per_delta) == len(GRID)


def test_select_ties_go_to_the_smaller_width():
    data = two_blocks()
    base = select(data, [(0.0, 1.0)], AdaptiveParams(grid_override=GRID))
    d = base.delta_star
    # duplicated entries and a larger width with the same level: the first smallest wins
    grid = (0.3, d, d) + GRID
    out = select(data, [(0.0, 1.0)], AdaptiveParams(grid_override=grid, grid_size=len(GRID)))
    assert out.delta_star == d and out.selected_index == 1
    assert out.rho_star == base.rho_star


def test_select_min_is_monotone_under_fixed_grid_size():
    data = two_blocks(seed=3)
    box = [(0.0, 1.0)]
    full = select(data, box, AdaptiveParams(grid_override=GRID, grid_size=len(GRID)))
    for k in (3, 7, 11):
        sub = select(data, box, AdaptiveParams(grid_override=GRID[:k], grid_size=len(GRID)))
        assert full.rho_star <= sub.rho_star
        # the runs themselves are shared prefixes
        assert [r.output.rho_star_hat for r in sub.per_delta] == [r.output.rho_star_hat for r in full.per_delta[:k]]


def test_grid_size_enters_eps():
    data = two_blocks()
    a = select(data, [(0.0, 1.0)], AdaptiveParams(grid_override=GRID))
    b = select(data, [(0.0, 1.0)], AdaptiveParams(grid_override=GRID, grid_size=10 * len(GRID)))
    assert all(rb.eps > ra.eps for ra, rb in zip(a.per_delta, b.per_delta))


def test_select_all_fail_carries_every_run():
    rng = np.random.default_rng(1)
    data = Dataset(rng.uniform(0, 1, 2000))
    with pytest.raises(AllCandidatesFailed) as info:
        select(data, [(0.0, 1.0)], AdaptiveParams(grid_override=(0.1, 0.2, 0.3)))
    assert [r.delta for r in info.value.per_delta] == [0.1, 0.2, 0.3]


def test_select_rejects_small_samples_and_bad_boxes():
    with pytest.raises(SampleTooSmall):
        select(Dataset(np.linspace(0, 1, 10)), [(0.0, 1.0)])
    with pytest.raises(ValueError):
        select(two_blocks(100), [(0.0, 1.0), (0.0, 1.0)], AdaptiveParams(grid_override=(0.2,)))


def test_tau_is_scaled_by_the_longest_side():
    data = Dataset(np.asarray(two_blocks().points) * 6 - 3)
    try:
        runs = select(data, [(-3.0, 3.0)], AdaptiveParams(grid_override=(0.2,))).per_delta
    except AllCandidatesFailed as exc:
        runs = exc.per_delta
    assert runs[0].tau == pytest.approx(6 * tau_for(0.2, data.n, 1.0))


def test_select_is_deterministic():
    data = two_blocks(seed=5)
    a = select(data, [(0.0, 1.0)], AdaptiveParams(grid_override=GRID))
    b = select(data, [(0.0, 1.0)], AdaptiveParams(grid_override=GRID))
    assert a.delta_star == b.delta_star and a.rho_star == b.rho_star
    assert [r.output.trace for r in a.per_delta] == [r.output.trace for r in b.per_delta]
