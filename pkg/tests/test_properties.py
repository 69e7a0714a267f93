"""Property-based checks of the structural laws."""

import math

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from histclust.connectivity import compare_partitions, compose, dilate, erode, tau_components
from histclust.experiments import fit_slope
from histclust.histogram import Dataset, fit, level_set
from histclust.partition import CellSet, build_partition, locate_points
from histclust.scan import HistogramFamily, ScanParams, run_scan
from histclust.synthetic import cdf, density, level_intervals, make_spec, tau_star_truth
from oracles import all_cells, bfs_components

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def partitions(draw, max_d=3):
    d = draw(st.integers(1, max_d))
    cells = {1: (2, 40), 2: (2, 12), 3: (2, 6)}[d]
    k = draw(st.integers(*cells))
    box = [(0.0, draw(st.sampled_from([1.0, 1.5, 2.0, 6.0]))) for _ in range(d)]
    # a width strictly inside (1/k, 1/(k-1)] gives exactly k cells per axis
    return build_partition(box, (1.0 / k + 1.0 / (k - 1)) / 2)


@st.composite
def cellsets(draw, max_d=3):
    p = draw(partitions(max_d))
    bits = draw(st.lists(st.booleans(), min_size=p.n_cells, max_size=p.n_cells))
    return CellSet(p, np.array(bits))


def comps(labeling):
    return [frozenset(c.members.tolist()) for c in labeling.components]


@SETTINGS
@given(cellsets(), st.floats(1e-3, 2.0))
def test_components_agree_with_bfs(A, tau):
    cells = all_cells(A.partition.shape)
    expected = bfs_components({c: cells[c] for c in A.members.tolist()}, A.partition.sides, tau)
    assert comps(tau_components(A, tau)) == expected


@SETTINGS
@given(cellsets(), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
def test_components_coarsen_as_tau_grows(A, t1, t2):
    lo, hi = sorted((t1, t2))
    fine, coarse = tau_components(A, lo), tau_components(A, hi)
    res = compare_partitions(fine.components, coarse.components) if len(A) else None
    assert res is None or res.comparable


@SETTINGS
@given(cellsets(), st.integers(1, 3))
def test_tube_laws(A, r):
    w = r * float(A.partition.sides.min())
    assert A <= erode(dilate(A, w), w)
    assert dilate(erode(A, w), w) <= A
    assert erode(A, w) <= A <= dilate(A, w)


@SETTINGS
@given(cellsets(max_d=2), st.floats(0.0, 1.0), st.data())
def test_dilation_distributes_over_union(A, w, data):
    bits = data.draw(st.lists(st.booleans(), min_size=A.partition.n_cells, max_size=A.partition.n_cells))
    B = CellSet(A.partition, np.array(bits))
    assert dilate(A | B, w) == dilate(A, w) | dilate(B, w)
    assert erode(A & B, w) == erode(A, w) & erode(B, w)


@SETTINGS
@given(partitions(max_d=2), st.integers(1, 400), st.integers(0, 2 ** 32 - 1))
def test_histogram_normalized_and_level_sets_nested(p, n, seed):
    rng = np.random.default_rng(seed)
    lo, hi = np.array(p.box).T
    pts = rng.uniform(lo, hi, size=(n, p.d))
    hist = fit(Dataset(pts), p)
    assert abs(hist.integral() - 1.0) <= 1e-9
    levels = np.linspace(0, hist.max_value * 1.1, 25)
    sets = [level_set(hist, r) for r in levels]
    assert all(b <= a for a, b in zip(sets, sets[1:]))
    ids = locate_points(p, pts)
    lo_c, hi_c = p.cell_bounds()
    assert np.all(pts >= lo_c[ids] - 1e-12) and np.all(pts <= hi_c[ids] + 1e-12)


@st.composite
def nested_triples(draw):
    A = draw(cellsets(max_d=2))
    assume(len(A) > 0)
    t = sorted(draw(st.lists(st.floats(1e-3, 1.5), min_size=3, max_size=3)))
    return [tau_components(A, x).components for x in t]


@SETTINGS
@given(nested_triples())
def test_crm_composition_and_persistence(triple):
    a, b, c = triple
    ab, bc, ac = compare_partitions(a, b), compare_partitions(b, c), compare_partitions(a, c)
    comp = compose(ab, bc)
    assert comp.map == ac.map
    if ab.persistent and bc.persistent:
        assert ac.persistent


@SETTINGS
@given(st.integers(0, 10_000), st.floats(0.02, 0.5), st.floats(0.01, 0.3))
def test_scan_level_is_a_grid_point_and_components_survive(seed, eps, tau):
    rng = np.random.default_rng(seed)
    p = build_partition([(0.0, 1.0)], 0.04)
    hist = fit(Dataset(rng.beta(0.6, 0.6, 300)), p)
    fam = HistogramFamily(hist)
    out = run_scan(fam, ScanParams(eps, tau))
    k = out.rho_star_hat / eps
    assert abs(k - round(k)) < 1e-9 and round(k) >= 3
    upper = fam(out.rho_star_hat + 2 * eps)
    assert all(c.intersects(upper) for c in out.components)


@SETTINGS
@given(st.floats(-1.0, 1.0), st.floats(0.05, 5.0))
def test_fit_slope_is_scale_invariant(slope, scale):
    ns = np.geomspace(100, 1e5, 6)
    base = fit_slope([(n, n ** slope) for n in ns])[0]
    assert math.isclose(fit_slope([(n, scale * n ** slope) for n in ns])[0], base, abs_tol=1e-9)
    assert math.isclose(base, slope, abs_tol=1e-9)


exps = st.one_of(st.floats(0.3, 5.0), st.just(math.inf))


@SETTINGS
@given(exps, exps, st.floats(0.0, 0.16), st.lists(st.floats(-3.0, 3.0), min_size=2, max_size=20))
def test_density_and_cdf_sane(theta, beta, rho, xs):
    spec = make_spec(theta, beta, rho)
    xs = np.sort(np.array(xs))
    v = density(spec, xs)
    assert np.all(v >= rho - 1e-15) and np.all(v <= spec.rho_star_star + 1e-12)
    assert np.all(np.diff(cdf(spec, xs)) >= -1e-15)


@SETTINGS
@given(exps, exps, st.floats(0.0, 0.16), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_truth_level_sets_antitone_and_separation_monotone(theta, beta, rho, a, b):
    spec = make_spec(theta, beta, rho)
    lo, hi = sorted((a, b))
    top = spec.rho_star_star
    upper, lower = level_intervals(spec, lo * top), level_intervals(spec, hi * top)
    for x, y in lower:
        assert any(u <= x and y <= v for u, v in upper)
    e1, e2 = max(lo, 1e-6) * spec.c, max(hi, 1e-6) * spec.c
    assert tau_star_truth(spec, e1) <= tau_star_truth(spec, e2)
