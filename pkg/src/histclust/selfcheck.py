"""Quick property checks bundled with the package for the ``selftest`` command."""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy import integrate

from .connectivity import dilate, erode, tau_components
from .histogram import fit, level_set
from .partition import CellSet, build_partition
from .synthetic import density, level_intervals, make_spec, sample


def _random_set(rng, d, max_cells=400):
    m = int(rng.integers(2, max(3, int(round(max_cells ** (1.0 / d)))) + 1))
    p = build_partition([(0.0, float(rng.uniform(0.5, 3.0))) for _ in range(d)], 1.0 / m)
    return CellSet(p, rng.random(p.n_cells) < rng.uniform(0.1, 0.6))


def _bfs_labels(A: CellSet, tau: float) -> list:
    p = A.partition
    ids = A.members
    coords = np.stack(np.unravel_index(ids, p.shape), axis=1)
    dist = (np.maximum(0, np.abs(coords[:, None] - coords[None]) - 1) * p.sides).max(axis=2)
    seen = np.zeros(len(ids), dtype=bool)
    groups = []
    for s in range(len(ids)):
        if seen[s]:
            continue
        seen[s] = True
        queue, group = deque([s]), [s]
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero((dist[u] < tau) & ~seen):
                seen[v] = True
                queue.append(v)
                group.append(v)
        groups.append(frozenset(ids[group].tolist()))
    return sorted(groups, key=min)


def check_components(seed: int, trials: int = 40) -> tuple:
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        A = _random_set(rng, int(rng.integers(1, 4)))
        tau = float(rng.uniform(0.01, 1.0))
        got = [frozenset(c.members.tolist()) for c in tau_components(A, tau).components]
        if got != _bfs_labels(A, tau):
            return False, f"mismatch for tau={tau}"
    return True, f"{trials} random sets"


def check_tubes(seed: int, trials: int = 40) -> tuple:
    rng = np.random.default_rng(seed + 1)
    for _ in range(trials):
        A = _random_set(rng, int(rng.integers(1, 3)))
        B = CellSet(A.partition, rng.random(A.partition.n_cells) < 0.3)
        r = float(rng.integers(1, 4)) * A.partition.diameter
        if not A.issubset(erode(dilate(A, r), r)):
            return False, "A not inside erode(dilate(A))"
        if not dilate(erode(A, r), r).issubset(A):
            return False, "dilate(erode(A)) not inside A"
        if dilate(A | B, r) != (dilate(A, r) | dilate(B, r)):
            return False, "dilation does not distribute over union"
    return True, f"{trials} random sets"


def check_normalization(seed: int) -> tuple:
    for theta, beta, rho in ((2, 1, 0.1), (0.5, 3, 0.0), (float("inf"), float("inf"), 0.05)):
        spec = make_spec(theta, beta, rho)
        pieces = [(-3, -2), (-2, -1), (-1, 0), (0, 1), (1, 2), (2, 3)]
        total = sum(integrate.quad(lambda x: float(density(spec, x)), a, b, epsabs=1e-13)[0]
                    for a, b in pieces)
        if abs(total - 1) > 1e-10:
            return False, f"density integral {total} for {(theta, beta, rho)}"
        data = sample(spec, 2000, seed)
        hist = fit(data, build_partition(spec.box, 0.07))
        if abs(hist.integral() - 1) > 1e-9:
            return False, "histogram integral off"
    return True, "3 parameter sets"


def check_antitone(seed: int) -> tuple:
    spec = make_spec(2, 1, 0.1)
    hist = fit(sample(spec, 5000, seed), build_partition(spec.box, 0.05))
    grid = np.linspace(0, hist.max_value * 1.1, 100)
    sets = [level_set(hist, r) for r in grid]
    if not all(b.issubset(a) for a, b in zip(sets, sets[1:])):
        return False, "empirical level sets not nested"
    prev = None
    for r in np.linspace(0, spec.rho_star_star, 60):
        cur = level_intervals(spec, r)
        if prev is not None:
            for a, b in cur:
                if not any(pa <= a and b <= pb for pa, pb in prev):
                    return False, f"true level set not nested at {r}"
        prev = cur
    return True, "100 empirical and 60 analytic levels"


def run_all(seed: int = 0) -> list:
    checks = (
        ("component_oracle", check_components),
        ("tube_laws", check_tubes),
        ("normalization", check_normalization),
        ("antitonicity", check_antitone),
    )
    results = []
    for name, fn in checks:
        try:
            ok, detail = fn(seed)
        except Exception as exc:  # a crash is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
    return results
