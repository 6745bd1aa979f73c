import math

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from erloc.errors import ParameterError
from erloc.forks import (brute_force_forks, expected_fork_count, expected_fork_count_finite,
                         find_forks, fork_census_rows, fork_eigenpairs)
from erloc.graph import build_scaled_matrix, components_census, from_edges, generate_er


def _fork_on_core(D=3):
    # K4 core on 0..3, hubs 4 and 5 hang off vertex 2 with D leaves each
    edges = [(i, j) for i in range(4) for j in range(i + 1, 4)] + [(2, 4), (2, 5)]
    nxt = 6
    for hub in (4, 5):
        for _ in range(D):
            edges.append((hub, nxt))
            nxt += 1
    return from_edges(nxt, edges, d=float(D))


def test_single_fork_found():
    g = _fork_on_core(3)
    forks = find_forks(g, components_census(g))
    # leaves sharing a hub are degree-0 forks in their own right
    assert sorted(f.degree for f in forks) == [0] * 6 + [3]
    (f,) = [f for f in forks if f.degree == 3]
    assert f.base == 2 and f.hubs == (4, 5)


def test_complete_graph_has_none():
    k5 = from_edges(5, [(i, j) for i in range(5) for j in range(i + 1, 5)])
    assert find_forks(k5, components_census(k5)) == []


def test_eigenpairs_d4():
    g = _fork_on_core(4)
    (f,) = [f for f in find_forks(g, components_census(g)) if f.degree == 4]
    pairs = fork_eigenpairs(f, g)
    assert [lam for lam, _ in pairs] == [1.0, -1.0]
    a = build_scaled_matrix(g).entries
    for lam, w in pairs:
        assert np.linalg.norm(w) == pytest.approx(1.0)
        assert np.linalg.norm(a @ w - lam * w) <= 1e-12


def test_eigenpair_d0():
    g = from_edges(5, [(0, 1), (1, 2), (2, 3), (2, 4)], d=1.0)
    f = find_forks(g, components_census(g))[0]
    assert f.degree == 0 and f.hubs == (3, 4)
    ((lam, w),) = fork_eigenpairs(f, g)
    assert lam == 0.0
    assert w[3] == pytest.approx(1 / math.sqrt(2)) and w[4] == pytest.approx(-1 / math.sqrt(2))


@settings(max_examples=20)
@given(st.integers(0, 10**6))
@example(65663)  # two forks at one base with different degrees
def test_detector_matches_brute_force(seed):
    n = 2000
    g = generate_er(n, 0.4 * math.log(n), seed)
    census = components_census(g)
    forks = find_forks(g, census)
    assert [f.key() for f in forks] == [f.key() for f in brute_force_forks(g, census)]
    a = build_scaled_matrix(g).entries
    for f in forks:
        # star parts of distinct forks meet at most in the base
        for lam, w in fork_eigenpairs(f, g):
            assert np.linalg.norm(a @ w - lam * w) <= 1e-12


def test_expected_count_formula():
    n, d = 10**5, 4.6
    assert expected_fork_count(n, d, 0) == pytest.approx(n * d * d * math.exp(-2 * d) / 2)
    assert math.isfinite(expected_fork_count(10**6, 200.0, 50))
    with pytest.raises(ParameterError):
        expected_fork_count(n, d, -1)


def test_stated_formula_has_extra_e_factor():
    # the asymptotic formula carries (e^{+1})^{2D} relative to the finite-N product
    n, d = 10**5, 0.4 * math.log(10**5)
    for D in (1, 2):
        ratio = expected_fork_count(n, d, D) / expected_fork_count_finite(n, d, D)
        assert ratio == pytest.approx(math.exp(2 * D), rel=0.05)


@pytest.mark.slow
def test_fork_trend_in_D():
    n = 20000
    d = 0.4 * math.log(n)
    c = np.zeros((20, 2))
    for seed in range(20):
        g = generate_er(n, d, seed)
        f = find_forks(g, components_census(g))
        c[seed] = [sum(x.degree == 0 for x in f), sum(x.degree == 1 for x in f)]
    mean = c.mean(axis=0)
    sem = c.std(axis=0, ddof=1) / math.sqrt(20)
    for D in (0, 1):
        ref = expected_fork_count_finite(n, d, D)
        assert abs(mean[D] - ref) <= 3 * max(sem[D], math.sqrt(ref / 20))


def test_no_forks_above_half():
    # D_* = log N/(2d) - 1 < 0 at b = 1
    n = 5000
    total = 0
    for seed in range(20):
        g = generate_er(n, math.log(n), seed)
        total += len(find_forks(g, components_census(g)))
    assert total <= 2


def test_census_rows():
    g = _fork_on_core(2)
    forks = find_forks(g, components_census(g))
    rows = fork_census_rows(7, g, forks, max_D=3)
    assert [r[3] for r in rows] == [0, 1, 2, 3]
    assert [r[4] for r in rows] == [2, 0, 1, 0]
    assert rows[0][:3] == (7, g.n, g.d)
