"""Star tuning forks rooted in the giant component and their exact eigenpairs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ContractError, ParameterError
from .graph import ComponentCensus, GraphSample

__all__ = [
    "TuningFork",
    "find_hubs",
    "find_forks",
    "brute_force_forks",
    "fork_eigenpairs",
    "expected_fork_count",
    "expected_fork_count_finite",
    "fork_census_rows",
]


@dataclass(frozen=True)
class TuningFork:
    base: int
    hubs: tuple
    spokes: tuple
    degree: int

    def key(self) -> tuple:
        return (self.base, self.hubs)


def find_hubs(g: GraphSample) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vertices all of whose neighbours but one are leaves.

    Returns ``(hubs, bases, D)`` where the base is the unique non-leaf
    neighbour and D the number of leaf neighbours.
    """
    a = g.adjacency
    deg = g.degree
    nonleaf = (deg >= 2).astype(np.float64)
    nonleaf_nbrs = np.rint(a @ nonleaf).astype(np.int64)
    hubs = np.flatnonzero((deg >= 1) & (nonleaf_nbrs == 1))
    # the base is the neighbour with degree >= 2: sum of id * indicator
    ids = np.arange(g.n, dtype=np.float64) * nonleaf
    bases = np.rint(a[hubs] @ ids).astype(np.int64)
    return hubs, bases, deg[hubs] - 1


def find_forks(g: GraphSample, census: ComponentCensus) -> list[TuningFork]:
    """All star tuning forks whose base lies in the giant component.

    Hubs sharing a base and a degree are paired in every unordered way.
    Output is sorted by (base, hub pair).
    """
    if not census.components:
        return []
    hubs, bases, D = find_hubs(g)
    in_giant = census.labels[bases] == census.giant_index
    hubs, bases, D = hubs[in_giant], bases[in_giant], D[in_giant]
    order = np.lexsort((hubs, D, bases))
    hubs, bases, D = hubs[order], bases[order], D[order]
    forks = []
    start = 0
    m = hubs.size
    while start < m:
        stop = start + 1
        while stop < m and bases[stop] == bases[start] and D[stop] == D[start]:
            stop += 1
        if stop - start >= 2:
            grp = hubs[start:stop].tolist()
            for i in range(len(grp)):
                for j in range(i + 1, len(grp)):
                    forks.append(_make_fork(g, int(bases[start]), grp[i], grp[j], int(D[start])))
        start = stop
    forks.sort(key=TuningFork.key)
    return forks


def _make_fork(g: GraphSample, base: int, h1: int, h2: int, D: int) -> TuningFork:
    s1 = tuple(int(v) for v in g.neighbors(h1) if v != base)
    s2 = tuple(int(v) for v in g.neighbors(h2) if v != base)
    return TuningFork(base, (h1, h2), (s1, s2), D)


def brute_force_forks(g: GraphSample, census: ComponentCensus) -> list[TuningFork]:
    """Reference enumeration straight from the definition (small graphs only)."""
    deg = g.degree
    nbrs = [set(g.neighbors(v).tolist()) for v in range(g.n)]
    out = []
    for o in range(g.n):
        if census.labels[o] != census.giant_index:
            continue
        cand = sorted(nbrs[o])
        for i, h1 in enumerate(cand):
            for h2 in cand[i + 1:]:
                s1, s2 = nbrs[h1] - {o}, nbrs[h2] - {o}
                if len(s1) != len(s2):
                    continue
                if not all(deg[s] == 1 for s in s1 | s2):
                    continue
                verts = {o, h1, h2} | s1 | s2
                if len(verts) != 2 * len(s1) + 3:
                    continue
                out.append(TuningFork(o, (h1, h2), (tuple(sorted(s1)), tuple(sorted(s2))), len(s1)))
    return sorted(out, key=TuningFork.key)


def _validate(f: TuningFork, g: GraphSample) -> None:
    deg = g.degree
    for h, spokes in zip(f.hubs, f.spokes):
        if len(spokes) != f.degree:
            raise ContractError("spoke count differs from fork degree")
        if set(g.neighbors(h).tolist()) != set(spokes) | {f.base}:
            raise ContractError(f"hub {h} neighbourhood is not its spokes plus the base")
        if any(deg[s] != 1 for s in spokes):
            raise ContractError("a spoke is not a leaf")
    verts = {f.base, *f.hubs, *f.spokes[0], *f.spokes[1]}
    if len(verts) != 2 * f.degree + 3:
        raise ContractError("fork vertices are not distinct")


def fork_eigenpairs(f: TuningFork, g: GraphSample) -> list[tuple[float, np.ndarray]]:
    """Exact eigenpairs of A/√d supported on the two stars.

    D ≥ 1 gives ±√(D/d); D = 0 gives the single pair (0, (𝟙_{h1} − 𝟙_{h2})/√2).
    """
    _validate(f, g)
    D, n = f.degree, g.n
    (h1, h2), (s1, s2) = f.hubs, f.spokes
    if D == 0:
        w = np.zeros(n)
        w[h1], w[h2] = 1.0, -1.0
        return [(0.0, w / math.sqrt(2.0))]
    pairs = []
    root = math.sqrt(D)
    for sign in (1.0, -1.0):
        w = np.zeros(n)
        w[h1] = sign * root
        w[list(s1)] = 1.0
        w[h2] = -sign * root
        w[list(s2)] = -1.0
        pairs.append((sign * math.sqrt(D / g.d), w / math.sqrt(4.0 * D)))
    return pairs


def expected_fork_count(n: int, d: float, D: int) -> float:
    """N d² e^{−2d}/(2 D!²) · (d e^{−d+1})^{2D}, evaluated in log space."""
    if D < 0:
        raise ParameterError("D must be nonnegative")
    logv = (math.log(n) + 2.0 * math.log(d) - 2.0 * d - math.log(2.0) - 2.0 * gammaln(D + 1)
            + 2.0 * D * (math.log(d) - d + 1.0))
    return math.exp(logv)


def expected_fork_count_finite(n: int, d: float, D: int) -> float:
    """Finite-N expectation before the asymptotic simplification (giant factor ≈ 1).

    N(N−1)…(N−2D−2)/(2 D!²) · (d/N)^{2D+2} · (1 − d/N)^{2(N−D−1) + 2D(N−1)}.
    """
    if D < 0:
        raise ParameterError("D must be nonnegative")
    p = d / n
    logv = (gammaln(n + 1) - gammaln(n - 2 * D - 2) - math.log(2.0) - 2.0 * gammaln(D + 1)
            + (2 * D + 2) * math.log(p)
            + (2 * (n - D - 1) + 2 * D * (n - 1)) * math.log1p(-p))
    return math.exp(logv)


def fork_census_rows(seed: int, g: GraphSample, forks: list[TuningFork], max_D: int | None = None):
    """Rows ``(seed, N, d, D, count, expected)`` for D = 0..max_D."""
    counts: dict = {}
    for f in forks:
        counts[f.degree] = counts.get(f.degree, 0) + 1
    top = max(counts, default=0) if max_D is None else max_D
    return [(seed, g.n, g.d, D, counts.get(D, 0), expected_fork_count(g.n, g.d, D))
            for D in range(top + 1)]
