"""Pruned graph around high-degree vertices and exact checks of its properties.

Construction, for 𝒱_τ = {x : α_x ≥ τ} and R = 2·r_star:

Phase 1 (per x ∈ 𝒱_τ, ascending). For each neighbor y of x (ascending) let
the *branch* of y be the ball of radius R−1 around y in G with x deleted.
The edge {x, y} is kept only if the branch induces a tree, every branch
vertex at depth j from y lies at distance exactly j+1 from x in G, and the
branch neither meets nor touches a previously kept branch of x. Otherwise
{x, y} is cut. Kept branches glue into a tree ball whose BFS distances agree
with G, and later cuts only shrink it, so properties (ii) and (iv) survive.

Phase 2. While two 𝒱_τ vertices are within distance 2R of each other in the
current graph, cut every edge incident to 𝒱_τ on a connecting geodesic
(lowest-id parents). Repeat to a fixed point; this gives property (i).

Only edges incident to 𝒱_τ are ever cut, which is property (iii).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError
from .graph import (DegreeProfile, GraphSample, ball_and_spheres, from_edges,
                    normalized_degrees, write_edgelist)

__all__ = [
    "PrunedGraph",
    "PropertyReport",
    "select_v_tau",
    "prune",
    "verify_pruning",
    "export_removed",
]


@dataclass(frozen=True, eq=False)
class PrunedGraph:
    base: GraphSample
    tau: float
    r_star: int
    v_tau: np.ndarray
    removed_edges: np.ndarray
    adjacency: sp.csr_matrix = field(repr=False)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def d(self) -> float:
        return self.base.d

    @property
    def kept_edges(self) -> np.ndarray:
        a = sp.triu(self.adjacency, k=1).tocoo()
        e = np.stack([a.row, a.col], axis=1).astype(np.int64)
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    def as_graph(self) -> GraphSample:
        """The kept graph as a sample with the base's d and seed."""
        return from_edges(self.n, self.kept_edges, d=self.d, seed=self.base.seed)


@dataclass(frozen=True)
class PropertyReport:
    separated: bool          # (i)
    trees: bool              # (ii)
    incident: bool           # (iii)
    spheres_nested: bool     # (iv)
    max_removed_degree: int  # (v)
    sphere_loss: float       # (vi)
    balls_disjoint: bool
    removed_subset: bool

    @property
    def all_exact(self) -> bool:
        return (self.separated and self.trees and self.incident and self.spheres_nested
                and self.balls_disjoint and self.removed_subset)


def select_v_tau(profile: DegreeProfile, tau: float) -> np.ndarray:
    """{x : α_x ≥ τ} in ascending order (compared as D_x ≥ τ·d)."""
    if tau < 1:
        raise ParameterError("tau must be >= 1")
    return np.flatnonzero(profile.degree >= tau * profile.d - 1e-12 * max(1.0, tau * profile.d))


def _bfs_depths(adj: list, src: int, radius: int, blocked: int | None = None) -> dict:
    depth = {src: 0}
    frontier = [src]
    for k in range(1, radius + 1):
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v != blocked and v not in depth:
                    depth[v] = k
                    nxt.append(v)
        frontier = nxt
    return depth


def _phase_one(adj: list, x: int, radius: int) -> list[int]:
    """Neighbors y of x whose edge {x, y} must be cut."""
    dist = _bfs_depths(adj, x, radius)
    claimed: set = set()
    cut = []
    for y in sorted(adj[x]):
        branch = _bfs_depths(adj, y, radius - 1, blocked=x)
        ok = all(dist.get(v) == k + 1 for v, k in branch.items())
        if ok:
            inner = 0
            for v in branch:
                for w in adj[v]:
                    if w in branch:
                        inner += 1
                    elif w in claimed:
                        ok = False
                        break
                if not ok:
                    break
            ok = ok and inner // 2 == len(branch) - 1 and claimed.isdisjoint(branch)
        if ok:
            claimed.update(branch)
        else:
            cut.append(y)
    return cut


class _Working:
    """CSR adjacency with a liveness mask for O(deg) edge deletion."""

    def __init__(self, a: sp.csr_matrix):
        self.indptr = a.indptr
        self.indices = a.indices.astype(np.int64)
        self.alive = np.ones(self.indices.size, dtype=bool)
        self.removed: set = set()

    def _pos(self, u: int, v: int) -> int:
        lo, hi = self.indptr[u], self.indptr[u + 1]
        return lo + int(np.searchsorted(self.indices[lo:hi], v))

    def cut(self, u: int, v: int) -> bool:
        key = (u, v) if u < v else (v, u)
        if key in self.removed:
            return False
        self.removed.add(key)
        self.alive[self._pos(u, v)] = False
        self.alive[self._pos(v, u)] = False
        return True

    def bfs(self, src: int, radius: int):
        """Levels and lowest-id parents of a truncated BFS in the live graph."""
        parent = {src: -1}
        levels = [[src]]
        frontier = [src]
        for _ in range(radius):
            nxt = []
            for u in frontier:  # frontier is ascending, so first discovery = lowest parent
                lo, hi = self.indptr[u], self.indptr[u + 1]
                nb = self.indices[lo:hi][self.alive[lo:hi]]
                for v in nb.tolist():
                    if v not in parent:
                        parent[v] = u
                        nxt.append(v)
            nxt.sort()
            if not nxt:
                break
            levels.append(nxt)
            frontier = nxt
        return levels, parent


def prune(g: GraphSample, tau: float, r_star: int) -> PrunedGraph:
    """Build the pruned graph 𝔾_τ (see module docstring for the algorithm)."""
    if tau <= 1:
        raise ParameterError("tau must be > 1")
    if r_star < 1:
        raise ParameterError("r_star must be >= 1")
    v_tau = select_v_tau(normalized_degrees(g), tau)
    work = _Working(g.adjacency)
    if v_tau.size:
        adj = [work.indices[work.indptr[u]:work.indptr[u + 1]].tolist() for u in range(g.n)]
        radius = 2 * r_star
        for x in v_tau.tolist():
            for y in _phase_one(adj, x, radius):
                work.cut(x, y)
        in_v = np.zeros(g.n, dtype=bool)
        in_v[v_tau] = True
        changed = True
        while changed:
            changed = False
            for x in v_tau.tolist():
                levels, parent = work.bfs(x, 2 * radius)
                hits = [z for lev in levels[1:] for z in lev if in_v[z]]
                for z in hits:
                    path = [z]
                    while path[-1] != x:
                        path.append(parent[path[-1]])
                    for u, v in zip(path[:-1], path[1:]):
                        if in_v[u] or in_v[v]:
                            changed |= work.cut(u, v)
    removed = np.array(sorted(work.removed), dtype=np.int64).reshape(-1, 2)
    rows = np.repeat(np.arange(g.n), np.diff(work.indptr))[work.alive]
    counts = np.bincount(rows, minlength=g.n)
    kept = sp.csr_matrix((np.ones(rows.size), work.indices[work.alive],
                          np.concatenate([[0], np.cumsum(counts)])), shape=(g.n, g.n))
    return PrunedGraph(g, float(tau), int(r_star), v_tau, removed, kept)


def _induced_edge_count(a: sp.csr_matrix, verts: np.ndarray) -> int:
    sub = a[verts][:, verts]
    return int(sub.nnz // 2)


def verify_pruning(p: PrunedGraph) -> PropertyReport:
    """Check properties (i)–(iv) exactly and compute statistics (v)–(vi)."""
    n, R = p.n, 2 * p.r_star
    in_v = np.zeros(n, dtype=bool)
    in_v[p.v_tau] = True
    separated = trees = nested = disjoint = True
    owner = np.full(n, -1, dtype=np.int64)
    loss = 0.0
    for x in p.v_tau.tolist():
        far = ball_and_spheres(p, x, 2 * R)
        reach = np.concatenate(far[1:]) if len(far) > 1 else np.zeros(0, dtype=np.int64)
        if np.any(in_v[reach]):
            separated = False
        ball = np.concatenate(far[:R + 1])
        if np.any(owner[ball] >= 0):
            disjoint = False
        owner[ball] = x
        if _induced_edge_count(p.adjacency, ball) != ball.size - 1:
            trees = False
        full = ball_and_spheres(p.base, x, R)
        for i in range(1, R + 1):
            if not np.all(np.isin(far[i], full[i], assume_unique=True)):
                nested = False
            if i >= 2:
                lost = np.setdiff1d(full[i], far[i], assume_unique=True).size
                loss = max(loss, lost * p.d ** (2 - i))
    rem = p.removed_edges
    incident = bool(np.all(in_v[rem[:, 0]] | in_v[rem[:, 1]])) if rem.size else True
    if rem.size:
        base = p.base.adjacency
        subset = bool(np.all(np.asarray(base[rem[:, 0], rem[:, 1]]).ravel() == 1))
        max_deg = int(np.bincount(rem.ravel(), minlength=n).max())
    else:
        subset, max_deg = True, 0
    return PropertyReport(separated, trees, incident, nested, max_deg, float(loss), disjoint, subset)


def export_removed(p: PrunedGraph, path) -> Path:
    header = f"# pruned tau={p.tau!r} r_star={p.r_star}"
    return write_edgelist(p.base, path, header=header, edges=p.removed_edges)
