"""Erdős–Rényi samples, scaled matrices, BFS geometry and component census."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ParameterError

__all__ = [
    "GraphSample",
    "DegreeProfile",
    "ScaledMatrix",
    "ComponentCensus",
    "generate_er",
    "from_edges",
    "build_scaled_matrix",
    "normalized_degrees",
    "ball_and_spheres",
    "components_census",
    "small_component_norm",
    "write_edgelist",
    "read_edgelist",
    "gather_neighbors",
    "SCALED_KINDS",
]

# Rows per independently keyed RNG stream. Changing it changes every sample.
ROW_BLOCK = 512

SCALED_KINDS = ("adjacency_over_sqrt_d", "centered_H", "sparse_wigner")


@dataclass(frozen=True, eq=False)
class GraphSample:
    """A simple undirected graph on ``range(n)`` with its sampling metadata.

    ``edges`` holds each edge once as ``(u, v)`` with ``u < v``, sorted
    lexicographically; ``adjacency`` is the matching symmetric CSR matrix.
    """

    n: int
    d: float
    seed: int | None
    edges: np.ndarray
    adjacency: sp.csr_matrix = field(repr=False)

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    def neighbors(self, x: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[x]:a.indptr[x + 1]]


@dataclass(frozen=True, eq=False)
class DegreeProfile:
    degree: np.ndarray
    d: float

    @property
    def alpha(self) -> np.ndarray:
        # d = 0 only for the empty graph, where every α_x is 0
        if self.d == 0:
            return np.zeros(self.degree.shape)
        return self.degree / self.d


@dataclass(frozen=True, eq=False)
class ScaledMatrix:
    """A real symmetric matrix ``entries − shift·(J − I)``.

    ``shift`` is nonzero only for ``centered_H``, where it carries 𝔼A/√d
    without materializing the dense rank-one part. ``f`` is the coefficient
    of e e* in the decomposition M = H + f e e* used by the local law.
    """

    kind: str
    entries: sp.csr_matrix
    d: float
    shift: float = 0.0
    f: float = 0.0

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.entries @ v
        if self.shift:
            out = out - self.shift * (v.sum(axis=0) - v)
        return out

    def to_dense(self) -> np.ndarray:
        m = self.entries.toarray()
        if self.shift:
            m = m - self.shift
            np.fill_diagonal(m, m.diagonal() + self.shift)
        return m


@dataclass(frozen=True, eq=False)
class ComponentCensus:
    components: list
    labels: np.ndarray
    is_tree: list
    giant_index: int = 0

    @property
    def giant(self) -> np.ndarray:
        return self.components[self.giant_index]


def _csr_from_edges(n: int, edges: np.ndarray) -> sp.csr_matrix:
    if edges.size == 0:
        return sp.csr_matrix((n, n), dtype=np.float64)
    u, v = edges[:, 0], edges[:, 1]
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    a = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    a.sort_indices()
    return a


def from_edges(n: int, edges, d: float | None = None, seed: int | None = None) -> GraphSample:
    """Build a sample from an explicit edge list (duplicates and orientation ignored)."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if e.size and (e.min() < 0 or e.max() >= n):
        raise ParameterError("edge endpoint out of range")
    if np.any(e[:, 0] == e[:, 1]):
        raise ParameterError("self-loops are not allowed")
    e = np.sort(e, axis=1)
    e = np.unique(e, axis=0) if e.size else e.reshape(0, 2)
    if d is None:
        d = 2.0 * e.shape[0] / n if n else 0.0
    return GraphSample(n, float(d), seed, e, _csr_from_edges(n, e))


def _row_offsets(n: int, rows: np.ndarray) -> np.ndarray:
    # linear index of pair (i, i+1) in row-major upper-triangle order
    return rows * n - rows * (rows + 1) // 2


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


def generate_er(n: int, d: float, seed: int) -> GraphSample:
    """Sample G(n, d/n).

    Each block of ``ROW_BLOCK`` rows gets its own Philox stream keyed by
    ``(seed, block)``. Within a block the upper-triangle pairs form one
    contiguous index range; a binomial count followed by a uniform subset
    of that size gives independent Bernoulli(d/n) indicators for every pair.
    """
    if n < 0:
        raise ParameterError("n must be nonnegative")
    if not (0.0 <= d <= n):
        raise ParameterError(f"need 0 <= d <= n, got d={d}, n={n}")
    p = d / n if n else 0.0
    offsets = _row_offsets(n, np.arange(n, dtype=np.int64))
    chunks = []
    for block, i0 in enumerate(range(0, max(n - 1, 0), ROW_BLOCK)):
        i1 = min(i0 + ROW_BLOCK, n - 1)
        start = int(offsets[i0])
        stop = int(offsets[i1])
        size = stop - start
        if size <= 0 or p == 0.0:
            continue
        rng = _block_rng(int(seed), block)
        k = int(rng.binomial(size, p)) if p < 1.0 else size
        if k == 0:
            continue
        lin = np.sort(rng.choice(size, size=k, replace=False)) + start
        i = np.searchsorted(offsets, lin, side="right") - 1
        j = lin - offsets[i] + i + 1
        chunks.append(np.stack([i, j], axis=1))
    edges = np.concatenate(chunks) if chunks else np.zeros((0, 2), dtype=np.int64)
    return GraphSample(n, float(d), int(seed), edges, _csr_from_edges(n, edges))


def normalized_degrees(g: GraphSample) -> DegreeProfile:
    return DegreeProfile(g.degree.astype(np.int64), g.d)


def build_scaled_matrix(g: GraphSample, kind: str = "adjacency_over_sqrt_d",
                        wigner_seed: int | None = None) -> ScaledMatrix:
    """Scale the adjacency by 1/√d, optionally centering or applying ±1 weights."""
    if kind not in SCALED_KINDS:
        raise ParameterError(f"unknown kind {kind!r}; valid kinds: {', '.join(SCALED_KINDS)}")
    n, d = g.n, g.d
    scale = 1.0 / math.sqrt(d) if d > 0 else 0.0
    a = g.adjacency
    if kind == "adjacency_over_sqrt_d":
        return ScaledMatrix(kind, (a * scale).tocsr(), d, 0.0, math.sqrt(d))
    if kind == "centered_H":
        return ScaledMatrix(kind, (a * scale).tocsr(), d, math.sqrt(d) / n if n else 0.0, 0.0)
    seed = 0 if wigner_seed is None else int(wigner_seed)
    rng = _block_rng(seed, 2**32 - 1)
    signs = rng.integers(0, 2, size=g.edge_count) * 2.0 - 1.0
    e = g.edges
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    vals = np.concatenate([signs, signs]) * scale
    w = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    w.sort_indices()
    return ScaledMatrix(kind, w, d, 0.0, 0.0)


# --- BFS geometry ----------------------------------------------------------

def gather_neighbors(indptr: np.ndarray, indices: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Concatenated CSR neighbor lists of ``verts`` (with repetitions)."""
    verts = np.asarray(verts, dtype=np.int64)
    if verts.size == 0:
        return np.zeros(0, dtype=indices.dtype)
    starts = indptr[verts]
    lens = indptr[verts + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=indices.dtype)
    shift = np.repeat(starts - np.cumsum(lens) + lens, lens)
    return indices[shift + np.arange(total)]


def ball_and_spheres(g, x: int, r: int) -> list[np.ndarray]:
    """Spheres S_0(x), …, S_r(x) of the graph (each sorted ascending).

    ``g`` is anything exposing a symmetric CSR ``adjacency`` (a
    :class:`GraphSample` or a pruned graph).
    """
    if r < 0:
        raise ParameterError("radius must be nonnegative")
    a = g.adjacency
    n = a.shape[0]
    if not (0 <= x < n):
        raise ParameterError("vertex out of range")
    seen = np.zeros(n, dtype=bool)
    seen[x] = True
    frontier = np.array([x], dtype=np.int64)
    spheres = [frontier]
    for _ in range(r):
        nb = gather_neighbors(a.indptr, a.indices, frontier)
        nb = np.unique(nb[~seen[nb]]).astype(np.int64)
        seen[nb] = True
        spheres.append(nb)
        frontier = nb
    return spheres


# --- components --------------------------------------------------------------

def components_census(g: GraphSample) -> ComponentCensus:
    """Connected components sorted by size (descending), ties by smallest vertex."""
    n = g.n
    if n == 0:
        return ComponentCensus([], np.zeros(0, dtype=np.int64), [])
    ncomp, labels = connected_components(g.adjacency, directed=False)
    sizes = np.bincount(labels, minlength=ncomp)
    edge_counts = np.bincount(labels, weights=g.degree, minlength=ncomp) / 2
    first = np.full(ncomp, n, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(n))
    order = np.lexsort((first, -sizes))
    rank = np.empty(ncomp, dtype=np.int64)
    rank[order] = np.arange(ncomp)
    new_labels = rank[labels]
    members = np.argsort(new_labels, kind="stable")
    bounds = np.concatenate([[0], np.cumsum(sizes[order])])
    comps = [members[bounds[k]:bounds[k + 1]] for k in range(ncomp)]
    is_tree = [bool(edge_counts[c] == sizes[c] - 1) for c in order]
    return ComponentCensus(comps, new_labels, is_tree)


def small_component_norm(g: GraphSample, census: ComponentCensus) -> float:
    """max over non-giant components of ‖A restricted to it‖/√d."""
    best = 0.0
    a = g.adjacency
    for comp in census.components[1:]:
        k = comp.size
        if k < 2:
            continue
        if k == 2:
            val = 1.0
        else:
            block = a[comp][:, comp].toarray()
            val = float(np.max(np.abs(np.linalg.eigvalsh(block))))
        best = max(best, val)
    return best / math.sqrt(g.d) if g.d > 0 else 0.0


# --- serialization -----------------------------------------------------------

def write_edgelist(g: GraphSample, path, header: str | None = None, edges=None) -> Path:
    path = Path(path)
    e = g.edges if edges is None else np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if header is None:
        header = f"# n={g.n} d={g.d!r} seed={g.seed}"
    lines = [header] + [f"{u} {v}" for u, v in e.tolist()]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_edgelist(path) -> GraphSample:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise ParameterError(f"{path}: missing '# n=... d=... seed=...' header")
    meta = dict(tok.split("=", 1) for tok in text[0][1:].split() if "=" in tok)
    try:
        n = int(meta["n"])
        d = float(meta["d"])
    except (KeyError, ValueError) as exc:
        raise ParameterError(f"{path}: malformed header {text[0]!r}") from exc
    seed = meta.get("seed")
    seed = None if seed in (None, "None") else int(seed)
    rows = [ln.split() for ln in text[1:] if ln.strip() and not ln.startswith("#")]
    edges = np.array([[int(u), int(v)] for u, v in rows], dtype=np.int64).reshape(-1, 2)
    return from_edges(n, edges, d=d, seed=seed)
