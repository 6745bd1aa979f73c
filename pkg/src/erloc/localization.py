"""Localization exponents, resonant sets, overlaps, rigidity pairing and scatter data."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, ParameterError
from .exponents import Lambda, xi_u
from .graph import DegreeProfile, GraphSample, components_census
from .spectra import DENSE_CUTOFF, EigenDecomposition, eig_sym

__all__ = [
    "ResonantSet",
    "LocalizationReport",
    "gamma_exponent",
    "lp_norms",
    "resonant_set",
    "default_delta",
    "predicted_center_mass",
    "overlap_report",
    "rigidity_pairing",
    "scatter_rows",
    "scatter_data",
]


def gamma_exponent(w: np.ndarray, n: int | None = None) -> float:
    """γ(w) = −log(‖w‖∞²)/log N for a unit vector w."""
    w = np.asarray(w)
    n = w.size if n is None else n
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        raise DomainError("zero vector has no localization exponent")
    if abs(norm - 1.0) > 1e-8:
        raise DomainError(f"vector must be normalized, got norm {norm}")
    return -2.0 * math.log(float(np.max(np.abs(w)))) / math.log(n)


def lp_norms(w: np.ndarray) -> dict:
    a = np.abs(np.asarray(w))
    return {2: float(np.sqrt(np.sum(a ** 2))), 4: float(np.sum(a ** 4) ** 0.25),
            "inf": float(a.max())}


@dataclass(frozen=True, eq=False)
class ResonantSet:
    lam: float
    delta: float
    vertices: np.ndarray


def resonant_set(profile: DegreeProfile, lam: float, delta: float) -> ResonantSet:
    """𝒲_{λ,δ} = {x : α_x ≥ 2, |Λ(α_x) − λ| ≤ δ}."""
    if not lam > 2:
        raise ParameterError("resonant sets need lambda > 2")
    if not (0 < delta <= lam - 2):
        raise ParameterError(f"delta must lie in (0, lambda - 2], got {delta}")
    alpha = profile.alpha
    big = np.flatnonzero(alpha >= 2.0)
    lam_x = alpha[big] / np.sqrt(alpha[big] - 1.0)
    return ResonantSet(float(lam), float(delta), big[np.abs(lam_x - lam) <= delta])


def default_delta(lam: float) -> float:
    """max(0.05, (λ−2)/2), capped at λ − 2."""
    gap = abs(lam) - 2.0
    return min(max(0.05, gap / 2.0), gap)


def predicted_center_mass(lam: float) -> float:
    """√(λ²−4)/(λ + √(λ²−4)) for |λ| ≥ 2."""
    lam = abs(lam)
    if lam < 2:
        raise DomainError("predicted center mass needs |lambda| >= 2")
    s = math.sqrt(lam * lam - 4.0)
    return s / (lam + s)


@dataclass(frozen=True)
class LocalizationReport:
    eigenvalue: float
    gamma: float
    lp_norms: dict
    overlap: float
    center_mass: float
    predicted_center_mass: float

    def row(self) -> tuple:
        return (self.eigenvalue, self.gamma, self.overlap, self.center_mass,
                self.predicted_center_mass)


def overlap_report(w: np.ndarray, lam: float, profiles, resonant: ResonantSet) -> LocalizationReport:
    """Overlap of w with the profiles at resonant vertices and mass on 𝒲."""
    w = np.asarray(w, dtype=float)
    overlap = 0.0
    for prof in profiles:
        overlap += float(np.dot(prof.values, w[prof.indices])) ** 2
    mass = float(np.sum(w[resonant.vertices] ** 2))
    return LocalizationReport(float(lam), gamma_exponent(w), lp_norms(w), overlap, mass,
                              predicted_center_mass(lam))


def _sigma_order(alpha: np.ndarray) -> np.ndarray:
    # α descending, ascending vertex id among ties
    return np.lexsort((np.arange(alpha.size), -alpha))


def rigidity_pairing(eigs: EigenDecomposition, profile: DegreeProfile, xi: float) -> dict:
    """Pair λ_{i+1} with Λ(α_{σ(i)}) and λ_{N−i+1} with −Λ(α_{σ(i)}) for x ∈ 𝒰.

    Ranks are 1-based in the returned rows. ``eigs`` may be a full or an
    extremal decomposition; the needed ranks must be present.
    """
    n = eigs.n
    alpha = profile.alpha
    thr = 2.0 + math.sqrt(xi)
    lam_all = np.where(alpha >= 2.0, alpha / np.sqrt(np.maximum(alpha - 1.0, 1e-300)), 0.0)
    order = _sigma_order(alpha)
    U = [int(x) for x in order if lam_all[x] >= thr]
    by_rank = dict(zip(eigs.ranks.tolist(), eigs.values.tolist()))

    def value(rank1: int) -> float:
        if (rank1 - 1) not in by_rank:
            raise ParameterError(f"eigenvalue of rank {rank1} not in decomposition")
        return by_rank[rank1 - 1]

    rows = []
    for i, x in enumerate(U, start=1):
        lam = Lambda(alpha[x])
        ref = xi + xi_u(n, profile.d, lam - 2.0)
        top, bot = value(i + 1), value(n - i + 1)
        rows.append({"rank": i + 1, "eigenvalue": top, "predicted": lam,
                     "abs_gap": abs(top - lam), "reference": ref, "vertex": x})
        rows.append({"rank": n - i + 1, "eigenvalue": bot, "predicted": -lam,
                     "abs_gap": abs(bot + lam), "reference": ref, "vertex": x})
    k = len(U)
    lo, hi = k + 2, n - k
    bulk = max(abs(value(lo)), abs(value(hi))) if lo <= hi else 0.0
    tops = sorted((r, v) for r, v in by_rank.items() if r >= 1)
    above = sum(1 for r, v in tops if v > thr)
    # the count is exact only if some stored nontrivial eigenvalue falls below thr
    contiguous = [v for r, v in tops if r < n // 2]
    truncated = bool(contiguous) and min(contiguous) > thr and eigs.method != "dense"
    gaps = [r["abs_gap"] for r in rows]
    consts = [r["abs_gap"] / r["reference"] for r in rows]
    return {
        "threshold": thr,
        "n_U": k,
        "count_above": above,
        "count_truncated": truncated,
        "pairs": rows,
        "bulk_max": bulk,
        "median_gap": float(np.median(gaps)) if gaps else None,
        "median_constant": float(np.median(consts)) if consts else None,
    }


def scatter_rows(eigs: EigenDecomposition) -> list[tuple]:
    return [(float(v), float(w)) for v, w in zip(eigs.values, eigs.inf_norms())]


def scatter_data(g: GraphSample, giant_only: bool = True, k_edge: int = 20,
                 window: tuple = (0.5, 1.5), dense_cutoff: int = DENSE_CUTOFF) -> dict:
    """Eigenvalues and eigenvector ∞-norms of A/√d for a scatter plot.

    Up to ``dense_cutoff`` vertices the full spectrum is used. Above it, the
    edges come from Lanczos (``k_edge`` pairs at each end) and the bulk from
    a dense partial decomposition restricted to ``window``.
    """
    a = g.adjacency
    if giant_only:
        census = components_census(g)
        keep = census.giant
        a = a[keep][:, keep]
    m = (a / math.sqrt(g.d)).tocsr()
    n = m.shape[0]
    if n <= dense_cutoff:
        e = eig_sym(m, "dense")
        return {"eigenvalue": e.values, "inf_norm": e.inf_norms(),
                "region": np.array(["full"] * n), "n": n, "method": "dense"}
    edge = eig_sym(m, "extremal", k=k_edge)
    w, v = sla.eigh(m.toarray(), subset_by_value=window, driver="evr", check_finite=False)
    inf = np.max(np.abs(v), axis=0) if w.size else np.zeros(0)
    vals = np.concatenate([edge.values, w[::-1]])
    infs = np.concatenate([edge.inf_norms(), inf[::-1]])
    region = np.array(["edge"] * edge.values.size + ["window"] * w.size)
    order = np.argsort(-vals, kind="stable")
    return {"eigenvalue": vals[order], "inf_norm": infs[order], "region": region[order],
            "n": n, "method": "extremal+window"}
