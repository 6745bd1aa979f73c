"""Localization profiles and the pruned / block-diagonal operators built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .errors import DegenerateSupportError, DomainError
from .exponents import Lambda
from .graph import GraphSample, ball_and_spheres
from .pruning import PrunedGraph
from .spectra import DENSE_CUTOFF, spectral_norm

__all__ = [
    "LocalizationProfile",
    "PrunedOperators",
    "profile_weights",
    "build_profile",
    "tail_masses",
    "build_pruned_operators",
    "profile_residual",
    "approximation_report",
    "ihara_bass_check",
    "ihara_bass_margin",
]


def profile_weights(alpha_x: float, r_star: int) -> np.ndarray:
    """Radial weights u_0, …, u_{r⋆} with Σ u_i² = 1.

    u_i = √α (α−1)^{−i/2} u_0 for 1 ≤ i < r⋆ and u_{r⋆} = (α−1)^{−(r⋆−1)/2} u_0;
    the last weight makes the σ = ± profiles orthogonal.
    """
    if alpha_x <= 1:
        raise DomainError(f"profile weights need alpha > 1, got {alpha_x}")
    if r_star < 1:
        raise DomainError("r_star must be >= 1")
    i = np.arange(r_star + 1, dtype=float)
    u = math.sqrt(alpha_x) * (alpha_x - 1.0) ** (-i / 2)
    u[0] = 1.0
    u[r_star] = (alpha_x - 1.0) ** (-(r_star - 1) / 2)
    return u / math.sqrt(np.sum(u * u))


@dataclass(frozen=True, eq=False)
class LocalizationProfile:
    x: int
    sigma: int
    alpha: float
    weights: np.ndarray
    support: list = field(repr=False)

    @property
    def indices(self) -> np.ndarray:
        return np.concatenate(self.support)

    @property
    def values(self) -> np.ndarray:
        parts = [np.full(s.size, (self.sigma ** i) * u / math.sqrt(s.size))
                 for i, (u, s) in enumerate(zip(self.weights, self.support))]
        return np.concatenate(parts)

    def dense(self, n: int) -> np.ndarray:
        v = np.zeros(n)
        v[self.indices] = self.values
        return v


def build_profile(p: PrunedGraph, x: int, sigma: int) -> LocalizationProfile:
    """Profile v^τ_σ(x) on the spheres of the pruned graph around x."""
    if sigma not in (1, -1):
        raise DomainError("sigma must be +1 or -1")
    alpha = p.base.degree[x] / p.d
    spheres = ball_and_spheres(p, x, p.r_star)
    for i, s in enumerate(spheres):
        if s.size == 0:
            raise DegenerateSupportError(f"sphere S_{i}({x}) of the pruned graph is empty")
    return LocalizationProfile(int(x), sigma, float(alpha), profile_weights(alpha, p.r_star), spheres)


def tail_masses(prof: LocalizationProfile, g: GraphSample) -> np.ndarray:
    """Σ_{y ∉ B_r(x)} v_y² for r = 0, …, r⋆, with balls taken in ``g``."""
    r_max = len(prof.support) - 1
    spheres = ball_and_spheres(g, prof.x, r_max)
    dist = {}
    for i, s in enumerate(spheres):
        for y in s.tolist():
            dist[y] = i
    far = r_max + 1
    dy = np.array([dist.get(y, far) for y in prof.indices.tolist()])
    v2 = prof.values ** 2
    return np.array([float(v2[dy > r].sum()) for r in range(r_max + 1)])


@dataclass(eq=False)
class PrunedOperators:
    """H, H^τ, χ^τ, Π^τ and Ĥ^τ for one pruned graph.

    Dense matrices are held when N ≤ 4096; otherwise only matvecs.
    """

    n: int
    d: float
    tau: float
    r_star: int
    seed: int | None
    chi: np.ndarray
    profiles: list
    energies: np.ndarray
    P: sp.csc_matrix
    A: sp.csr_matrix = field(repr=False)
    A_tau: sp.csr_matrix = field(repr=False)
    degenerate: list = field(default_factory=list)
    dense: dict | None = field(default=None, repr=False)

    # matvecs; 𝔼A/√d = c(J − I) with c = √d/N is applied through vector sums
    def _c(self) -> float:
        return math.sqrt(self.d) / self.n

    def H(self, v: np.ndarray) -> np.ndarray:
        return self.A @ v / math.sqrt(self.d) - self._c() * (v.sum(axis=0) - v)

    def H_tau(self, v: np.ndarray) -> np.ndarray:
        chi = self.chi if v.ndim == 1 else self.chi[:, None]
        cv = chi * v
        return self.A_tau @ v / math.sqrt(self.d) - chi * self._c() * (cv.sum(axis=0) - cv)

    def Pi(self, v: np.ndarray) -> np.ndarray:
        return self.P @ (self.P.T @ v)

    def H_hat(self, v: np.ndarray) -> np.ndarray:
        e = self.energies if v.ndim == 1 else self.energies[:, None]
        w = v - self.Pi(v)
        w = self.H_tau(w)
        return self.P @ (e * (self.P.T @ v)) + w - self.Pi(w)

    def operator(self, fn) -> LinearOperator:
        return LinearOperator((self.n, self.n), matvec=fn, matmat=fn, dtype=float)


def _dense_ops(ops: PrunedOperators) -> dict:
    n, c = ops.n, ops._c()
    H = ops.A.toarray() / math.sqrt(ops.d) - c
    H[np.diag_indices(n)] += c
    chi = ops.chi
    Ht = ops.A_tau.toarray() / math.sqrt(ops.d)
    Ht -= c * np.outer(chi, chi)
    Ht[np.diag_indices(n)] += c * chi
    Pd = ops.P.toarray()
    Pi = Pd @ Pd.T
    comp = np.eye(n) - Pi
    block = comp @ Ht @ comp
    block = 0.5 * (block + block.T)
    Hh = (Pd * ops.energies) @ Pd.T + block
    return {"H": H, "H_tau": Ht, "Pi": Pi, "block": block, "H_hat": Hh}


def build_pruned_operators(g: GraphSample, p: PrunedGraph, xi: float,
                           dense: bool | None = None) -> PrunedOperators:
    """Assemble the pruned operators with 𝒱 = {x ∈ 𝒱_τ : α_x ≥ 2 + ξ^{1/4}}."""
    n = g.n
    R = 2 * p.r_star
    chi = np.ones(n)
    for x in p.v_tau.tolist():
        chi[np.concatenate(ball_and_spheres(p, x, R))] = 0.0
    alpha = g.degree / g.d
    threshold = 2.0 + xi ** 0.25
    centers = [x for x in p.v_tau.tolist() if alpha[x] >= threshold]
    profiles, energies, degenerate = [], [], []
    for x in centers:
        try:
            pair = [build_profile(p, x, s) for s in (1, -1)]
        except DegenerateSupportError:
            degenerate.append(x)
            continue
        for prof in pair:
            profiles.append(prof)
            energies.append(prof.sigma * Lambda(prof.alpha))
    if profiles:
        rows = np.concatenate([pr.indices for pr in profiles])
        cols = np.concatenate([np.full(pr.indices.size, k) for k, pr in enumerate(profiles)])
        vals = np.concatenate([pr.values for pr in profiles])
        P = sp.csc_matrix((vals, (rows, cols)), shape=(n, len(profiles)))
    else:
        P = sp.csc_matrix((n, 0))
    ops = PrunedOperators(n, g.d, p.tau, p.r_star, g.seed, chi, profiles,
                          np.array(energies, dtype=float), P, g.adjacency, p.adjacency,
                          degenerate)
    if dense is None:
        dense = n <= DENSE_CUTOFF
    if dense:
        ops.dense = _dense_ops(ops)
    return ops


def profile_residual(ops: PrunedOperators, prof: LocalizationProfile) -> float:
    """‖(H^τ − σΛ(α_x)) v‖₂."""
    v = prof.dense(ops.n)
    return float(np.linalg.norm(ops.H_tau(v) - prof.sigma * Lambda(prof.alpha) * v))


def _norm(ops: PrunedOperators, dense_key, fn) -> float:
    if ops.dense is not None:
        m = dense_key(ops.dense)
        return float(np.max(np.abs(np.linalg.eigvalsh(m)))) if m.size else 0.0
    return spectral_norm(ops.operator(fn))


def approximation_report(ops: PrunedOperators) -> dict:
    """Spectral norms ‖H − H^τ‖, ‖H^τ − Ĥ^τ‖, ‖(I−Π)H^τ(I−Π)‖ and the 2τ reference."""
    def comp(v):
        w = ops.H_tau(v - ops.Pi(v))
        return w - ops.Pi(w)

    return {
        "norm_h_htau": _norm(ops, lambda D: D["H"] - D["H_tau"], lambda v: ops.H(v) - ops.H_tau(v)),
        "norm_htau_hhat": _norm(ops, lambda D: D["H_tau"] - D["H_hat"],
                                lambda v: ops.H_tau(v) - ops.H_hat(v)),
        "norm_complement_block": _norm(ops, lambda D: D["block"], comp),
        "tau": ops.tau,
        "r_star": ops.r_star,
        "seed": ops.seed,
        "two_tau": 2.0 * ops.tau,
    }


def ihara_bass_margin(H: np.ndarray, alpha: np.ndarray, d: float, c: float = 1.0,
                      absolute: bool = False) -> float:
    """Smallest eigenvalue of I + (1 + 2d^{−1/2})Q + c·max(log N/d², d^{−1/2}) − H.

    With ``absolute=True`` the matrix |H| replaces H, the two-sided form.
    """
    n = H.shape[0]
    if absolute:
        w, V = np.linalg.eigh(H)
        H = (V * np.abs(w)) @ V.T
    shift = 1.0 + c * max(math.log(n) / d**2, d ** -0.5)
    B = np.diag(shift + (1.0 + 2.0 / math.sqrt(d)) * np.asarray(alpha, dtype=float)) - H
    return float(np.linalg.eigvalsh(0.5 * (B + B.T))[0])


def ihara_bass_check(ops: PrunedOperators, alpha: np.ndarray, c: float = 1.0,
                     absolute: bool = False) -> float:
    """Margin of the quadratic-form upper bound on H (see :func:`ihara_bass_margin`)."""
    H = ops.dense["H"] if ops.dense is not None else _dense_ops(ops)["H"]
    return ihara_bass_margin(H, alpha, ops.d, c, absolute)
