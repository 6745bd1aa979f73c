"""Symmetric eigensolvers, tridiagonalization around a vertex, Z(α), tree norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .errors import ContractError, DomainError, NumericError, ParameterError
from .exponents import Lambda

__all__ = [
    "EigenDecomposition",
    "TridiagMatrix",
    "DENSE_CUTOFF",
    "as_operator",
    "eig_sym",
    "lanczos_extremal",
    "spectral_norm",
    "tridiagonalize",
    "z_alpha_matrix",
    "regular_tree",
    "tree_norm_check",
    "spectrum_rows",
]

DENSE_CUTOFF = 4096
BREAKDOWN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenpairs sorted by descending eigenvalue.

    ``ranks`` gives the 0-based position of each stored pair in the full
    descending spectrum of the ``n``-dimensional operator; for dense
    decompositions it is simply ``arange(n)``.
    """

    values: np.ndarray
    vectors: np.ndarray | None
    method: str
    n: int
    ranks: np.ndarray

    def inf_norms(self) -> np.ndarray:
        if self.vectors is None:
            raise ContractError("decomposition holds no eigenvectors")
        return np.max(np.abs(self.vectors), axis=0)

    def residuals(self, m) -> np.ndarray:
        apply, _ = as_operator(m)
        w = self.vectors
        return np.linalg.norm(apply(w) - w * self.values, axis=0)


@dataclass(frozen=True, eq=False)
class TridiagMatrix:
    diag: np.ndarray
    offdiag: np.ndarray
    origin: object = None
    breakdown: bool = False
    basis: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def eigh(self):
        """Ascending eigenvalues and eigenvectors."""
        if self.size == 1:
            return self.diag.copy(), np.ones((1, 1))
        return eigh_tridiagonal(self.diag, self.offdiag)

    def top_eigenvalue(self) -> float:
        if self.size == 1:
            return float(self.diag[0])
        return float(eigh_tridiagonal(self.diag, self.offdiag, eigvals_only=True,
                                      select="i", select_range=(self.size - 1, self.size - 1))[0])


# --- operator plumbing -------------------------------------------------------

def as_operator(m):
    """Return ``(apply, n)`` where ``apply`` maps (n,) or (n, k) arrays."""
    if hasattr(m, "matvec") and hasattr(m, "entries"):
        return m.matvec, m.n
    if sp.issparse(m):
        m = m.tocsr()
        return (lambda v: m @ v), m.shape[0]
    if isinstance(m, np.ndarray):
        return (lambda v: m @ v), m.shape[0]
    if callable(getattr(m, "matvec", None)) and hasattr(m, "shape"):
        return (lambda v: m.matvec(v) if v.ndim == 1 else m.matmat(v)), m.shape[0]
    raise ContractError(f"unsupported operator type {type(m).__name__}")


def _to_dense(m) -> np.ndarray:
    if hasattr(m, "to_dense"):
        return m.to_dense()
    if sp.issparse(m):
        return m.toarray()
    return np.asarray(m, dtype=float)


def _check_symmetric(m, tol: float = 1e-12) -> None:
    if hasattr(m, "entries"):
        m = m.entries
    if sp.issparse(m):
        diff = abs(m - m.T)
        scale = abs(m).max() if m.nnz else 0.0
        bad = diff.max() if diff.nnz else 0.0
    elif isinstance(m, np.ndarray):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractError("matrix must be square")
        scale = np.max(np.abs(m)) if m.size else 0.0
        bad = np.max(np.abs(m - m.T)) if m.size else 0.0
    else:
        return
    if bad > tol * max(scale, 1.0):
        raise ContractError(f"matrix is not symmetric (max asymmetry {bad:.3e})")


# --- Lanczos -----------------------------------------------------------------

def lanczos_extremal(m, k: int, tol: float = 1e-8, seed: int = 0,
                     max_dim: int | None = None, check_every: int = 10):
    """k largest and k smallest eigenpairs by Lanczos with full reorthogonalization.

    The Krylov space grows until every wanted Ritz pair has a true residual
    below ``tol`` times the largest Ritz value magnitude. On breakdown the
    iteration restarts with a fresh random direction orthogonal to the basis,
    which lets repeated eigenvalues enter.

    Returns ``(values, vectors)`` with values in descending order; ``2k``
    pairs unless the space is exhausted first.
    """
    apply, n = as_operator(m)
    if k < 1:
        raise ParameterError("k must be >= 1")
    max_dim = n if max_dim is None else min(max_dim, n)
    rng = np.random.default_rng(seed)
    cap = min(max_dim, 64)
    Q = np.empty((cap, n))
    alphas: list[float] = []
    betas: list[float] = []

    def fresh(j):
        v = rng.standard_normal(n)
        for _ in range(2):
            if j:
                v -= Q[:j].T @ (Q[:j] @ v)
        nv = np.linalg.norm(v)
        return v / nv if nv > 0 else None

    q = fresh(0)
    beta_prev = 0.0
    j = 0
    while True:
        if j == cap:
            cap = min(max_dim, 2 * cap)
            Q = np.concatenate([Q, np.empty((cap - Q.shape[0], n))])
        Q[j] = q
        w = apply(q)
        a = float(q @ w)
        w = w - a * q
        if j:
            w -= beta_prev * Q[j - 1]
        for _ in range(2):
            w -= Q[:j + 1].T @ (Q[:j + 1] @ w)
        b = float(np.linalg.norm(w))
        alphas.append(a)
        j += 1
        restarted = False
        if j < max_dim and b <= BREAKDOWN_TOL * max(1.0, abs(a)):
            nxt = fresh(j)
            if nxt is None:
                max_dim = j
            else:
                q, b, restarted = nxt, 0.0, True
        done = j >= max_dim
        if done or (j >= 2 * k and j % check_every == 0):
            d = np.array(alphas)
            e = np.array(betas)
            theta, S = eigh_tridiagonal(d, e) if j > 1 else (d.copy(), np.ones((1, 1)))
            want = np.unique(np.concatenate([np.arange(min(k, j)),
                                             np.arange(max(j - k, 0), j)]))
            scale = max(np.max(np.abs(theta)), 1e-300)
            est = np.abs(b * S[-1, want])
            if done or np.all(est <= 0.1 * tol * scale):
                V = Q[:j].T @ S[:, want]
                vals = theta[want]
                res = np.linalg.norm(apply(V) - V * vals, axis=0)
                if done or np.all(res <= tol * scale):
                    if not np.all(res <= tol * scale):
                        raise NumericError(
                            f"Lanczos residual {res.max():.3e} above {tol * scale:.3e} "
                            f"after exhausting {j} Krylov vectors")
                    order = np.argsort(-vals, kind="stable")
                    return vals[order], V[:, order]
        if done:
            raise NumericError("Lanczos exhausted without convergence")
        betas.append(b)
        if not restarted:
            q = w / b
        beta_prev = b


def eig_sym(m, mode: str = "dense", k: int | None = None, vectors: bool = True,
            tol: float = 1e-8, seed: int = 0) -> EigenDecomposition:
    """Eigen-decomposition of a real symmetric matrix or operator.

    ``mode='dense'`` returns the full spectrum via LAPACK; ``mode='extremal'``
    returns the ``k`` largest and ``k`` smallest pairs via Lanczos.
    """
    _check_symmetric(m)
    _, n = as_operator(m)
    if mode == "dense" or (mode == "extremal" and k is not None and 2 * k >= n):
        a = _to_dense(m)
        if vectors:
            w, v = np.linalg.eigh(a)
            return EigenDecomposition(w[::-1].copy(), v[:, ::-1].copy(), "dense", n, np.arange(n))
        w = np.linalg.eigvalsh(a)
        return EigenDecomposition(w[::-1].copy(), None, "dense", n, np.arange(n))
    if mode != "extremal":
        raise ParameterError(f"unknown mode {mode!r}")
    if k is None or k < 1:
        raise ParameterError("extremal mode needs k >= 1")
    vals, vecs = lanczos_extremal(m, k, tol=tol, seed=seed)
    top = min(k, vals.size)
    ranks = np.concatenate([np.arange(top), n - (vals.size - top) + np.arange(vals.size - top)])
    return EigenDecomposition(vals, vecs if vectors else None, "lanczos_extremal", n, ranks)


def spectral_norm(m, tol: float = 1e-8) -> float:
    """Operator 2-norm of a symmetric matrix or operator."""
    _, n = as_operator(m)
    if n == 0:
        return 0.0
    if n <= DENSE_CUTOFF or isinstance(m, np.ndarray) and n <= 2 * DENSE_CUTOFF:
        return float(np.max(np.abs(np.linalg.eigvalsh(_to_dense(m)))))
    vals, _ = lanczos_extremal(m, 1, tol=tol)
    return float(np.max(np.abs(vals)))


# --- tridiagonalization ------------------------------------------------------

def tridiagonalize(m, x: int, r: int) -> TridiagMatrix:
    """Jacobi matrix of ``m`` in the Gram–Schmidt basis of 𝟙_x, M𝟙_x, …, M^r 𝟙_x."""
    apply, n = as_operator(m)
    if r < 0:
        raise ParameterError("r must be nonnegative")
    basis = np.zeros((r + 1, n))
    basis[0, x] = 1.0
    diag, off = [], []
    breakdown = False
    for i in range(r + 1):
        w = apply(basis[i])
        diag.append(float(basis[i] @ w))
        if i == r:
            break
        for _ in range(2):
            w -= basis[:i + 1].T @ (basis[:i + 1] @ w)
        b = float(np.linalg.norm(w))
        if b <= BREAKDOWN_TOL:
            breakdown = True
            basis = basis[:i + 1]
            break
        off.append(b)
        basis[i + 1] = w / b
    return TridiagMatrix(np.array(diag), np.array(off), (m, x), breakdown, basis)


def z_alpha_matrix(alpha: float, r: int) -> TridiagMatrix:
    """Truncation of Z(α) to indices 0..r: zero diagonal, off-diagonal (√α, 1, 1, …)."""
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    if r < 1:
        raise ParameterError("r must be >= 1")
    off = np.ones(r)
    off[0] = math.sqrt(alpha)
    return TridiagMatrix(np.zeros(r + 1), off, ("Z", alpha))


# --- trees -------------------------------------------------------------------

def regular_tree(p: int, q: int, depth: int) -> sp.csr_matrix:
    """Adjacency of the rooted tree whose root has p children and every other
    vertex at distance < depth has q children; leaves sit at distance depth."""
    if p < 1 or q < 1 or depth < 0:
        raise ParameterError("need p, q >= 1 and depth >= 0")
    parents = []
    level = np.array([0], dtype=np.int64)
    nxt = 1
    for l in range(1, depth + 1):
        c = p if l == 1 else q
        par = np.repeat(level, c)
        level = np.arange(nxt, nxt + par.size, dtype=np.int64)
        nxt += par.size
        parents.append(par)
    n = nxt
    if n == 1:
        return sp.csr_matrix((1, 1))
    par = np.concatenate(parents)
    child = np.arange(1, n, dtype=np.int64)
    rows = np.concatenate([par, child])
    cols = np.concatenate([child, par])
    return sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))


def tree_norm_check(p: int, q: int, depth: int) -> dict:
    """Adjacency norm of the truncated (p, q) tree against √q·Λ(p/q ∨ 2) and 2√q."""
    a = regular_tree(p, q, depth)
    n = a.shape[0]
    if n <= DENSE_CUTOFF:
        norm = float(np.max(np.abs(np.linalg.eigvalsh(a.toarray()))))
    else:
        vals, _ = lanczos_extremal(a, 1, tol=1e-12)
        norm = float(np.max(np.abs(vals)))
    bound = math.sqrt(q) * Lambda(max(p / q, 2.0))
    return {
        "p": p, "q": q, "depth": depth, "n": n,
        "norm": norm, "bound": bound, "forest_bound": 2.0 * math.sqrt(q),
        "within_bound": norm <= bound + 1e-9,
    }


def spectrum_rows(eigs: EigenDecomposition) -> list[tuple]:
    """CSV rows ``(index, eigenvalue, inf_norm_of_vector)``; index is the global rank."""
    inf = eigs.inf_norms() if eigs.vectors is not None else np.full(eigs.values.size, np.nan)
    return [(int(i), float(v), float(w)) for i, v, w in zip(eigs.ranks, eigs.values, inf)]
