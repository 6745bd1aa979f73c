import math

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from erloc.errors import ContractError, ParameterError
from erloc.exponents import Lambda
from erloc.graph import build_scaled_matrix, from_edges, generate_er
from erloc.spectra import (eig_sym, lanczos_extremal, regular_tree, spectral_norm,
                           spectrum_rows, tree_norm_check, tridiagonalize, z_alpha_matrix)


def _sym(a):
    return 0.5 * (a + a.T)


def test_diag_values():
    assert eig_sym(np.diag([3.0, 1.0, 2.0])).values.tolist() == [3.0, 2.0, 1.0]


def test_k2():
    e = eig_sym(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(e.values, [1, -1])
    v = e.vectors * np.sign(e.vectors[0])
    assert np.allclose(v, np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def test_star():
    D = 6
    star = from_edges(D + 1, [(0, k) for k in range(1, D + 1)])
    vals = eig_sym(star.adjacency).values
    assert vals[0] == pytest.approx(math.sqrt(D)) and vals[-1] == pytest.approx(-math.sqrt(D))
    assert np.allclose(vals[1:-1], 0, atol=1e-12)


def test_asymmetric_rejected():
    with pytest.raises(ContractError):
        eig_sym(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ParameterError):
        eig_sym(np.eye(3), mode="magic")


@given(arrays(np.float64, (12, 12), elements=st.floats(-5, 5)))
def test_dense_contracts(a):
    a = _sym(a)
    e = eig_sym(a)
    scale = max(1.0, np.abs(a).max())
    assert np.all(np.diff(e.values) <= 0)
    assert np.max(e.residuals(a)) <= 1e-10 * scale
    assert np.allclose(e.vectors.T @ e.vectors, np.eye(12), atol=1e-10)


@given(st.integers(0, 10**6))
def test_lanczos_against_arpack(seed):
    g = generate_er(1500, 6.0, seed)
    m = build_scaled_matrix(g).entries
    e = eig_sym(m, "extremal", k=4, tol=1e-10)
    top = spla.eigsh(m, k=4, which="LA", tol=1e-12)[0][::-1]
    bot = spla.eigsh(m, k=4, which="SA", tol=1e-12)[0][::-1]
    assert np.allclose(e.values, np.concatenate([top, bot]), atol=1e-8)
    assert e.ranks.tolist() == [0, 1, 2, 3, 1496, 1497, 1498, 1499]
    assert np.max(e.residuals(m)) <= 1e-8 * np.abs(e.values).max()
    assert np.allclose(e.vectors.T @ e.vectors, np.eye(8), atol=1e-8)


def test_lanczos_repeated_eigenvalues():
    # disjoint copies of K2: eigenvalues ±1 with multiplicity 50
    edges = [(2 * i, 2 * i + 1) for i in range(50)]
    m = from_edges(100, edges).adjacency
    vals, _ = lanczos_extremal(m, 3)
    assert np.allclose(vals, [1, 1, 1, -1, -1, -1])


def test_spectral_norm():
    g = generate_er(600, 5.0, 2)
    m = build_scaled_matrix(g).entries
    assert spectral_norm(m) == pytest.approx(np.abs(np.linalg.eigvalsh(m.toarray())).max())


def test_tridiagonalize_tree_root():
    p, q, depth = 4, 3, 5
    t = tridiagonalize(regular_tree(p, q, depth), 0, depth)
    assert np.allclose(t.diag, 0)
    assert np.allclose(t.offdiag, [math.sqrt(p)] + [math.sqrt(q)] * (depth - 1))


def test_tridiagonalize_diagonal_breaks_down():
    t = tridiagonalize(np.diag([1.0, 2.0, 3.0]), 1, 3)
    assert t.size == 1 and t.breakdown and t.diag[0] == 2.0


def test_moment_identity():
    g = generate_er(400, 6.0, 5)
    x = int(np.argmax(g.degree))
    t = tridiagonalize(g.adjacency, x, 3)
    Z = t.to_dense()
    assert (Z @ Z)[0, 0] == pytest.approx(g.degree[x])


@given(st.integers(0, 10**6), st.integers(1, 8))
def test_tridiagonal_interlacing(seed, r):
    rng = np.random.default_rng(seed)
    m = _sym(rng.standard_normal((30, 30)))
    t = tridiagonalize(m, int(rng.integers(30)), r)
    lam = np.sort(np.linalg.eigvalsh(m))
    theta = np.sort(t.eigh()[0])
    k, n = theta.size, lam.size
    assert np.all(lam[:k] <= theta + 1e-9) and np.all(theta <= lam[n - k:] + 1e-9)


def test_z_alpha_semicircle_edge():
    # Z_r(1) is a path on r+1 vertices with top eigenvalue 2cos(π/(r+2))
    assert z_alpha_matrix(1.0, 40).top_eigenvalue() == pytest.approx(2 * math.cos(math.pi / 42))
    assert abs(z_alpha_matrix(1.0, 100).top_eigenvalue() - 2.0) <= 1e-3


def test_z_alpha_four():
    assert abs(z_alpha_matrix(4.0, 40).top_eigenvalue() - Lambda(4.0)) <= 1e-6


def test_z_alpha_decay_ratio():
    w, v = z_alpha_matrix(3.0, 60).eigh()
    u = np.abs(v[:, -1])
    assert np.allclose(u[2:20] / u[1:19], 1 / math.sqrt(2), atol=1e-8)


def test_z_alpha_top_monotone():
    tops = [z_alpha_matrix(a, 60).top_eigenvalue() for a in np.linspace(2.0, 10.0, 41)]
    assert np.all(np.diff(tops) >= -1e-12)


def test_tree_norm_examples():
    rec = tree_norm_check(3, 3, 6)
    assert rec["bound"] == pytest.approx(2 * math.sqrt(3)) and rec["norm"] < rec["bound"]
    path = tree_norm_check(1, 1, 5)
    assert path["norm"] == pytest.approx(2 * math.cos(math.pi / 7), abs=1e-12)
    assert path["norm"] <= 2
    rec = tree_norm_check(9, 3, 8)
    assert abs(rec["norm"] - rec["bound"]) <= 2e-3


def test_regular_tree_shape():
    a = regular_tree(3, 2, 3)
    assert a.shape[0] == 1 + 3 + 6 + 12
    assert (a != a.T).nnz == 0


def test_spectrum_rows():
    e = eig_sym(np.diag([2.0, 1.0]))
    assert spectrum_rows(e) == [(0, 2.0, 1.0), (1, 1.0, 1.0)]
    u = np.full(4, 0.5)
    m = np.outer(u, u)
    e = eig_sym(m)
    assert spectrum_rows(e)[0][2] == pytest.approx(0.5)
