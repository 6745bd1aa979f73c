import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from erloc.errors import DegenerateSupportError, DomainError
from erloc.exponents import Lambda, r_star, xi
from erloc.graph import from_edges, generate_er, normalized_degrees
from erloc.profiles import (approximation_report, build_profile, build_pruned_operators,
                            ihara_bass_check, ihara_bass_margin, profile_residual,
                            profile_weights, tail_masses)
from erloc.pruning import prune
from erloc.spectra import z_alpha_matrix

N = 2000


@pytest.fixture(scope="module")
def sample():
    g = generate_er(N, 0.3 * math.log(N), 1)
    p = prune(g, 1.5, r_star(N))
    return g, p, build_pruned_operators(g, p, xi(N, g.d))


def test_weights_alpha_two():
    u = profile_weights(2.0, 3)
    u0 = 1 / math.sqrt(6)
    assert np.allclose(u, [u0, math.sqrt(2) * u0, math.sqrt(2) * u0, u0], atol=1e-15)


def test_weights_large_alpha():
    # u_1/u_0 = √(α/(α−1)) → 1, so the mass splits evenly over S_0 and S_1
    u = profile_weights(1e8, 4)
    assert u[0] == pytest.approx(1 / math.sqrt(2), abs=1e-7)
    assert u[1] / u[0] == pytest.approx(1.0, abs=1e-7)
    assert u[2] / u[0] < 1e-3


def test_weights_tail_ratio():
    u = profile_weights(5.0, 10)
    assert u[10] / u[0] == pytest.approx(4 ** -4.5, rel=1e-12)


@given(st.floats(1.01, 50.0), st.integers(1, 12))
def test_weights_normalized(alpha, rs):
    u = profile_weights(alpha, rs)
    assert np.sum(u * u) == pytest.approx(1.0, abs=1e-14)


def test_weights_domain():
    with pytest.raises(DomainError):
        profile_weights(1.0, 2)


def test_profiles_orthonormal(sample):
    g, p, ops = sample
    P = ops.P.toarray()
    assert len(ops.profiles) > 0
    assert np.max(np.abs(P.T @ P - np.eye(P.shape[1]))) <= 1e-10
    # distinct centres: disjoint supports, so inner products are exactly 0
    a, b = ops.profiles[0], ops.profiles[2]
    assert a.x != b.x and not set(a.indices) & set(b.indices)


def test_plus_minus_orthogonal(sample):
    _, _, ops = sample
    for plus, minus in zip(ops.profiles[::2], ops.profiles[1::2]):
        assert plus.x == minus.x
        assert abs(plus.dense(N) @ minus.dense(N)) <= 1e-12


def test_tail_masses_match_weight_sums(sample):
    # on a pruned tree ball the G-tail is at most the sum of the outer weights
    g, p, ops = sample
    for prof in ops.profiles:
        tails = tail_masses(prof, g)
        outer = np.array([np.sum(prof.weights[r + 1:] ** 2) for r in range(tails.size)])
        assert np.all(tails <= outer + 1e-14)


def test_tail_bound_has_alpha_over_two_factor():
    # Σ_{i>r} u_i² tends to (α/2)(α−1)^{−(r+1)} for long profiles, exceeding (α−1)^{−(r+1)}
    alpha = 4.0
    u = profile_weights(alpha, 60)
    for r in range(5):
        tail = np.sum(u[r + 1:] ** 2)
        assert tail == pytest.approx(alpha / 2 * (alpha - 1) ** -(r + 1), rel=1e-6)


def test_degenerate_sphere():
    g = from_edges(4, [(0, 1), (0, 2), (0, 3)], d=1.0)
    p = prune(g, 2.0, 2)
    with pytest.raises(DegenerateSupportError):
        build_profile(p, 0, 1)
    with pytest.raises(DomainError):
        build_profile(p, 0, 0)


def test_no_centers():
    g = generate_er(400, 4.0, 0)
    p = prune(g, 50.0, 1)
    ops = build_pruned_operators(g, p, xi(400, 4.0))
    assert ops.P.shape[1] == 0
    D = ops.dense
    assert np.max(np.abs(D["Pi"])) == 0.0
    assert np.allclose(D["H_hat"], D["H_tau"], atol=1e-15)
    assert approximation_report(ops)["norm_h_htau"] == pytest.approx(0.0, abs=1e-14)


def test_block_structure(sample):
    _, _, ops = sample
    D = ops.dense
    comp = np.eye(N) - D["Pi"]
    assert np.max(np.abs(D["Pi"] @ D["H_hat"] @ comp)) <= 1e-12
    P = ops.P.toarray()
    assert np.allclose(P.T @ D["H_hat"] @ P, np.diag(ops.energies), atol=1e-10)
    for k, prof in enumerate(ops.profiles):
        v = prof.dense(N)
        assert v @ D["H_hat"] @ v == pytest.approx(prof.sigma * Lambda(prof.alpha), abs=1e-10)


def test_matvecs_match_dense(sample):
    _, _, ops = sample
    v = np.random.default_rng(3).standard_normal((N, 3))
    D = ops.dense
    for name, fn in (("H", ops.H), ("H_tau", ops.H_tau), ("Pi", ops.Pi), ("H_hat", ops.H_hat)):
        assert np.allclose(fn(v), D[name] @ v, atol=1e-12), name


def test_expected_adjacency_cut(sample):
    g, _, ops = sample
    chi = ops.chi
    EA = g.d / N * (np.ones((N, N)) - np.eye(N))
    assert np.linalg.norm(EA - chi[:, None] * EA * chi[None, :], 2) <= 2.0


def test_locality(sample):
    _, p, ops = sample
    from erloc.graph import ball_and_spheres
    x = int(p.v_tau[0])
    v = np.zeros(N)
    v[x] = 1.0
    for j in range(1, 2 * p.r_star + 1):
        v = ops.H_tau(v)
        ball = np.concatenate(ball_and_spheres(p, x, j))
        outside = np.setdiff1d(np.arange(N), ball)
        assert np.all(v[outside] == 0.0)


def test_residual_against_dense(sample):
    _, _, ops = sample
    for prof in ops.profiles[:6]:
        v = prof.dense(N)
        ref = np.linalg.norm(ops.dense["H_tau"] @ v - prof.sigma * Lambda(prof.alpha) * v)
        assert profile_residual(ops, prof) == pytest.approx(ref, rel=1e-12, abs=1e-14)


def test_tridiagonal_model_residual_is_boundary_only():
    # on Z(α) the profile weights solve the eigen-equation except near the cut
    alpha, rs = 3.5, 8
    u = profile_weights(alpha, rs)
    Z = z_alpha_matrix(alpha, rs + 1).to_dense()
    v = np.append(u, 0.0)
    res = Z @ v - Lambda(alpha) * v
    assert np.all(np.abs(res[:rs - 1]) <= 1e-14)
    assert np.any(np.abs(res[rs - 1:]) > 1e-6)


def test_complement_block_norm():
    for seed in range(5):
        g = generate_er(N, 0.6 * math.log(N), seed)
        p = prune(g, 1.5, r_star(N))
        rep = approximation_report(build_pruned_operators(g, p, xi(N, g.d)))
        assert rep["norm_complement_block"] <= 2 * 1.5 + 0.5
        assert set(rep) >= {"norm_h_htau", "norm_htau_hhat", "norm_complement_block",
                            "tau", "r_star", "seed"}


def test_ihara_bass_examples():
    n = 50
    assert ihara_bass_margin(np.zeros((n, n)), np.zeros(n), 4.0) >= 1.0
    g = from_edges(10, [(0, 1)], d=4.0)
    ops = build_pruned_operators(g, prune(g, 1.5, 1), xi(10, 4.0))
    assert ihara_bass_check(ops, normalized_degrees(g).alpha) > 0


def test_ihara_bass_random():
    for seed in range(3):
        g = generate_er(1000, 8.0, seed)
        ops = build_pruned_operators(g, prune(g, 1.5, 1), xi(1000, 8.0))
        alpha = normalized_degrees(g).alpha
        assert ihara_bass_check(ops, alpha) >= 0
        assert ihara_bass_check(ops, alpha, absolute=True) >= 0
