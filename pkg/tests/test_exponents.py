import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from erloc.errors import DomainError, ParameterError
from erloc.exponents import (B_STAR, Lambda, Lambda_inv, PhaseParams, alpha_max, beta_l,
                             counting_check, f_d, f_d_and_beta, lambda_map, lambda_max,
                             r_star, rho_b, rho_b_limits, theta_b, theta_rho, xi, xi_u)

lam_values = st.floats(2.0, 50.0, allow_nan=False)
alpha_values = st.floats(2.0, 100.0, allow_nan=False)


def test_lambda_fixed_point():
    assert Lambda(2.0) == 2.0
    assert Lambda_inv(2.0) == 2.0
    assert lambda_map(2.0) == lambda_map(2.0, "inverse") == 2.0


def test_lambda_at_e():
    # value quoted for λ_max(1) in the phase diagram
    assert Lambda(math.e) == pytest.approx(2.0737, abs=1e-4)


@given(lam_values)
def test_lambda_round_trip(lam):
    assert abs(Lambda(Lambda_inv(lam)) - lam) <= 1e-12 * lam


@given(alpha_values)
def test_lambda_inverse_round_trip(alpha):
    assert Lambda_inv(Lambda(alpha)) == pytest.approx(alpha, rel=1e-10)


def test_lambda_domain():
    with pytest.raises(DomainError):
        Lambda(1.5)
    with pytest.raises(DomainError):
        Lambda_inv(1.9)
    with pytest.raises(ParameterError):
        lambda_map(3.0, "sideways")


def test_theta_at_b_star_vanishes():
    assert theta_b(B_STAR, 2.0) == pytest.approx(0.0, abs=1e-15)


def test_alpha_max_b1_is_e():
    assert alpha_max(1.0) == pytest.approx(math.e, abs=1e-10)
    assert lambda_max(1.0) == pytest.approx(2.0737, abs=1e-4)


def test_rho_jump_formula():
    for b in (0.2, 0.5, 1.0, 1.5, 2.5, 3.0):
        lo, hi = rho_b_limits(b)
        assert lo == 1.0 and rho_b(b, 1.999) == 1.0
        assert hi == pytest.approx(max(0.0, 1.0 - b / B_STAR), abs=1e-15)
    assert rho_b_limits(1.0)[1] == pytest.approx(2 - 2 * math.log(2), abs=1e-12)


@given(st.floats(0.05, 5.0), alpha_values, alpha_values)
def test_theta_nonincreasing_in_alpha(b, a1, a2):
    lo, hi = sorted((a1, a2))
    assert theta_b(b, hi) <= theta_b(b, lo) + 1e-15


@given(st.floats(0.05, 5.0), st.floats(0.05, 5.0), alpha_values)
def test_theta_nonincreasing_in_b(b1, b2, a):
    lo, hi = sorted((b1, b2))
    assert theta_b(hi, a) <= theta_b(lo, a) + 1e-15


def test_alpha_max_exceeds_two_iff_below_b_star():
    for b in np.linspace(0.05, 5.0, 100):
        am = alpha_max(float(b))
        assert (am is not None and am > 2.0) == (b < B_STAR)


def test_theta_rho_bundle():
    out = theta_rho(1.0, alpha=3.0, lam=2.5)
    assert out["alpha_max"] == pytest.approx(math.e)
    assert out["theta"] == 0.0
    assert out["rho"] == rho_b(1.0, 2.5)


def test_f_d_at_one():
    for d in (3.0, 10.0, 40.0):
        assert f_d(d, 1.0) == pytest.approx(0.5 * math.log(2 * math.pi * d), abs=1e-14)


def test_f_d_increasing():
    grid = np.linspace(1.0, 8.0, 400)
    vals = [f_d(10.0, a) for a in grid]
    assert np.all(np.diff(vals) > 0)


@given(st.floats(2.0, 40.0), st.floats(1.0, 50.0))
def test_beta_round_trip(d, l):
    n = 10**6
    if math.log(n / l) < f_d(d, 1.0):
        return
    beta = beta_l(d, n, l)
    assert abs(f_d(d, beta) - math.log(n / l)) <= 1e-9
    assert f_d_and_beta(d, n, l=l)["beta_l"] == beta


def test_counting_check_empty_graph():
    rows = counting_check(np.zeros(100), 100, 5.0, [3.0, 6.0], zeta=1.0)
    assert all(r["count"] == 0 for r in rows)
    assert rows[-1]["lower"] == 0 and rows[-1]["contained"]


@given(st.integers(100, 10**8), st.floats(2.0, 50.0), st.floats(2.0, 50.0))
def test_xi_positive_and_decreasing_in_d(n, d1, d2):
    lo, hi = sorted((d1, d2))
    if hi - lo < 1e-9 or lo < math.e:
        return
    assert 0 < xi(n, hi) <= xi(n, lo)
    assert 0 < xi_u(n, hi, 0.3) < xi_u(n, lo, 0.3)


def test_r_star_default_and_floor():
    assert r_star(2000) == 1
    assert r_star(10**40, c=0.25) == math.floor(0.25 * math.sqrt(math.log(10**40)))
    assert r_star(10**6, c=1.0) == 3


def test_phase_params():
    pp = PhaseParams.from_b(10**4, 0.6)
    assert pp.b == pytest.approx(0.6)
    assert pp.xi == xi(10**4, pp.d)
    assert pp.r_star == r_star(10**4)


@pytest.mark.slow
def test_counting_containment_monte_carlo():
    from erloc.graph import generate_er, normalized_degrees
    n, b = 10**4, 0.6
    d = b * math.log(n)
    ok = 0
    for seed in range(20):
        prof = normalized_degrees(generate_er(n, d, seed))
        rows = counting_check(prof.alpha, n, d, [2.0, 2.5, 3.0], zeta=2.0)
        ok += all(r["contained"] for r in rows)
    assert ok >= 18
