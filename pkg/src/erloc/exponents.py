"""Scalar exponent calculus for the critical Erdős–Rényi phase diagram.

Everything here is closed-form or solved by bracketed bisection on a
monotone function, so results are reproducible to the last few ulps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "B_STAR",
    "PhaseParams",
    "lambda_map",
    "Lambda",
    "Lambda_inv",
    "theta_b",
    "rho_b",
    "rho_b_limits",
    "alpha_max",
    "lambda_max",
    "theta_rho",
    "f_d",
    "beta_l",
    "f_d_and_beta",
    "xi",
    "xi_u",
    "r_star",
    "phi_a",
    "counting_check",
    "bisect",
]

B_STAR = 1.0 / (2.0 * math.log(2.0) - 1.0)


def bisect(fn, lo: float, hi: float, tol: float = 1e-13, max_iter: int = 400) -> float:
    """Root of a continuous function with a sign change on ``[lo, hi]``."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise DomainError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


# --- Λ and its inverse -----------------------------------------------------

def Lambda(alpha: float) -> float:
    """Λ(α) = α/√(α−1), defined for α ≥ 2."""
    if alpha < 2.0:
        raise DomainError(f"Lambda needs alpha >= 2, got {alpha}")
    return alpha / math.sqrt(alpha - 1.0)


def Lambda_inv(lam: float) -> float:
    """Inverse of Λ on [2, ∞)."""
    if lam < 2.0:
        raise DomainError(f"Lambda_inv needs lambda >= 2, got {lam}")
    return 0.5 * lam * lam * (1.0 + math.sqrt(max(0.0, 1.0 - 4.0 / (lam * lam))))


def lambda_map(value: float, direction: str = "forward") -> float:
    """Apply Λ (``direction='forward'``) or Λ⁻¹ (``'inverse'``)."""
    if direction == "forward":
        return Lambda(value)
    if direction == "inverse":
        return Lambda_inv(value)
    raise ParameterError(f"direction must be 'forward' or 'inverse', got {direction!r}")


# --- θ_b, ρ_b, α_max --------------------------------------------------------

def _entropy(alpha: float) -> float:
    # α log α − α + 1, with the α = 0 limit equal to 1
    if alpha == 0.0:
        return 1.0
    return alpha * math.log(alpha) - alpha + 1.0


def theta_b(b: float, alpha: float) -> float:
    """θ_b(α) = [1 − b(α log α − α + 1)]₊ for α ≥ 2."""
    if b <= 0:
        raise ParameterError("b must be positive")
    if alpha < 2.0:
        raise DomainError(f"theta_b needs alpha >= 2, got {alpha}")
    return max(0.0, 1.0 - b * _entropy(alpha))


def rho_b(b: float, lam: float) -> float:
    """ρ_b(λ) = θ_b(Λ⁻¹(|λ|)) for |λ| ≥ 2 and 1 inside the bulk."""
    lam = abs(lam)
    if lam < 2.0:
        return 1.0
    return theta_b(b, Lambda_inv(lam))


def rho_b_limits(b: float) -> tuple[float, float]:
    """One-sided limits (ρ_b(2⁻), ρ_b(2⁺)) = (1, [1 − b/b_*]₊).

    Evaluating ``rho_b`` just above 2 loses about half the digits because
    Λ⁻¹ has a square-root singularity there; the right limit is θ_b(2).
    """
    return 1.0, theta_b(b, 2.0)


def alpha_max(b: float) -> float | None:
    """inf{α ≥ 2 : θ_b(α) = 0}; ``None`` when b ≥ b_* (no semilocalized phase)."""
    if b <= 0:
        raise ParameterError("b must be positive")
    if b >= B_STAR:
        return None
    g = lambda a: 1.0 - b * _entropy(a)
    hi = 20.0
    while g(hi) > 0:
        hi *= 2.0
    return bisect(g, 2.0, hi, tol=1e-15)


def lambda_max(b: float) -> float | None:
    a = alpha_max(b)
    return None if a is None else Lambda(a)


def theta_rho(b: float, alpha: float | None = None, lam: float | None = None) -> dict:
    """Bundle of θ_b(α), ρ_b(λ), α_max(b), λ_max(b) for the given arguments."""
    out = {"alpha_max": alpha_max(b), "lambda_max": lambda_max(b)}
    if alpha is not None:
        out["theta"] = theta_b(b, alpha)
    if lam is not None:
        out["rho"] = rho_b(b, lam)
    return out


# --- degree counting ---------------------------------------------------------

def f_d(d: float, alpha: float) -> float:
    """f_d(α) = d(α log α − α + 1) + ½ log(2παd)."""
    if alpha < 1.0:
        raise DomainError(f"f_d needs alpha >= 1, got {alpha}")
    return d * _entropy(alpha) + 0.5 * math.log(2.0 * math.pi * alpha * d)


def beta_l(d: float, n: int, l: float) -> float:
    """Solution β ≥ 1 of f_d(β) = log(N/l)."""
    target = math.log(n / l) if l > 0 else math.inf
    if not (l > 0) or target < f_d(d, 1.0):
        raise DomainError(f"l={l} out of range: log(N/l) must be >= f_d(1)")
    g = lambda a: f_d(d, a) - target
    hi = 2.0
    while g(hi) < 0:
        hi *= 2.0
    return bisect(g, 1.0, hi, tol=1e-14)


def f_d_and_beta(d: float, n: int, alpha: float | None = None, l: float | None = None) -> dict:
    out = {}
    if alpha is not None:
        out["f_d"] = f_d(d, alpha)
    if l is not None:
        out["beta_l"] = beta_l(d, n, l)
    return out


def counting_check(alpha: np.ndarray, n: int, d: float, alpha_grid, zeta: float) -> list[dict]:
    """Compare |{x : α_x ≥ α}| with the degree-counting bracket at each grid point."""
    alpha = np.asarray(alpha, dtype=float)
    logn = math.log(n)
    rows = []
    for a in alpha_grid:
        expected = n * math.exp(-f_d(d, a))
        lower = math.floor((expected - 1.0) * logn ** (-2.0 * zeta))
        upper = math.ceil((expected + 1.0) * logn ** (2.0 * zeta))
        count = int(np.count_nonzero(alpha >= a))
        rows.append({
            "alpha": float(a),
            "count": count,
            "expected": expected,
            "lower": max(lower, 0),
            "upper": upper,
            "contained": max(lower, 0) <= count <= upper,
        })
    return rows


# --- control parameters ------------------------------------------------------

def xi(n: int, d: float) -> float:
    """ξ = √(log N)·log d / d."""
    return math.sqrt(math.log(n)) * math.log(d) / d


def xi_u(n: int, d: float, u: float) -> float:
    """ξ_u = √(log N)/(d·u)."""
    return math.sqrt(math.log(n)) / (d * u)


def r_star(n: int, c: float = 0.25, minimum: int = 1) -> int:
    """⌊c√(log N)⌋, floored at ``minimum`` so balls are never trivial."""
    return max(minimum, int(math.floor(c * math.sqrt(math.log(n)))))


def phi_a(n: int, d: float, a: float = 1.0) -> float:
    """Typicality threshold 𝔞(log N/d²)^{1/3}."""
    return a * (math.log(n) / d**2) ** (1.0 / 3.0)


@dataclass(frozen=True)
class PhaseParams:
    n: int
    d: float
    r_star_c: float = 0.25

    @classmethod
    def from_b(cls, n: int, b: float, r_star_c: float = 0.25) -> "PhaseParams":
        return cls(n, b * math.log(n), r_star_c)

    @property
    def b(self) -> float:
        return self.d / math.log(self.n)

    @property
    def xi(self) -> float:
        return xi(self.n, self.d)

    def xi_u(self, u: float) -> float:
        return xi_u(self.n, self.d, u)

    @property
    def r_star(self) -> int:
        return r_star(self.n, self.r_star_c)

    @property
    def b_star(self) -> float:
        return B_STAR
