"""Semicircle Stieltjes transform, the family m_α and the measures μ_α."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NumericError
from .exponents import Lambda

__all__ = [
    "MuAlpha",
    "m_semicircle",
    "m_alpha",
    "mu_alpha",
    "stieltjes_quadrature",
    "total_mass",
    "density_rows",
]


def _check_upper(z) -> None:
    if np.any(np.imag(z) <= 0):
        raise DomainError("spectral parameter must satisfy Im z > 0")


def m_semicircle(z):
    """Root of m² + zm + 1 = 0 with Im m > 0 (scalar or array z)."""
    z = np.asarray(z, dtype=complex)
    _check_upper(z)
    r = np.sqrt(z * z - 4.0)
    m = 0.5 * (-z + r)
    flip = m.imag <= 0
    m = np.where(flip, 0.5 * (-z - r), m)
    return m[()] if m.ndim == 0 else m


def m_alpha(alpha: float, z):
    """m_α(z) = −1/(z + α m(z))."""
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    z = np.asarray(z, dtype=complex)
    out = -1.0 / (z + alpha * m_semicircle(z))
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MuAlpha:
    """μ_α = g_α(u)du on (−2, 2) plus atoms of mass h_α at ±s_α.

    For α = 0 the measure is δ_0; it is stored as two atoms of mass 1/2
    located at ±0 so the general formula keeps working.
    """

    alpha: float

    def density(self, u):
        u = np.asarray(u, dtype=float)
        a = self.alpha
        inside = np.abs(u) < 2.0
        root = np.sqrt(np.where(inside, 4.0 - u * u, 0.0))
        den = (1.0 - a) * u * u + a * a
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(inside & (a > 0), a / (2.0 * math.pi) * root / den, 0.0)
        return g[()] if g.ndim == 0 else g

    @property
    def atom_mass(self) -> float:
        a = self.alpha
        if a > 2.0:
            return (a - 2.0) / (2.0 * a - 2.0)
        return 0.5 if a == 0.0 else 0.0

    @property
    def atom_location(self) -> float | None:
        a = self.alpha
        if a > 2.0:
            return Lambda(a)
        return 0.0 if a == 0.0 else None

    def theta_integrand(self, theta):
        """g_α(2 sin θ)·2 cos θ, the density in the variable u = 2 sin θ."""
        a = self.alpha
        c2 = np.cos(theta) ** 2
        s2 = np.sin(theta) ** 2
        return a / (2.0 * math.pi) * 4.0 * c2 / (4.0 * (1.0 - a) * s2 + a * a)


def mu_alpha(alpha: float) -> MuAlpha:
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    return MuAlpha(float(alpha))


_QUAD = dict(epsabs=1e-13, epsrel=1e-12, limit=2000)


def total_mass(mu: MuAlpha) -> float:
    """∫ g_α du + 2h_α."""
    if mu.alpha == 0:
        return 2.0 * mu.atom_mass
    val, err = quad(mu.theta_integrand, -math.pi / 2, math.pi / 2, **_QUAD)
    return val + 2.0 * mu.atom_mass


def stieltjes_quadrature(mu: MuAlpha, z: complex, tol: float = 1e-10) -> complex:
    """∫ μ_α(du)/(u − z) by Gauss–Kronrod in θ with u = 2 sin θ, plus atoms."""
    z = complex(z)
    _check_upper(z)
    total = 0j
    if mu.alpha > 0:
        theta0 = math.asin(max(-1.0, min(1.0, z.real / 2.0)))
        pts = [theta0] if abs(abs(theta0) - math.pi / 2) > 1e-12 else []
        if mu.alpha < 1.0:
            # small α: density concentrates in a peak of width ~α around u = 0
            w = mu.alpha / 2.0
            pts += [0.0] + [s * w * k for s in (-1, 1) for k in (0.5, 2.0, 8.0) if w * k < 1.5]
        pts = sorted(set(pts)) or None

        def part(fn):
            val, err = quad(fn, -math.pi / 2, math.pi / 2, points=pts, **_QUAD)
            if not err <= tol:
                raise NumericError(f"quadrature error estimate {err:.2e} exceeds {tol:.2e} at z={z}")
            return val

        def kernel(t):
            return mu.theta_integrand(t) / (2.0 * math.sin(t) - z)

        total = part(lambda t: kernel(t).real) + 1j * part(lambda t: kernel(t).imag)
    h = mu.atom_mass
    if h:
        s = mu.atom_location
        total += h / (s - z) + h / (-s - z)
    return total


def density_rows(alpha: float, grid) -> tuple[list, dict]:
    """Rows ``(u, g_alpha)`` on ``grid`` and the atom record for μ_α."""
    mu = mu_alpha(alpha)
    g = np.atleast_1d(mu.density(np.asarray(grid, dtype=float)))
    rows = [(float(u), float(v)) for u, v in zip(np.atleast_1d(grid), g)]
    atoms = {"alpha": float(alpha), "atom_mass": mu.atom_mass,
             "atom_location": mu.atom_location, "total_mass": total_mass(mu)}
    return rows, atoms
