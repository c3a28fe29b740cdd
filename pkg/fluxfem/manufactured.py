# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
"""Exact solutions for the flux and boundary control benchmarks.

Every field is built around the harmonic corner singularity
``s = r^λ sin(λφ)`` with λ = π/ω and the bubble
``g = (1 - x^2)(1 - y^2)``. Scalar fields take ``(x, y)`` arrays, flux
fields additionally the outward normal ``(nx, ny)``.
"""
from dataclasses import dataclass

import numpy as np

from .geometry.sector import SectorDomain


class OriginEvaluationError(ValueError):
    pass


def polar_angle(x, y, omega):
    """atan2 mapped to [0, 2π), with the branch cut moved into the excluded wedge.

    Points on the ray φ = 0 that carry a tiny negative ``y`` from rounding
    therefore get φ ≈ 0 rather than φ ≈ 2π.
    """
    phi = np.arctan2(y, x)
    return np.where(phi < 0.5 * (omega - 2.0 * np.pi), phi + 2.0 * np.pi, phi)


def _check_origin(x, y, singular, name):
    if singular and np.any((np.asarray(x) == 0.0) & (np.asarray(y) == 0.0)):
        raise OriginEvaluationError(f"{name} is singular at the origin")


def singular_factor(x, y, lam, omega):
    """``s = r^λ sin(λφ)`` and its Cartesian gradient.

    ∇s = λ r^(λ-1) (sin((λ-1)φ), cos((λ-1)φ)).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x, y)
    phi = polar_angle(x, y, omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = r**lam * np.sin(lam * phi)
        radial = lam * r ** (lam - 1.0)
        sx = radial * np.sin((lam - 1.0) * phi)
        sy = radial * np.cos((lam - 1.0) * phi)
    return s, sx, sy


def bubble(x, y):
    """``g``, its gradient and its Laplacian."""
    g = (1.0 - x**2) * (1.0 - y**2)
    gx = -2.0 * x * (1.0 - y**2)
    gy = -2.0 * y * (1.0 - x**2)
    lap = -2.0 * (1.0 - y**2) - 2.0 * (1.0 - x**2)
    return g, gx, gy, lap


def _product_gradient(x, y, lam, omega):
    s, sx, sy = singular_factor(x, y, lam, omega)
    g, gx, gy, _ = bubble(x, y)
    return s * gx + g * sx, s * gy + g * sy


def _product_laplacian(x, y, lam, omega):
    # Δ(s g) = 2 ∇s·∇g + s Δg since s is harmonic
    s, sx, sy = singular_factor(x, y, lam, omega)
    _, gx, gy, lap = bubble(x, y)
    return 2.0 * (sx * gx + sy * gy) + s * lap


def predicted_flux_rate(omega):
    """Asymptotic L²(Γ) flux rate min{2, 2λ - 1} on boundary-concentrated meshes."""
    return min(2.0, 2.0 * np.pi / omega - 1.0)


def predicted_control_rate(omega):
    """Asymptotic rate min{2, 2λ - 1} for ‖u - u_h‖ on Γ and ‖y - y_h‖ in Ω."""
    return min(2.0, 2.0 * np.pi / omega - 1.0)


@dataclass(frozen=True)
class FluxBenchmark:
    """Poisson problem with exact solution u = s g, vanishing on Γ."""

    domain: SectorDomain

    @property
    def lambda_bar(self):
        return self.domain.lambda_bar

    @property
    def _singular(self):
        return self.lambda_bar < 1.0

    def u_exact(self, x, y):
        s, _, _ = singular_factor(x, y, self.lambda_bar, self.domain.omega)
        return s * bubble(x, y)[0]

    def grad_u(self, x, y):
        _check_origin(x, y, self._singular, "grad_u")
        return _product_gradient(x, y, self.lambda_bar, self.domain.omega)

    def f_rhs(self, x, y):
        _check_origin(x, y, self._singular, "f_rhs")
        return -_product_laplacian(x, y, self.lambda_bar, self.domain.omega)

    def flux_exact(self, x, y, nx, ny):
        ux, uy = self.grad_u(x, y)
        return ux * nx + uy * ny

    @property
    def expected_rate(self):
        return predicted_flux_rate(self.domain.omega)


@dataclass(frozen=True)
class ControlBenchmark:
    """Dirichlet boundary control problem with known optimal triple.

    The adjoint is ``p = α s g``, the state
    ``y = -λ r^(λ-1) g + 2 s (r^2 - 2)`` equals ∂p/∂n / α on Γ, and
    ``f_state = -Δy``, ``y_desired = y + Δp`` close the optimality system.
    """

    domain: SectorDomain
    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @property
    def lambda_bar(self):
        return self.domain.lambda_bar

    def y_exact(self, x, y):
        lam = self.lambda_bar
        _check_origin(x, y, lam < 1.0, "y_exact")
        s, _, _ = singular_factor(x, y, lam, self.domain.omega)
        g = bubble(x, y)[0]
        r2 = x**2 + y**2
        with np.errstate(divide="ignore"):
            return -lam * r2 ** (0.5 * (lam - 1.0)) * g + 2.0 * s * (r2 - 2.0)

    def laplacian_y(self, x, y):
        lam = self.lambda_bar
        mu = lam - 1.0
        _check_origin(x, y, mu != 0.0, "laplacian_y")
        s, _, _ = singular_factor(x, y, lam, self.domain.omega)
        g, gx, gy, lap = bubble(x, y)
        r2 = x**2 + y**2
        with np.errstate(divide="ignore", invalid="ignore"):
            r_mu = r2 ** (0.5 * mu)
            r_mu2 = np.where(mu == 0.0, 0.0, r2 ** (0.5 * mu - 1.0))
        # Δ(r^μ g) = μ² r^(μ-2) g + 2 μ r^(μ-2) (x, y)·∇g + r^μ Δg ; Δ(2 s (r² - 2)) = 8 (1 + λ) s
        radial = mu * mu * r_mu2 * g + 2.0 * mu * r_mu2 * (x * gx + y * gy) + r_mu * lap
        return -lam * radial + 8.0 * (1.0 + lam) * s

    def f_state(self, x, y):
        return -self.laplacian_y(x, y)

    def p_exact(self, x, y):
        s, _, _ = singular_factor(x, y, self.lambda_bar, self.domain.omega)
        return self.alpha * s * bubble(x, y)[0]

    def grad_p(self, x, y):
        _check_origin(x, y, self.lambda_bar < 1.0, "grad_p")
        px, py = _product_gradient(x, y, self.lambda_bar, self.domain.omega)
        return self.alpha * px, self.alpha * py

    def y_desired(self, x, y):
        _check_origin(x, y, self.lambda_bar < 1.0, "y_desired")
        return self.y_exact(x, y) + self.alpha * _product_laplacian(x, y, self.lambda_bar, self.domain.omega)

    def flux_p(self, x, y, nx, ny):
        px, py = self.grad_p(x, y)
        return px * nx + py * ny

    def u_exact(self, x, y, nx, ny):
        """Optimal control ∂p/∂n / α."""
        return self.flux_p(x, y, nx, ny) / self.alpha

    @property
    def expected_rate(self):
        return predicted_control_rate(self.domain.omega)


def flux_bench(omega):
    return FluxBenchmark(SectorDomain(omega))


def control_bench(omega, alpha=1.0):
    return ControlBenchmark(SectorDomain(omega), alpha)
