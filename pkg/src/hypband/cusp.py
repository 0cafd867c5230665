"""Divergence witness on the parabolic cylinder.

The parabolic cylinder carries generalized eigenfunctions y^(1/2 - i xi); a
band-limited superposition with boundary profile phi collapses to
f(y) = eta y^(1/2 - i lam) phihat(eta log y).  Its L^2 norm is finite
(eta^(1/2) ||phihat||_2 per unit period) while every L^p norm with p > 2
diverges like exp((1/2 - 1/p) U) under the u = log y truncation.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature as quad


@dataclass(frozen=True)
class CuspProfile:
    """Band parameters and the boundary-profile transform |phihat|.

    phihat must be even, continuous, with |phihat(u)| ~ (1+|u|)^(-alpha);
    alpha > 1/2 keeps the L^2 norm finite.
    """

    lam: float
    eta: float
    alpha: float = 0.75

    def __post_init__(self):
        if not self.alpha > 0.5:
            raise ValueError("alpha must exceed 1/2 for a finite L2 norm")
        if not (self.lam > 0 and self.eta > 0):
            raise ValueError("window needs lam > 0, eta > 0")

    def phi_hat(self, u):
        u = np.asarray(u, dtype=float)
        return (1.0 + np.abs(u)) ** (-self.alpha)


def cusp_field(profile: CuspProfile, y):
    """f(y) = eta y^(1/2 - i lam) phihat(eta log y) for y > 0."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("y must be positive")
    logy = np.log(y)
    return (profile.eta * np.exp((0.5 - 1j * profile.lam) * logy)
            * profile.phi_hat(profile.eta * logy))


def cusp_l2_closed(profile: CuspProfile):
    """eta^(1/2) ||phihat||_2 with the closed tail: ||phihat||_2^2 = 2/(2 alpha - 1)."""
    return math.sqrt(profile.eta) * math.sqrt(2.0 / (2.0 * profile.alpha - 1.0))


def cusp_l2(profile: CuspProfile, u_span=None, tol=1e-12):
    """Quadrature of ||f||_2 over the cylinder (unit x-period, measure dy/y^2).

    Substituting u = log y gives eta^2 int |phihat(eta u)|^2 du; the
    integrand tail beyond the span is added in closed form for the default
    power profile.
    """
    eta, alpha = profile.eta, profile.alpha
    if u_span is None:
        u_span = (2.0 / eta) * (1.0 / tol) ** (1.0 / (2.0 * alpha - 1.0)) ** 0.5
        u_span = min(max(u_span, 50.0 / eta), 1e9)
    edges = np.concatenate([[0.0], np.geomspace(1e-3, u_span, 400)])

    def integrand(u):
        return profile.phi_hat(eta * u) ** 2

    val = 2.0 * quad.integrate_adaptive(integrand, edges, tol=1e-11)
    # closed tail of the power profile: int_{U}^{inf} (1+eta u)^{-2a} du
    tail = (1.0 + eta * u_span) ** (1.0 - 2.0 * alpha) / (eta * (2.0 * alpha - 1.0))
    return profile.eta * math.sqrt(float(val) + 2.0 * tail)


def cusp_lp_truncated(profile: CuspProfile, p, U):
    """eta ( int_{-inf}^{U} e^{(p/2-1)u} |phihat(eta u)|^p du )^(1/p).

    Strictly increasing and unbounded in U for p > 2; finite limit at p = 2.
    """
    if U <= 0:
        raise ValueError("truncation U must be positive")
    eta, alpha = profile.eta, profile.alpha
    a = 0.5 * p - 1.0

    def integrand(u):
        return np.exp(a * u) * profile.phi_hat(eta * u) ** p

    if a <= 1e-12:
        # p = 2 boundary: no exponential weight; polynomial tail in closed form
        T = max(1e4, 1e4 / eta)
        edges = np.unique(np.concatenate([-np.geomspace(T, 1.0, 600),
                                          [0.0], np.linspace(-1.0, U, 200)]))
        val = quad.integrate_adaptive(integrand, edges, tol=1e-9, max_refine=3)
        tail = (1.0 + eta * T) ** (1.0 - p * alpha) / (eta * (p * alpha - 1.0))
        return eta * (float(val) + tail) ** (1.0 / p)
    lo = -max(200.0, 80.0 / a)
    edges = np.unique(np.concatenate([np.linspace(lo, U, 2000), [0.0]]))
    val = quad.integrate_adaptive(integrand, edges, tol=1e-11, max_refine=3)
    return eta * float(val) ** (1.0 / p)


def divergence_slope(profile: CuspProfile, p, U_grid=(30.0, 40.0, 50.0, 60.0)):
    """Least-squares slope of log ||f||_p(U) against U; target 1/2 - 1/p."""
    vals = [math.log(cusp_lp_truncated(profile, p, U)) for U in U_grid]
    U_grid = np.asarray(U_grid, dtype=float)
    return float(np.polyfit(U_grid, vals, 1)[0])


def divergence_rows(profile: CuspProfile, p, U_grid=(30.0, 40.0, 50.0, 60.0)):
    """(p, alpha, eta, U, lp_truncated, running slope estimate) rows."""
    rows = []
    prev = None
    for U in U_grid:
        v = cusp_lp_truncated(profile, p, U)
        slope = None if prev is None else (math.log(v) - math.log(prev[1])) / (U - prev[0])
        rows.append((p, profile.alpha, profile.eta, U, v, slope))
        prev = (U, v)
    return rows
