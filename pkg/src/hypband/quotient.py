"""Periodized kernels and eigenfunction identities on hyperbolic cylinders.

The cylinder of circumference ell is the quotient by z -> exp(ell) z; its
fundamental domain is the annulus 1 <= |z| < exp(ell), parametrized in
log-polar coordinates z = exp(rho) (cos t + i sin t) with hyperbolic area
d rho dt / sin^2 t.  Periodization sums a radial kernel over the orbit;
eigenfunctions on the cylinder are orbit sums of the half-plane plane waves.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import quadrature as quad
from . import special
from .errors import AccuracyError, DivergenceError
from .geometry import (GroupPresentation, HalfPlanePoint, cyclic_group,
                       enumerate_orbit, hyperbolic_distance, poincare_partial_sum)
from .projector import BumpFamily, SpectralWindow, build_bump, window_symbol
from .transform import MultiplierSymbol, RadialProfile, multiplier_kernel_abel, \
    multiplier_kernel_spectral


# ---------------------------------------------------------------------------
# periodization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodizedKernelValue:
    value: complex
    word_length_used: int
    tail_bound: float


def periodize_kernel(group: GroupPresentation, kernel: RadialProfile,
                     x: HalfPlanePoint, x0: HalfPlanePoint,
                     max_word_length=None, delta_estimate=0.0) -> PeriodizedKernelValue:
    """Sum kernel(d(x, gamma x0)) over the orbit, with a certified tail bound.

    Requires the kernel's claimed tail exponent to exceed the group's
    critical-exponent estimate; the tail bound reuses the Poincare majorant
    at s = tail_exponent scaled by the kernel amplitude at the claimed rate.
    """
    s = kernel.tail_exponent
    if s <= delta_estimate:
        raise DivergenceError(
            f"kernel tail exponent {s} does not exceed the exponent estimate {delta_estimate}")
    L = group.max_word_length if max_word_length is None else max_word_length
    orbit = enumerate_orbit(group, x0, x, max_word_length=L, prune_radius=math.inf)
    dists = np.array([d for (_, d) in orbit])
    vals = kernel(dists)
    total = complex(np.sum(vals))
    # amplitude A with |K(r)| <= A e^{-s r} on the sampled range
    A = float(np.max(np.abs(kernel.values) * np.exp(s * kernel.r_grid)))
    ps = poincare_partial_sum(group, s, x0, x, L)
    return PeriodizedKernelValue(total, int(L), A * ps.tail_bound)


# ---------------------------------------------------------------------------
# cylinder eigenfunctions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CylinderEigenfunction:
    ell: float
    lam: float
    xi: float
    truncation_k: int

    def __post_init__(self):
        if self.ell <= 0:
            raise ValueError("cylinder needs ell > 0")


def plane_wave(lam, xi, z):
    """E(lam, xi, z) = C(lam) (y/((x-xi)^2+y^2))^(1/2 + i lam), vectorized in xi."""
    xi = np.asarray(xi, dtype=float)
    z = complex(z)
    base = z.imag / ((z.real - xi) ** 2 + z.imag**2)
    return special.big_C(lam) * np.exp((0.5 + 1j * lam) * np.log(base))


def cylinder_eigenfunction(params: CylinderEigenfunction, z, xi=None, check=True):
    """E_C(lam, xi, z) = sum_{|k| <= K} E(lam, xi, e^{k ell} z).

    Raises AccuracyError when the last summand is not below 1e-10 of the
    partial sum (geometric decay exp(-|k| ell / 2) per term).
    """
    xis = np.atleast_1d(np.asarray(params.xi if xi is None else xi, dtype=float))
    z = complex(z)
    K = params.truncation_k
    total = np.zeros(len(xis), dtype=complex)
    edge = 0.0
    for k in range(-K, K + 1):
        term = plane_wave(params.lam, xis, z * math.exp(k * params.ell))
        total += term
        if abs(k) == K:
            edge = max(edge, float(np.max(np.abs(term))))
    if check and edge > 1e-10 * max(float(np.max(np.abs(total))), 1e-300):
        raise AccuracyError(
            f"truncation K={K} leaves edge terms at {edge:.2e}; increase K")
    return total if xi is not None or np.ndim(params.xi) else total[0]


def suggest_truncation(ell, tol=1e-12):
    """K with exp(-K ell / 2) below tol (scale-free heuristic)."""
    return int(math.ceil(2.0 * math.log(1.0 / tol) / ell)) + 4


# ---------------------------------------------------------------------------
# spectral-measure identity on the cylinder
# ---------------------------------------------------------------------------

def spectral_measure_lhs(ell, lam, z, z0, K=None, tol=1e-8):
    """(2/pi) lam^2 int_{1<|xi|<e^ell} E_C(xi, z) conj(E_C(xi, z0)) dxi."""
    if K is None:
        K = suggest_truncation(ell)
    params = CylinderEigenfunction(ell, lam, 0.0, K)

    def integrand(xis):
        a = cylinder_eigenfunction(params, z, xi=xis, check=False)
        b = cylinder_eigenfunction(params, z0, xi=xis, check=False)
        return a * np.conj(b)

    total = 0.0 + 0.0j
    n = quad.panel_count(4.0 * lam + 4.0, 1.0, math.exp(ell), min_panels=8)
    for sign in (+1.0, -1.0):
        def f(xis, sign=sign):
            return integrand(sign * xis)
        edges = quad.uniform_edges(1.0, math.exp(ell), n)
        total += quad.integrate_adaptive(f, edges, tol=tol)
    return (2.0 / math.pi) * lam**2 * total


def spectral_measure_rhs(ell, lam, z, z0, tol=1e-10):
    """(1/2 pi^2) |c|^-2 sum_k phi_lam(d(z, e^{k ell} z0))."""
    dens = special.plancherel_density(lam).value
    zc, z0c = complex(z), complex(z0)
    total = 0.0
    k = 0
    while True:
        done = True
        for kk in ([0] if k == 0 else [k, -k]):
            w = z0c * math.exp(kk * ell)
            d = math.acosh(max(1.0, 1.0 + abs(zc - w) ** 2 / (2.0 * zc.imag * w.imag)))
            term = special.phi_mechanism(lam, d, tol=tol)
            total += term
            if abs(term) > 1e-14 * max(abs(total), 1e-300):
                done = False
        if done and k > 2:
            break
        k += 1
        if k > 400:
            break
    return total * dens / (2.0 * math.pi**2)


def spectral_measure_identity_check(ell, lam, z, z0, K=None, tol=1e-8):
    """Relative residual between the xi-integral and the orbit-sum forms."""
    lhs = spectral_measure_lhs(ell, lam, z, z0, K=K, tol=tol)
    rhs = spectral_measure_rhs(ell, lam, z, z0)
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def quasi_periodicity_defect(ell, lam, xi, z, K=None):
    """|E_C(lam, e^ell xi, z) - e^{-(1/2+i lam) ell} E_C(lam, xi, z)| (relative)."""
    if K is None:
        K = suggest_truncation(ell, tol=1e-13)
    params = CylinderEigenfunction(ell, lam, xi, K)
    a = cylinder_eigenfunction(params, z, xi=np.array([math.exp(ell) * xi]), check=False)[0]
    b = cylinder_eigenfunction(params, z, xi=np.array([xi]), check=False)[0]
    target = np.exp(-(0.5 + 1j * lam) * ell) * b
    return abs(a - target) / max(abs(target), 1e-300)


# ---------------------------------------------------------------------------
# fundamental-domain quadrature and the projector ratio
# ---------------------------------------------------------------------------

def _theta_grid(theta_min, n_mid, n_tail):
    """Symmetric grid on (0, pi): log-spaced tails, uniform middle."""
    mid = np.linspace(0.3, math.pi - 0.3, n_mid)
    tail = np.geomspace(theta_min, 0.3, n_tail)
    left = np.concatenate([tail[:-1], mid])
    right = math.pi - tail[:-1][::-1]
    return np.unique(np.concatenate([left, right]))


def _column_on_domain(kern_spline, S, ell, x0, rho_grid, theta_grid):
    """f(x) = sum_k K(d(x, e^{k ell} x0)) on the log-polar grid."""
    rr, tt = np.meshgrid(rho_grid, theta_grid, indexing="ij")
    zx = np.exp(rr) * np.cos(tt)
    zy = np.exp(rr) * np.sin(tt)
    out = np.zeros(rr.shape)
    x0c = complex(x0)
    kmax = int(math.ceil((S + 2.0 + abs(math.log(abs(x0c)))) / ell)) + 1
    for k in range(-kmax, kmax + 1):
        w = x0c * math.exp(k * ell)
        arg = 1.0 + ((zx - w.real) ** 2 + (zy - w.imag) ** 2) / (2.0 * zy * w.imag)
        d = np.arccosh(np.maximum(1.0, arg))
        inside = d < S
        if np.any(inside):
            out[inside] += kern_spline(d[inside])
    return out


def _domain_integral(values_p, rho_grid, theta_grid):
    """int |f|^p d rho d theta / sin^2 theta by trapezoid on the grid."""
    w = values_p / np.sin(theta_grid)[None, :] ** 2
    inner = np.trapezoid(w, theta_grid, axis=1)
    return float(np.trapezoid(inner, rho_grid))


def quotient_projector_ratio(ell, window: SpectralWindow, p, bump: BumpFamily = None,
                             points_per_wavelength=10, tol=1e-7):
    """||P^X f||_p / ||f||_2 on the fundamental domain, f the kernel column.

    The test profile is the periodized window-kernel column at the domain
    center (smooth, supported in the 2/eta ball), the natural witness whose
    ratio tracks the operator-norm scaling; P^X f is then the column of the
    squared-symbol kernel.
    """
    if bump is None:
        bump = build_bump("plateau")
    lam, eta = window.lam, window.eta
    # the L2 mass of the column spreads over the whole kernel support, so the
    # radial cap must be the true support radius
    S = bump.hat_support_radius / eta
    n_dense = max(800, int(S * lam / (2.0 * math.pi) * 16))
    r_dense = np.linspace(0.0, S, n_dense)

    k1 = multiplier_kernel_abel(window_symbol(window, bump, "chi"), r_dense, tol=tol)
    sym1 = window_symbol(window, bump, "chi")

    def m2(mu):
        return np.asarray(sym1.eval(mu)) ** 2

    sym2 = MultiplierSymbol(eval=m2, carrier=lam, freq=sym1.freq,
                            freq_mu=2.0 * sym1.freq_mu, support=sym1.support)
    k2 = multiplier_kernel_spectral(sym2, r_dense, tol=tol)
    sp1 = CubicSpline(r_dense, k1.values.real)
    sp2 = CubicSpline(r_dense, k2.values.real)

    x0 = complex(0.0, math.exp(0.5 * ell))
    dtheta = 2.0 * math.pi / (lam * points_per_wavelength)
    n_mid = int(math.ceil((math.pi - 0.6) / dtheta))
    theta_min = 2.0 * math.exp(-S - 2.0)
    n_tail = max(60, int(10 * (S + 2)))
    thetas = _theta_grid(theta_min, n_mid, n_tail)
    rhos = np.linspace(0.0, ell, max(40, int(math.ceil(ell * lam * points_per_wavelength
                                                       / (2.0 * math.pi)))), endpoint=False)

    f = _column_on_domain(sp1, S, ell, x0, rhos, thetas)
    Pf = _column_on_domain(sp2, S, ell, x0, rhos, thetas)
    l2 = math.sqrt(_domain_integral(f**2, rhos, thetas))
    lp = _domain_integral(np.abs(Pf) ** p, rhos, thetas) ** (1.0 / p)
    return lp / l2


def window_partition_defect(bump: BumpFamily, eta, Lam, n_mu=2001):
    """Flatness defect of the window partition summed over centers j*eta.

    With centers at spacing delta = eta the lattice sum of
    chi((mu - j eta)/eta) + chi((mu + j eta)/eta) (j >= 0, j = 0 halved) is
    constant by Poisson summation; returns max |S/target - 1| over the
    interior of [0, Lam].
    """
    J = int(math.ceil(Lam / eta)) + int(bump.chi_tail_radius) + 2
    margin = bump.chi_tail_radius * eta
    mu = np.linspace(margin, Lam - margin, n_mu)
    if len(mu) == 0 or Lam <= 2 * margin:
        raise ValueError("Lam too small against the bump tail radius")
    total = np.zeros_like(mu)
    for j in range(0, J + 1):
        w = 0.5 if j == 0 else 1.0
        lamj = j * eta
        total += w * (bump.chi((mu - lamj) / eta) + bump.chi((mu + lamj) / eta))
    target = math.sqrt(2.0 * math.pi) * bump.chi_hat(np.array([0.0]))[0]
    return float(np.max(np.abs(total / target - 1.0)))
