"""Time-evolved band kernels and the subordination weight.

The band symbol is m(xi) = e^{-i t xi^2} [chi(xi - lam) + chi(xi + lam)].
Its transform is evaluated exactly as a Fresnel-chirp convolution over the
compact support of chi_hat,

    mhat(s) = c_t int e^{i (s-u)^2 / 4t} 2 cos(lam u) chi_hat(u) du,
    c_t = e^{-i pi/4} / sqrt(2 t),

on a frequency-graded master grid; the radial kernel then follows from the
Abel-type formula.  The default cutoff is the strictly positive spline
mixture, whose value at the band center drives the polynomial t^{-3/2} tail.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from . import quadrature as quad
from . import special
from .extremizers import ExponentFit, fit_exponent
from .projector import BumpFamily, _plateau_chi_hat, build_bump
from .transform import ABEL_PREFACTOR, MultiplierSymbol, RadialProfile, \
    _abel_type_integral, multiplier_kernel_spectral


def default_bump():
    return build_bump("positive", 4)


# ---------------------------------------------------------------------------
# dyadic ring pieces: chi_j = chi * [theta(2^-j .) - theta(2^(1-j) .)]
# ---------------------------------------------------------------------------

def ring(j, xi):
    """Smooth dyadic ring: theta for j = 0, annular difference for j >= 1."""
    xi = np.asarray(xi, dtype=float)
    if j == 0:
        return _plateau_chi_hat(0.5 * xi)  # theta: 1 on [-2,2], support [-4,4] scaled
    return _plateau_chi_hat(0.5 * 2.0 ** (-j) * xi) - _plateau_chi_hat(0.5 * 2.0 ** (1 - j) * xi)


def chi_piece(bump: BumpFamily, j, xi):
    """chi_j(xi); sum over 0 <= j <= J equals chi exactly for |xi| <= 2^(J+1)."""
    xi = np.asarray(xi, dtype=float)
    return bump.chi(xi) * ring(j, xi)


@lru_cache(maxsize=None)
def _chi_hat_piece(bump_kind, order, j):
    """Spline of the transform of chi_j (tabulated once per piece)."""
    bump = build_bump(bump_kind, order) if bump_kind != "plateau" else build_bump("plateau")
    scale = 2.0 ** (j + 2)
    u_max = 360.0 * 2.0 ** (-j) + 4.0
    du = 2.0 * math.pi / (24.0 * scale)
    us = np.arange(0.0, u_max + du, du)
    lo, hi = (0.0, 4.0) if j == 0 else (2.0 ** j, 2.0 ** (j + 2))
    n = quad.panel_count(u_max, lo, hi, min_panels=8)
    nodes, w = quad.panel_nodes(quad.uniform_edges(lo, hi, n))
    base = chi_piece(bump, j, nodes) * w
    vals = np.empty(len(us))
    step = max(1, int(4_000_000 / max(1, len(nodes))))
    for i in range(0, len(us), step):
        vals[i:i + step] = np.cos(np.outer(us[i:i + step], nodes)) @ base
    vals *= math.sqrt(2.0 / math.pi)
    spline = CubicSpline(us, vals)

    def hat(u):
        u = np.abs(np.asarray(u, dtype=float))
        return np.where(u <= u_max, spline(np.minimum(u, u_max)), 0.0)

    return hat, u_max


def _hat_data(bump: BumpFamily, j):
    if j is None:
        return bump.chi_hat, bump.hat_support_radius
    hat, u_max = _chi_hat_piece(bump.kind, 4, j)
    return hat, u_max


def _xi_support(bump: BumpFamily, j):
    """Support of chi_j on the positive axis (per mirror copy)."""
    if j is None:
        return 0.0, bump.chi_tail_radius
    if j == 0:
        return 0.0, min(4.0, bump.chi_tail_radius)
    return 2.0 ** (j - 1), min(2.0 ** (j + 1), bump.chi_tail_radius)


# ---------------------------------------------------------------------------
# the oscillatory symbol transform
# ---------------------------------------------------------------------------

def schrodinger_symbol_hat(t, lam, s_grid, bump: BumpFamily = None, j=None, deriv=0):
    """mhat (or its s-derivative) of e^{-it xi^2}[chi_j(xi-lam)+chi_j(xi+lam)].

    Exact Fresnel form: the u-integral runs over the compact support of the
    cutoff transform, with panels resolving |s-u|/2t + lam.
    """
    if t == 0:
        raise ValueError("t must be nonzero")
    if bump is None:
        bump = default_bump()
    hat, U = _hat_data(bump, j)
    s_grid = np.atleast_1d(np.asarray(s_grid, dtype=float))
    if abs(t) <= 1e-5 and j is None and bump.chi_hat_second is not None:
        # Taylor branch: mhat_t = g + i t g'' + O(t^2 lam^4), g = 2 cos(lam s) chi_hat
        s = s_grid
        g = 2.0 * np.cos(lam * s) * bump.chi_hat(s)
        g2 = 2.0 * (-lam**2 * np.cos(lam * s) * bump.chi_hat(s)
                    - 2.0 * lam * np.sin(lam * s) * bump.chi_hat_prime(s)
                    + np.cos(lam * s) * bump.chi_hat_second(s))
        if deriv == 1:
            # derivative of the i t g'' correction is O(t lam^3); omitted
            gp = 2.0 * (-lam * np.sin(lam * s) * bump.chi_hat(s)
                        + np.cos(lam * s) * bump.chi_hat_prime(s))
            return gp.astype(complex)
        return g + 1j * t * g2
    s_abs = float(np.max(np.abs(s_grid))) if len(s_grid) else 0.0
    xi_lo, xi_hi = _xi_support(bump, j)
    freq_u = (s_abs + U) / (2.0 * abs(t)) + lam + 1.0
    freq_xi = s_abs + 2.0 * abs(t) * (lam + xi_hi) + 1.0
    cost_u = 2.0 * U * freq_u
    cost_xi = 2.0 * (xi_hi - xi_lo) * freq_xi
    out = np.empty(len(s_grid), dtype=complex)
    if cost_u <= cost_xi:
        # Fresnel-chirp form over the transform support
        c_t = 1.0 / np.sqrt(2.0j * t)
        n = quad.panel_count(freq_u, -U, U, min_panels=8)
        u, w = quad.panel_nodes(quad.uniform_edges(-U, U, n))
        base = 2.0 * np.cos(lam * u) * hat(u) * w / math.sqrt(2.0 * math.pi)
        step = max(1, int(6_000_000 / max(1, len(u))))
        for i in range(0, len(s_grid), step):
            d = s_grid[i:i + step, None] - u[None, :]
            ker = np.exp((0.25j / t) * d * d)
            if deriv == 1:
                ker = ker * ((0.5j / t) * d)
            out[i:i + step] = c_t * (ker @ base)
    else:
        # direct oscillatory form over the compact xi support; the symbol is
        # even, so mhat(s) = (2/sqrt(2 pi)) int_0^inf a(xi) e^{-it xi^2} cos(s xi) dxi
        piece = (lambda x: bump.chi(x)) if j is None else (lambda x: chi_piece(bump, j, x))
        lo = max(0.0, lam - xi_hi)
        hi = lam + xi_hi
        n = quad.panel_count(freq_xi, lo, hi, min_panels=8)
        xi, w = quad.panel_nodes(quad.uniform_edges(lo, hi, n))
        a_vals = piece(xi - lam) + piece(xi + lam)
        amp = 2.0 * a_vals * np.exp(-1j * t * xi**2) * w / math.sqrt(2.0 * math.pi)
        step = max(1, int(6_000_000 / max(1, len(xi))))
        for i in range(0, len(s_grid), step):
            sb = np.outer(s_grid[i:i + step], xi)
            if deriv == 1:
                out[i:i + step] = -np.sin(sb) @ (amp * xi)
            else:
                out[i:i + step] = np.cos(sb) @ amp
    return out


def _graded_s_grid(t, lam, s_max, pts_per_wl=32):
    """Master grid on [0, s_max] dense enough for the local chirp frequency."""
    edges = np.arange(0.0, s_max + 1.0, 1.0)
    pieces = [np.array([0.0])]
    for a, b in zip(edges[:-1], edges[1:]):
        freq = b / (2.0 * abs(t)) + lam + 1.0
        n = max(8, int(math.ceil((b - a) * freq * pts_per_wl / (2.0 * math.pi))))
        pieces.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(pieces)


@dataclass
class SymbolTransform:
    """mhat' on a master grid with spline readout for the Abel integral."""

    t: float
    lam: float
    s_max: float
    grid: np.ndarray
    values: np.ndarray

    def spline(self):
        re = CubicSpline(self.grid, self.values.real)
        im = CubicSpline(self.grid, self.values.imag)
        s_max = self.s_max

        def f(s):
            s = np.asarray(s, dtype=float)
            return np.where(s <= s_max, re(np.minimum(s, s_max))
                            + 1j * im(np.minimum(s, s_max)), 0.0)

        return f


def _kernel_s_cut(t, lam, r_max, U):
    """Integration cut: e^{-s/2} certifies beyond r+110; the wavefront at
    2|t|(lam + core) is included when it lies below that."""
    t = abs(t)
    core = 2.0 * t * (lam + 47.0) + 4.0 * math.sqrt(1.0 + t) + 8.0
    return min(r_max + 110.0, max(r_max + 40.0, core))


def dispersive_kernel(t, lam, r_grid, bump: BumpFamily = None, j=None,
                      tol=1e-8, pts_per_wl=32) -> RadialProfile:
    """Radial kernel of the evolved band cutoff by the Abel route."""
    if bump is None:
        bump = default_bump()
    r_grid = np.asarray(r_grid, dtype=float)
    r_max = float(np.max(r_grid))
    _, U = _hat_data(bump, j)
    s_max = _kernel_s_cut(t, lam, r_max, U)
    master = _graded_s_grid(t, lam, s_max, pts_per_wl)
    vals = schrodinger_symbol_hat(t, lam, master, bump=bump, j=j, deriv=1)
    st = SymbolTransform(t, lam, s_max, master, vals)
    dmhat = st.spline()
    freq = s_max / (2.0 * abs(t)) + lam + 1.0
    out = np.empty(len(r_grid), dtype=complex)
    for i, r in enumerate(r_grid):
        out[i] = ABEL_PREFACTOR * _abel_type_integral(dmhat, r, s_max, freq, tol=tol)
    return RadialProfile(r_grid, out, 0.5, osc_freq=lam + 2.0)


def schrodinger_spectral_symbol(t, lam, bump: BumpFamily = None, j=None) -> MultiplierSymbol:
    """Spectral-side symbol for the dual-route comparison.

    For the full band (j = None) the support runs out to the cutoff tail
    radius; polynomial-tail cutoffs make that expensive, so full-band
    comparisons should use the plateau kind, dyadic pieces any kind.
    """
    if bump is None:
        bump = default_bump()

    def m_eval(mu):
        mu = np.asarray(mu, dtype=float)
        if j is None:
            a = bump.chi(mu - lam) + bump.chi(mu + lam)
        else:
            a = chi_piece(bump, j, mu - lam) + chi_piece(bump, j, mu + lam)
        return np.exp(-1j * t * mu**2) * a

    width = bump.chi_tail_radius if j is None else 2.0 ** (j + 2) + 2.0
    hi = lam + width
    return MultiplierSymbol(eval=m_eval, carrier=lam, freq=lam + 2.0,
                            freq_mu=2.0 * t * hi + 2.0, support=(0.0, hi))


def dispersive_kernel_spectral(t, lam, r_grid, bump: BumpFamily = None, j=None,
                               tol=1e-8) -> RadialProfile:
    return multiplier_kernel_spectral(
        schrodinger_spectral_symbol(t, lam, bump=bump, j=j), r_grid, tol=tol)


# ---------------------------------------------------------------------------
# decay scans
# ---------------------------------------------------------------------------

def decay_r_grid(t, lam, n=33):
    cap = min(3.0 * abs(t) * lam + 10.0, 40.0)
    head = np.linspace(0.0, min(1.0, cap), 9)
    if cap > 1.0:
        tail = np.geomspace(1.0, cap, n - 9) * (1.0 + 0.013 * np.sin(5.0 * np.arange(n - 9)))
        return np.unique(np.concatenate([head, np.clip(tail, 1.0 + 1e-9, cap)]))
    return head


@dataclass
class DecayReport:
    lam: float
    t_grid: np.ndarray
    sup_abs: np.ndarray
    r_argmax: np.ndarray
    fit: ExponentFit
    small_t_band: list


def verify_dispersive_decay(lam, t_grid=(1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0),
                            bump: BumpFamily = None, N=2, small_t=None) -> DecayReport:
    """Fit of log sup_r |K(t, .)| against log t, plus the small-time envelope.

    The small-time rows report sup_r |K| (1 + t lam)^N / lam for t in
    [1/lam, 1], whose boundedness mirrors the short-time branch.
    """
    if bump is None:
        bump = default_bump()
    sups, args = [], []
    for t in t_grid:
        grid = decay_r_grid(t, lam)
        k = dispersive_kernel(t, lam, grid, bump=bump)
        a = np.abs(k.values)
        i = int(np.argmax(a))
        sups.append(float(a[i]))
        args.append(float(grid[i]))
    fit = fit_exponent(list(zip(t_grid, sups)))
    band = []
    if small_t is None:
        small_t = np.geomspace(1.0 / lam, 1.0, 5)
    for t in small_t:
        grid = decay_r_grid(t, lam)
        k = dispersive_kernel(t, lam, grid, bump=bump)
        sup = float(np.max(np.abs(k.values)))
        band.append((float(t), sup * (1.0 + t * lam) ** N / lam))
    return DecayReport(lam, np.asarray(t_grid, dtype=float), np.asarray(sups),
                       np.asarray(args), fit, band)


# ---------------------------------------------------------------------------
# subordination weight
# ---------------------------------------------------------------------------

@dataclass
class ZProfile:
    lam: float
    eta: float
    t_grid: np.ndarray
    values: np.ndarray

    def envelope_constant(self, L):
        """C_L with |Z(t)| <= C_L lam eta (1 + lam eta |t|)^(-L) on the grid."""
        scale = self.lam * self.eta
        return float(np.max(np.abs(self.values) * (1.0 + scale * np.abs(self.t_grid)) ** L
                            / scale))


def _inner_bump(sigma):
    """C_c^infty profile on [-1/2, 1/2], equal to 1 on [-1/4, 1/4]."""
    from .projector import smooth_step
    s = np.asarray(sigma, dtype=float)
    return np.where(np.abs(s) >= 0.5, 0.0, smooth_step(2.0 - 4.0 * np.abs(s)))


def z_weight(lam, eta, t_grid=None, bump: BumpFamily = None, phi=None,
             scale_span=60.0, guard=1e-14) -> ZProfile:
    """Fourier transform of phi((sqrt(tau)-lam)/eta) / [chi(..)+chi(..)]^3.

    Substituting tau = (lam + eta sigma)^2 reduces the integral to the
    compact support of phi; the strictly positive cutoff keeps the cube in
    the denominator away from zero.
    """
    if bump is None:
        bump = default_bump()
    if bump.kind != "positive":
        raise ValueError("z_weight needs the strictly positive cutoff")
    if phi is None:
        phi = _inner_bump
    if t_grid is None:
        T = scale_span / (lam * eta)
        t_grid = np.linspace(-T, T, 4001)
    t_grid = np.asarray(t_grid, dtype=float)
    t_abs = float(np.max(np.abs(t_grid)))
    freq = 2.0 * t_abs * eta * (lam + 0.5 * eta)
    n = quad.panel_count(freq, -0.5, 0.5, min_panels=8)
    sig, w = quad.panel_nodes(quad.uniform_edges(-0.5, 0.5, n))
    mu = lam + eta * sig
    den = (bump.chi(eta * sig) + bump.chi(2.0 * lam + eta * sig)) ** 3
    if np.min(den) < guard:
        raise ValueError("positivity violation in the subordination denominator")
    base = phi(sig) / den * 2.0 * eta * mu / math.sqrt(2.0 * math.pi) * w
    out = np.empty(len(t_grid), dtype=complex)
    step = max(1, int(6_000_000 / max(1, len(sig))))
    for i in range(0, len(t_grid), step):
        out[i:i + step] = np.exp(-1j * np.outer(t_grid[i:i + step], mu**2)) @ base
    return ZProfile(lam, eta, t_grid, out)


def z_norm(profile: ZProfile, order):
    """L^r norm of Z on the tabulated grid (trapezoid; order inf = sup)."""
    t, v = profile.t_grid, np.abs(profile.values)
    if order == math.inf or order == "inf":
        return float(np.max(v))
    return float(np.trapezoid(v**order, t) ** (1.0 / order))


def z_eta_scan(lam, etas, orders=(1.0, 2.0, math.inf)):
    """Norm scaling in eta: slope targets 1 - 1/r for each order r."""
    out = {order: [] for order in orders}
    for eta in etas:
        prof = z_weight(lam, eta)
        for order in orders:
            out[order].append((eta, z_norm(prof, order)))
    return {order: fit_exponent(pairs) for order, pairs in out.items()}
