"""Spherical Fourier transform pair, Plancherel checks and multiplier kernels.

Radial multiplier kernels come in two independent routes that the test suite
plays against each other:

* spectral synthesis: K(r) = (1/2 pi^2) int m(mu) phi_mu(r) |c|^-2 dmu,
  evaluated after swapping the mu and s integrals, so the oscillatory carrier
  exp(i mu0 s) factors out of a slowly varying envelope;
* the Abel-type formula: K(r) = -(1/2 pi^(3/2)) int_r^inf d/ds mhat(s)
  (cosh s - cosh r)^(-1/2) ds, which truncates exactly at the support radius
  of mhat.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from . import quadrature as quad
from . import special
from .errors import DivisionUnstableError, TailBoundError

TWO_PI_SQ = 2.0 * math.pi**2
ABEL_PREFACTOR = -1.0 / (2.0 * math.pi**1.5)


# ---------------------------------------------------------------------------
# data carriers
# ---------------------------------------------------------------------------

@dataclass
class RadialProfile:
    """Sampled radial function with a claimed exponential tail rate.

    `evaluate`, when present, is the exact evaluator the samples came from;
    norm and transform routines prefer it to interpolation.  `osc_freq`
    bounds |d phase/dr| so quadratures can lay out panels safely.
    """

    r_grid: np.ndarray
    values: np.ndarray
    tail_exponent: float
    evaluate: Optional[Callable[[np.ndarray], np.ndarray]] = None
    osc_freq: float = 0.0

    def __post_init__(self):
        self.r_grid = np.asarray(self.r_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.r_grid.ndim != 1 or len(self.r_grid) != len(self.values):
            raise ValueError("r_grid and values must be 1-d of equal length")
        if len(self.r_grid) > 1 and np.any(np.diff(self.r_grid) <= 0):
            raise ValueError("r_grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile values must be finite")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.evaluate is not None:
            return np.asarray(self.evaluate(r), dtype=complex)
        re = PchipInterpolator(self.r_grid, self.values.real, extrapolate=False)(r)
        im = PchipInterpolator(self.r_grid, self.values.imag, extrapolate=False)(r)
        out = np.where(np.isnan(re), 0.0, re) + 1j * np.where(np.isnan(im), 0.0, im)
        return out


@dataclass
class SpectralSamples:
    """Samples of a spectral-side function on an increasing frequency grid."""

    lambda_grid: np.ndarray
    values: np.ndarray
    evaluate: Optional[Callable[[np.ndarray], np.ndarray]] = None
    support: Optional[tuple] = None

    def __post_init__(self):
        self.lambda_grid = np.asarray(self.lambda_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if np.any(np.diff(self.lambda_grid) <= 0):
            raise ValueError("lambda_grid must be strictly increasing")

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.evaluate is not None:
            return np.asarray(self.evaluate(lam), dtype=complex)
        re = PchipInterpolator(self.lambda_grid, self.values.real, extrapolate=False)(lam)
        im = PchipInterpolator(self.lambda_grid, self.values.imag, extrapolate=False)(lam)
        return np.where(np.isnan(re), 0.0, re) + 1j * np.where(np.isnan(im), 0.0, im)

    def domain(self):
        if self.support is not None:
            return self.support
        return (float(self.lambda_grid[0]), float(self.lambda_grid[-1]))


@dataclass
class MultiplierSymbol:
    """Even multiplier m(lambda) with optional transform-side data.

    `freq` bounds the phase speed of the transform mhat in s (used by the
    Abel route); `freq_mu` bounds the phase speed of m itself in lambda
    (used by the spectral synthesis; for window symbols this is the
    transform support radius over the window width).  `carrier` is the
    center frequency of a window symbol, enabling the envelope route.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    hat_eval: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hat_prime: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hat_support_radius: float = math.inf
    freq: float = 0.0
    freq_mu: float = 0.0
    carrier: Optional[float] = None
    support: Optional[tuple] = None


@dataclass
class LpReport:
    p: float
    r_max: float
    value: float
    tail_bound: float
    unbounded: bool = False


# ---------------------------------------------------------------------------
# CSV serialization (columns r, re, im; shortest round-trip decimals)
# ---------------------------------------------------------------------------

def profile_to_csv(profile: RadialProfile, path):
    with open(path, "w") as fh:
        fh.write("r,re,im\n")
        for r, v in zip(profile.r_grid, profile.values):
            fh.write(f"{float(r)!r},{float(v.real)!r},{float(v.imag)!r}\n")


def profile_from_csv(path, tail_exponent=0.0):
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    return RadialProfile(data[:, 0], data[:, 1] + 1j * data[:, 2], tail_exponent)


# ---------------------------------------------------------------------------
# analysis direction
# ---------------------------------------------------------------------------

def _transform_tail_bound(amp, R, a):
    """2 pi * amp * int_R^inf e^{-a(r-R)} (1+r) e^{r/2} dr, for a > 1/2."""
    if a <= 0.5:
        return math.inf
    b = a - 0.5
    return 2.0 * math.pi * amp * math.exp(0.5 * R) * ((1.0 + R) / b + 1.0 / b**2)


def spherical_transform(f: RadialProfile, lambda_grid, tol=1e-9,
                        tail_rtol=1e-8) -> SpectralSamples:
    """f~(lam) = 2 pi int_0^inf f(r) phi_lam(r) sinh(r) dr on the grid.

    Accepts complex lam entries in the strip |Im| <= 1/2 (list of python
    complex); the returned samples are then indexed by |lam|.
    """
    lambda_grid = list(lambda_grid)
    R = float(f.r_grid[-1])
    amp = float(np.max(np.abs(f.values[-max(3, len(f.values) // 20):])))
    tail = _transform_tail_bound(amp, R, f.tail_exponent)
    out = []
    for lam in lambda_grid:
        lamc = complex(lam)
        freq = abs(lamc) + f.osc_freq + 1.0
        edges = quad.uniform_edges(0.0, R, quad.panel_count(freq, 0.0, R, min_panels=8))
        phi_grid = special.PhiGrid(np.array([lamc if lamc.imag else lamc.real]),
                                   R + 0.1, steps_per_wavelength=140)

        def integrand(r):
            ph = phi_grid.at(r)[:, 0]
            return f(r) * ph * np.sinh(r)

        val = 2.0 * math.pi * quad.integrate_adaptive(integrand, edges, tol=tol, max_refine=3)
        out.append(val)
    out = np.asarray(out)
    scale = max(float(np.max(np.abs(out))), 1e-300)
    if tail > tail_rtol * scale:
        raise TailBoundError(
            f"radial tail bound {tail:.3e} exceeds {tail_rtol:.0e} of scale {scale:.3e}",
            bound=tail)
    grid = np.array([abs(complex(l)) for l in lambda_grid])
    order = np.argsort(grid)
    return SpectralSamples(grid[order], out[order])


# ---------------------------------------------------------------------------
# synthesis direction (shared by the inverse transform and spectral kernels)
# ---------------------------------------------------------------------------

def _abel_type_integral(fn, r, s_max, freq, tol=1e-9):
    """int_r^{s_max} fn(s) (cosh s - cosh r)^(-1/2) ds, endpoint desingularized.

    `fn` must be smooth; `freq` bounds its phase speed.  The head [r, r+D]
    is mapped through s = r + v^2; the remainder integrates directly with the
    cancellation-free cosh difference.
    """
    if s_max <= r:
        return 0.0 + 0.0j
    span = s_max - r
    D = min(1.0, span)

    def head(v):
        v2 = v * v
        s = r + v2
        amp = np.where(v2 > 1e-12, v / np.sqrt(np.sinh(0.5 * v2) + (v2 <= 1e-12)),
                       math.sqrt(2.0) * (1.0 - v2 / 24.0))
        big = v2 > 1e-12
        if np.any(big):
            amp = np.where(big, v / np.sqrt(np.where(big, np.sinh(0.5 * v2), 1.0)), amp)
        return 2.0 * fn(s) * amp / np.sqrt(2.0 * np.sinh(0.5 * (s + r)))

    n_head = quad.panel_count(freq, 0.0, D, min_panels=2)
    head_edges = np.sqrt(np.linspace(0.0, D, n_head + 1))
    total = quad.integrate_adaptive(head, head_edges, tol=tol)
    if span > D:
        def body(s):
            return fn(s) / np.sqrt(2.0 * np.sinh(0.5 * (s + r)) * np.sinh(0.5 * (s - r)))
        n_body = quad.panel_count(freq + 0.6, r + D, s_max, min_panels=2)
        body_edges = quad.uniform_edges(r + D, s_max, n_body)
        total = total + quad.integrate_adaptive(body, body_edges, tol=tol)
    return total


def _synthesis_direct(m_eval, lo, hi, r_grid, tol, use_ode=True, freq_mu=0.0):
    """(1/2 pi^2) int m phi dens dlam on a batch of radii, low frequencies.

    Fixed Gauss layout in lam (doubled once for an error check); phi over
    the lam nodes comes from the ODE engine (fast path) or the vectorized
    cosine route (precision path).
    """
    r_grid = np.asarray(r_grid, dtype=float)
    r_max = float(np.max(r_grid)) if len(r_grid) else 0.0
    freq = r_max + 1.0 + freq_mu
    n = quad.panel_count(freq, lo, hi, min_panels=8)
    results = []
    for layout in (n, 2 * n):
        nodes, w = quad.panel_nodes(quad.uniform_edges(lo, hi, layout))
        amp = np.asarray(m_eval(nodes), dtype=complex) * special.plancherel_density_vec(nodes) * w
        if use_ode and r_max > 0.0:
            grid = special.PhiGrid(nodes, r_max + 0.1, steps_per_wavelength=80)
            Phi = grid.at(r_grid)
        else:
            Phi = np.stack([special.phi_batch_at_r(nodes, r, tol=tol) for r in r_grid])
        results.append((Phi @ amp) / TWO_PI_SQ)
    err = float(np.max(np.abs(results[1] - results[0])))
    scale = max(float(np.max(np.abs(results[1]))), 1e-300)
    if err > 100.0 * tol * scale:
        nodes, w = quad.panel_nodes(quad.uniform_edges(lo, hi, 4 * n))
        amp = np.asarray(m_eval(nodes), dtype=complex) * special.plancherel_density_vec(nodes) * w
        if use_ode and r_max > 0.0:
            Phi = special.PhiGrid(nodes, r_max + 0.1, steps_per_wavelength=80).at(r_grid)
        else:
            Phi = np.stack([special.phi_batch_at_r(nodes, r, tol=tol) for r in r_grid])
        return (Phi @ amp) / TWO_PI_SQ
    return results[1]


class _CarrierEnvelope:
    """T(s) = int m(mu) cos(mu s) dens(mu) dmu as carrier times spline envelope.

    G(s) = int m(c+u) dens(c+u) e^{ius} du is tabulated on a symmetric s-grid
    dense enough for the largest |u| present (12 points per period), via a
    phase-rotation recursion so wide symbols stay O(n_s * n_u).  Then
    T(s) = (e^{ics} G(s) + e^{-ics} G(-s)) / 2, valid for complex symbols.
    """

    def __init__(self, m_eval, lo, hi, carrier, s_max, tol, freq_mu=0.0):
        self.carrier = carrier
        u_lo, u_hi = lo - carrier, hi - carrier
        n = quad.panel_count(s_max + 1.0 + freq_mu, u_lo, u_hi, min_panels=8)
        u_nodes, u_w = quad.panel_nodes(quad.uniform_edges(u_lo, u_hi, n))
        mu = carrier + u_nodes
        amp = np.asarray(m_eval(mu), dtype=complex) * special.plancherel_density_vec(mu) * u_w
        u_abs = max(1.0, float(max(abs(u_lo), abs(u_hi))))
        ds = 2.0 * math.pi / (12.0 * u_abs)
        n_half = int(math.ceil((s_max + 4.0 * ds) / ds))
        s_grid = ds * np.arange(-n_half, n_half + 1)
        rot = np.exp(1j * ds * u_nodes)
        G = np.empty(len(s_grid), dtype=complex)
        running = np.exp(1j * s_grid[0] * u_nodes)
        for k in range(len(s_grid)):
            G[k] = running @ amp
            running *= rot
        self._spline_re = CubicSpline(s_grid, G.real)
        self._spline_im = CubicSpline(s_grid, G.imag)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        Gp = self._spline_re(s) + 1j * self._spline_im(s)
        Gm = self._spline_re(-s) + 1j * self._spline_im(-s)
        c = self.carrier
        return 0.5 * (np.exp(1j * c * s) * Gp + np.exp(-1j * c * s) * Gm)


def multiplier_kernel_spectral(m: MultiplierSymbol, r_grid, tol=1e-8,
                               use_ode=True) -> RadialProfile:
    """K(r) = (1/2 pi^2) int_0^inf m(lam) phi_lam(r) |c(lam)|^-2 dlam."""
    r_grid = np.asarray(r_grid, dtype=float)
    lo, hi = _symbol_domain(m)
    r_max = float(np.max(r_grid))
    carrier = m.carrier
    if carrier is None or carrier < 8.0:
        vals = _synthesis_direct(m.eval, lo, hi, r_grid, tol, use_ode=use_ode,
                                 freq_mu=m.freq_mu)
    else:
        # swap integrals: K(r) = (sqrt2 / 2 pi^3) int_0^r T(s) (cosh r - cosh s)^{-1/2} ds
        env = _CarrierEnvelope(m.eval, lo, hi, carrier, r_max, tol, freq_mu=m.freq_mu)
        freq = carrier + (hi - lo) + m.freq_mu
        vals = np.empty(len(r_grid), dtype=complex)
        const = math.sqrt(2.0) / (2.0 * math.pi**3)
        for i, r in enumerate(r_grid):
            if r == 0.0:
                # no radial carrier at r = 0; panels only resolve the symbol
                n = quad.panel_count(4.0 + m.freq_mu, lo, hi, min_panels=8)
                nodes, w = quad.panel_nodes(quad.uniform_edges(lo, hi, n))
                vals[i] = np.sum(m.eval(nodes) * special.plancherel_density_vec(nodes) * w) / TWO_PI_SQ
                continue
            # reuse the phi cosine-route structure: integral over [0, r] with
            # the endpoint singularity at s = r
            half = 0.5 * r

            def outer(s):
                return env(s) / np.sqrt(2.0 * np.sinh(0.5 * (r + s)) * np.sinh(0.5 * (r - s)))

            def inner(v):
                v2 = v * v
                s = r - v2
                amp = np.where(v2 > 1e-12, v / np.sqrt(np.sinh(0.5 * v2) + (v2 <= 1e-12)),
                               math.sqrt(2.0) * (1.0 - v2 / 24.0))
                big = v2 > 1e-12
                if np.any(big):
                    amp = np.where(big, v / np.sqrt(np.where(big, np.sinh(0.5 * v2), 1.0)), amp)
                return 2.0 * env(s) * amp / np.sqrt(2.0 * np.sinh(r - 0.5 * v2))

            n_out = quad.panel_count(freq, 0.0, half, min_panels=2)
            n_in = quad.panel_count(freq, 0.0, half, min_panels=2)
            val = quad.integrate_adaptive(outer, quad.uniform_edges(0.0, half, n_out), tol=tol)
            val = val + quad.integrate_adaptive(
                inner, np.sqrt(np.linspace(0.0, half, n_in + 1)), tol=tol)
            vals[i] = const * val
    return RadialProfile(r_grid, vals, 0.5, osc_freq=(m.carrier or 1.0) + m.freq)


def _symbol_domain(m: MultiplierSymbol, floor=1e-15):
    if m.support is not None:
        return m.support
    # detect the effective support by scanning outward from the carrier
    c = m.carrier or 0.0
    probe = np.linspace(0.0, max(4.0 * c + 40.0, 60.0), 4001)
    w = np.abs(m.eval(probe)) * np.maximum(special.plancherel_density_vec(probe), 1e-30)
    peak = float(np.max(w))
    keep = np.nonzero(w > floor * peak)[0]
    lo = probe[max(0, keep[0] - 1)]
    hi = probe[min(len(probe) - 1, keep[-1] + 1)]
    return (float(lo), float(hi))


class _SynthesisEvaluator:
    """Cached low-frequency synthesis: f(r) = (Phi(r) @ amp) / (2 pi^2)."""

    def __init__(self, m_eval, lo, hi, r_max, steps_per_wavelength=140):
        self.m_eval, self.lo, self.hi = m_eval, lo, hi
        self.spw = steps_per_wavelength
        self._build(max(r_max, 0.1))

    def _build(self, r_max):
        self.r_max = r_max
        n = quad.panel_count(r_max + 1.0, self.lo, self.hi, min_panels=8)
        nodes, w = quad.panel_nodes(quad.uniform_edges(self.lo, self.hi, n))
        self.amp = (np.asarray(self.m_eval(nodes), dtype=complex)
                    * special.plancherel_density_vec(nodes) * w)
        self.grid = special.PhiGrid(nodes, r_max + 0.1, steps_per_wavelength=self.spw)

    def __call__(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if len(r) and float(np.max(r)) > self.r_max:
            self._build(float(np.max(r)) + 1.0)
        return (self.grid.at(r) @ self.amp) / TWO_PI_SQ


def inverse_spherical_transform(g: SpectralSamples, r_grid, tol=1e-8) -> RadialProfile:
    """f(r) = (1/2 pi^2) int g(lam) phi_lam(r) |c|^-2 dlam, with evaluator."""
    lo, hi = g.domain()
    r_grid = np.asarray(r_grid, dtype=float)
    if lo > 8.0:
        sym = MultiplierSymbol(eval=g, support=(lo, hi), carrier=0.5 * (lo + hi), freq=0.0)
        prof = multiplier_kernel_spectral(sym, r_grid, tol=tol)

        def evaluate(r):
            r = np.atleast_1d(np.asarray(r, dtype=float))
            return multiplier_kernel_spectral(sym, r, tol=tol).values

        prof.evaluate = evaluate
    else:
        evaluate = _SynthesisEvaluator(g, lo, hi, float(np.max(r_grid)) if len(r_grid) else 1.0)
        prof = RadialProfile(r_grid, evaluate(r_grid), 0.5, evaluate=evaluate)
    prof.osc_freq = hi
    return prof


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def plancherel_norm(g: SpectralSamples, tol=1e-10) -> float:
    """L2 norm via (1/2 pi^2) int |g|^2 |c|^-2 dlam."""
    lo, hi = g.domain()
    if hi <= lo:
        return 0.0
    edges = quad.uniform_edges(lo, hi, max(8, int((hi - lo) * 2)))

    def integrand(lam):
        return np.abs(g(lam)) ** 2 * special.plancherel_density_vec(lam)

    val = quad.integrate_adaptive(integrand, edges, tol=tol)
    return math.sqrt(max(0.0, float(val.real)) / TWO_PI_SQ)


def lp_norm_radial(f: RadialProfile, p, r_max=None, samples_per_wavelength=40) -> LpReport:
    """||f||_p^p = 2 pi int_0^rmax |f|^p sinh r dr, plus a tail bound.

    Dense uniform sampling + Simpson; the sample density follows the
    profile's oscillation bound.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    R = float(f.r_grid[-1] if r_max is None else r_max)
    freq = max(1.0, f.osc_freq) * max(1.0, p)
    n = int(math.ceil(R * freq * samples_per_wavelength / (2.0 * math.pi)))
    n = max(200, min(n, 4_000_000))
    if n % 2 == 1:
        n += 1
    r = np.linspace(0.0, R, n + 1)
    if f.evaluate is None and len(f.r_grid) >= n // 2 and abs(f.r_grid[-1] - R) < 1e-12:
        fr = np.interp(r, f.r_grid, f.values.real) + 1j * np.interp(r, f.r_grid, f.values.imag)
    else:
        fr = f(r)
    integrand = np.abs(fr) ** p * np.sinh(r)
    h = r[1] - r[0]
    simpson = (h / 3.0) * (integrand[0] + integrand[-1]
                           + 4.0 * np.sum(integrand[1:-1:2]) + 2.0 * np.sum(integrand[2:-2:2]))
    value_p = 2.0 * math.pi * float(simpson)
    # tail: |f(r)| <= A e^{-a (r-R)} beyond R
    a = f.tail_exponent
    A = float(np.max(np.abs(fr[-max(5, n // 50):])))
    if p * a > 1.0:
        tail = 2.0 * math.pi * A**p * 0.5 * (
            math.exp(R) / (p * a - 1.0) + math.exp(-R) / (p * a + 1.0))
        return LpReport(p, R, value_p ** (1.0 / p), tail ** (1.0 / p), False)
    return LpReport(p, R, value_p ** (1.0 / p), math.inf, True)


# ---------------------------------------------------------------------------
# Abel-formula kernel
# ---------------------------------------------------------------------------

def multiplier_kernel_abel(m: MultiplierSymbol, r_grid, tol=1e-8) -> RadialProfile:
    """K(r) = -(1/2 pi^(3/2)) int_r^S (d/ds mhat)(s) (cosh s - cosh r)^{-1/2} ds.

    Requires compactly supported mhat; the derivative is taken analytically
    when provided, else by 4th-order central differences of hat_eval.
    """
    S = m.hat_support_radius
    if not math.isfinite(S):
        raise ValueError("Abel route needs a compactly supported transform")
    if m.hat_eval is None and m.hat_prime is None:
        raise ValueError("Abel route needs hat_eval or hat_prime")
    if m.hat_prime is not None:
        dmhat = m.hat_prime
    else:
        def dmhat(s, _h=min(1e-4, S * 1e-5)):
            return (m.hat_eval(s - 2 * _h) - 8 * m.hat_eval(s - _h)
                    + 8 * m.hat_eval(s + _h) - m.hat_eval(s + 2 * _h)) / (12 * _h)
    r_grid = np.asarray(r_grid, dtype=float)
    vals = np.empty(len(r_grid), dtype=complex)
    freq = max(1.0, m.freq)
    # the weight decays like e^{-s/2}; cut the domain once the certified
    # remainder sup|dmhat| * 2 sqrt(2) e^{-(cut - r)/2} is below 1e-17 of the
    # integrand scale
    sup_probe = float(np.max(np.abs(dmhat(np.linspace(0.0, S, 4097))))) if S > 0 else 0.0
    margin = 2.0 * math.log(max(sup_probe, 1.0) * 1e18)
    for i, r in enumerate(r_grid):
        if r >= S:
            vals[i] = 0.0
        else:
            s_hi = min(S, r + margin)
            vals[i] = ABEL_PREFACTOR * _abel_type_integral(dmhat, r, s_hi, freq, tol=tol)
    return RadialProfile(r_grid, vals, 0.5, osc_freq=freq)


# ---------------------------------------------------------------------------
# holomorphic multiplier recovery (heat multiplier demonstration)
# ---------------------------------------------------------------------------

def heat_multiplier(t):
    def m(lam):
        lam = np.asarray(lam)
        return np.exp(-t * (lam**2 + 0.25))
    return m


def heat_multiplier_at(t, lam_complex):
    lamc = complex(lam_complex)
    return complex(np.exp(-t * (lamc**2 + 0.25)))


def multiplier_extension_check(t, strip_points, t_source=0.5, r_max=None,
                               tol=1e-8, guard=1e-12):
    """Recover the heat multiplier e^{-t(lam^2+1/4)} at strip points.

    Applies the multiplier to a source with known nonvanishing transform
    (heat profile at t_source), then divides the transform of the image by
    that of the source: m(lam) = (T f)~(lam) / f~(lam).  Returns a list of
    (lam, recovered, exact, relative residual).
    """
    t_total = t + t_source

    def m_product(lam):
        lam = np.asarray(lam)
        return np.exp(-t_total * (lam**2 + 0.25))

    lam_hi = math.sqrt(max(1.0, 40.0 / t_total))
    if r_max is None:
        r_max = 2.0 * math.sqrt(4.0 * t_total * 40.0)
    r_anchor = np.linspace(0.0, r_max, 33)
    Tf_eval = _SynthesisEvaluator(m_product, 0.0, lam_hi, r_max, steps_per_wavelength=140)
    Tf = RadialProfile(r_anchor, Tf_eval(r_anchor), 2.0, evaluate=Tf_eval)
    results = []
    for lam in strip_points:
        lamc = complex(lam)
        if abs(lamc.imag) > 0.5:
            raise ValueError("strip points must satisfy |Im lam| <= 1/2")
        num = spherical_transform(Tf, [lamc], tol=tol, tail_rtol=3e-7).values[0]
        den = heat_multiplier_at(t_source, lamc)
        if abs(den) < guard:
            raise DivisionUnstableError(f"source transform {abs(den):.2e} below guard at {lamc}")
        recovered = num / den
        exact = heat_multiplier_at(t, lamc)
        residual = abs(recovered - exact) / max(abs(exact), 1e-300)
        results.append((lamc, complex(recovered), exact, float(residual)))
    return results
