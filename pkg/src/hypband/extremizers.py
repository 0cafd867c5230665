"""Lower-bound witnesses: the radial window profile and the geodesic-beam field.

The radial witness is the inverse transform of a sharp frequency window; its
L^p/L^2 ratio scales like lam^(1/2 - 2/p) eta^(1/2) at high frequency.  The
beam witness integrates boundary plane waves over a short boundary interval
and concentrates along the imaginary-axis geodesic; on the non-oscillating
region its ratio scales like lam^(1/4 - 1/(2p)) eta^(1/2).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from . import special
from .transform import LpReport, RadialProfile


@dataclass(frozen=True)
class ExponentTarget:
    p: float
    gamma_p: float
    branch: str


def gamma_exponent(p) -> ExponentTarget:
    """Sogge exponent max(1/2 - 2/p, (1/2)(1/2 - 1/p)) with its active branch."""
    if p <= 2:
        raise ValueError("exponent target defined for p > 2")
    radial = 0.5 - 2.0 / p
    beam = 0.5 * (0.5 - 1.0 / p)
    if p >= 6.0:
        return ExponentTarget(float(p), radial, "radial")
    return ExponentTarget(float(p), beam, "knapp")


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float
    scale_grid: np.ndarray


def fit_exponent(pairs) -> ExponentFit:
    """Ordinary least squares of log(value) against log(scale)."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("need at least 3 (scale, value) pairs")
    scales = np.array([float(s) for s, _ in pairs])
    values = np.array([float(v) for _, v in pairs])
    if np.any(values <= 0.0) or np.any(scales <= 0.0):
        raise ValueError("scales and values must be positive")
    x, y = np.log(scales), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return ExponentFit(float(slope), float(intercept), max(0.0, r2), scales)


# ---------------------------------------------------------------------------
# radial window witness
# ---------------------------------------------------------------------------

def _window_indicator(lam, eta):
    """f~ = 1 on [lam-eta/2, lam+eta/2] plus the mirrored window, on mu >= 0."""
    def f(mu):
        mu = np.asarray(mu, dtype=float)
        return ((np.abs(mu - lam) <= 0.5 * eta).astype(float)
                + (np.abs(mu + lam) <= 0.5 * eta).astype(float))
    return f


def _window_nodes(lam, eta, r_max):
    """Gauss nodes over the (possibly origin-clipped) sharp windows."""
    pieces = []
    lo, hi = lam - 0.5 * eta, lam + 0.5 * eta
    pieces.append((max(lo, 0.0), hi))
    if lo < 0.0:  # mirrored window spills onto mu >= 0
        pieces.append((0.0, -lo))
    nodes, weights = [], []
    for a, b in pieces:
        if b <= a:
            continue
        n = quad.panel_count(r_max + 1.0, a, b, min_panels=4)
        x, w = quad.panel_nodes(quad.uniform_edges(a, b, n))
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def spherical_example(lam, eta, p, r_max=None, samples_per_wavelength=40,
                      steps_per_wavelength=60):
    """L^p/L^2 ratio of the sharp-window radial witness.

    L^2 comes from the Plancherel integral in closed quadrature; L^p from a
    chunked Simpson rule over a grid resolving p times the top frequency.
    Returns {"l2", "lp", "ratio", "profile"}.
    """
    if p <= 2:
        raise ValueError("ratio meaningful for p > 2")
    if r_max is None:
        r_max = min(40.0, 23.0 / (0.5 * p - 1.0) + 8.0)
    nodes, weights = _window_nodes(lam, eta, r_max)
    dens = special.plancherel_density_vec(nodes)
    ftilde = _window_indicator(lam, eta)(nodes)
    # Plancherel: ||f||_2^2 = (1/2 pi^2) int |ftilde|^2 dens
    l2 = math.sqrt(float(np.sum(ftilde**2 * dens * weights)) / (2.0 * math.pi**2))
    amp = ftilde * dens * weights / (2.0 * math.pi**2)

    grid = special.PhiGrid(nodes, r_max + 0.05, steps_per_wavelength=steps_per_wavelength)
    top = lam + 0.5 * eta
    n = int(math.ceil(r_max * max(1.0, top) * p * samples_per_wavelength / (2.0 * math.pi)))
    n = max(400, n)
    if n % 2 == 1:
        n += 1
    h = r_max / n
    total = 0.0
    total_sq = 0.0
    tail_amp = 0.0
    block = 200_000
    keep_r, keep_f = [], []
    for start in range(0, n + 1, block):
        idx = np.arange(start, min(start + block, n + 1))
        r = idx * h
        f = grid.at(r) @ amp
        w = np.where(idx % 2 == 1, 4.0, 2.0)
        w[idx == 0] = 1.0
        w[idx == n] = 1.0
        af = np.abs(f)
        total += float(np.sum(af**p * np.sinh(r) * w))
        total_sq += float(np.sum(af**2 * np.sinh(r) * w))
        if idx[-1] == n:
            tail_amp = float(np.max(af[-max(2, len(f) // 50):]))
        stride = max(1, len(idx) // 400)
        keep_r.append(r[::stride])
        keep_f.append(f[::stride])
    value_p = 2.0 * math.pi * total * h / 3.0
    l2_radial = math.sqrt(2.0 * math.pi * total_sq * h / 3.0)
    a = 0.5
    if p * a > 1.0:
        tail = 2.0 * math.pi * tail_amp**p * 0.5 * (
            math.exp(r_max) / (p * a - 1.0) + math.exp(-r_max) / (p * a + 1.0))
        tail_bound = tail ** (1.0 / p)
    else:
        tail_bound = math.inf
    lp = LpReport(p, r_max, value_p ** (1.0 / p), tail_bound, not math.isfinite(tail_bound))
    profile = RadialProfile(np.concatenate(keep_r), np.concatenate(keep_f), 0.5,
                            osc_freq=top)
    return {"l2": l2, "l2_radial": l2_radial, "lp": lp, "ratio": lp.value / l2,
            "profile": profile}


def spherical_lambda_scan(lams, eta, p, **kw):
    return [(lam, spherical_example(lam, eta, p, **kw)["ratio"]) for lam in lams]


def spherical_eta_scan(lam, etas, p, **kw):
    return [(eta, spherical_example(lam, eta, p, **kw)["ratio"]) for eta in etas]


# ---------------------------------------------------------------------------
# geodesic-beam witness
# ---------------------------------------------------------------------------

@dataclass
class KnappRegionSpec:
    """Concentration region and quadrature sizes for the beam witness.

    Constraints on every node: x >= 1, x <= y/x_margin,
    mu_max * x <= y^2/x_margin, eta * log(y) <= phase_budget.
    """

    lam: float
    eta: float
    n_y: int = 64
    n_x: int = 32
    n_mu: int = 32
    n_xi: int = 32
    x_margin: float = 10.0
    phase_budget: float = 0.1

    def y_range(self):
        mu_max = self.lam + self.eta
        y_lo = max(math.sqrt(self.lam), math.sqrt(self.x_margin * mu_max) * 1.0001,
                   self.x_margin)
        y_hi = self.lam
        return y_lo, y_hi

    def validate(self):
        y_lo, y_hi = self.y_range()
        if y_lo >= y_hi:
            raise ValueError(f"empty beam region for lam={self.lam} (need lam >> 10)")
        if self.eta * math.log(y_hi) > self.phase_budget + 1e-12:
            raise ValueError(
                f"eta log(y) = {self.eta * math.log(y_hi):.3f} exceeds the phase "
                f"budget {self.phase_budget}")

    def grid(self):
        self.validate()
        y_lo, y_hi = self.y_range()
        ys = np.geomspace(y_lo, y_hi, self.n_y)
        mu_max = self.lam + self.eta
        rows = []
        for y in ys:
            x_hi = min(y / self.x_margin, y**2 / (self.x_margin * mu_max))
            if x_hi <= 1.0:
                continue
            rows.append((y, np.geomspace(1.0, x_hi, self.n_x)))
        return rows


def knapp_field(z, spec: KnappRegionSpec, n_mu=None, n_xi=None):
    """Beam witness f(z) by tensor Gauss quadrature over (mu, xi).

    z is a complex array (x + iy, y > 0); returns complex values of the same
    shape.  Valid anywhere; the scaling claims hold on the region grid.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    lam, eta = spec.lam, spec.eta
    xm, wm = quad.gauss_rule(n_mu or spec.n_mu)
    mus = lam + eta * xm
    wmu = eta * wm
    xk, wk = quad.gauss_rule(n_xi or spec.n_xi)
    x = z.real[:, None]
    y = z.imag[:, None]
    base = y / ((x - xk[None, :]) ** 2 + y**2)          # (nz, nxi)
    C = special.big_C_vec(mus)                          # (nmu,)
    expo = 0.5 + 1j * mus
    logb = np.log(base)
    # sum over xi then mu: f = (2/pi) sum_mu wmu mu^2 C(mu) sum_xi wxi base^expo
    out = np.zeros(len(z), dtype=complex)
    for j, mu in enumerate(mus):
        inner = np.exp(expo[j] * logb) @ wk
        out += wmu[j] * mu**2 * C[j] * inner
    return (2.0 / math.pi) * out


def knapp_l2_exact(lam, eta):
    """Plancherel value sqrt((2/pi) * 2 * ((lam+eta)^3 - (lam-eta)^3)/3)."""
    return math.sqrt((2.0 / math.pi) * 2.0 * ((lam + eta) ** 3 - (lam - eta) ** 3) / 3.0)


def knapp_norms(spec: KnappRegionSpec, p):
    """Exact L^2 and the region-truncated L^p of the beam witness.

    Returns {"l2_exact", "lp_region", "ratio", "band"}; band is the range of
    |f| y^(1/2) / (lam^(3/2) eta) over the region nodes.
    """
    if p <= 2:
        raise ValueError("region L^p used for p > 2")
    rows = spec.grid()
    if not rows:
        raise ValueError("empty beam region")
    lam, eta = spec.lam, spec.eta
    ys = np.array([y for y, _ in rows])
    integral = 0.0
    band_lo, band_hi = math.inf, 0.0
    row_vals = []
    for y, xs in rows:
        f = knapp_field(xs + 1j * y, spec)
        a = np.abs(f)
        norm = a * math.sqrt(y) / (lam**1.5 * eta)
        band_lo = min(band_lo, float(np.min(norm)))
        band_hi = max(band_hi, float(np.max(norm)))
        # int |f|^p dx at fixed y, trapezoid in log x
        gx = np.trapezoid(a**p * xs, np.log(xs))
        row_vals.append(gx / y**2)
    # trapezoid in log y with the measure dy = y dlog y
    row_vals = np.asarray(row_vals)
    integral = float(np.trapezoid(row_vals * ys, np.log(ys)))
    lp_region = integral ** (1.0 / p)
    l2 = knapp_l2_exact(lam, eta)
    return {"l2_exact": l2, "lp_region": lp_region, "ratio": lp_region / l2,
            "band": (band_lo, band_hi)}


def knapp_lambda_scan(lams, p, eta_rule=lambda lam: 0.1 / math.log(lam), **kw):
    """(lam, ratio) pairs with the width coupled to lam as eta = 0.1/log(lam).

    The fitted slope target 1/4 - 1/(2p) is quoted for the raw ratio: the
    mild eta(lam)^(1/2) drift and the finite-size growth of the region
    roughly offset each other at desk scale.
    """
    out = []
    for lam in lams:
        spec = KnappRegionSpec(lam, eta_rule(lam), **kw)
        res = knapp_norms(spec, p)
        out.append((lam, res["ratio"]))
    return out


def knapp_eta_scan(lam, etas, p, **kw):
    out = []
    for eta in etas:
        spec = KnappRegionSpec(lam, eta, **kw)
        out.append((eta, knapp_norms(spec, p)["ratio"]))
    return out
