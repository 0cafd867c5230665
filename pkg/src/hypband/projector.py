"""Band cutoffs and their radial kernels: windows, annular pieces, Stein twist.

Two cutoff constructions:

* plateau: the transform-side profile equals 1 on [-1, 1] and falls to 0 on
  [1, 2] through the exp(-1/x) smooth step; this is the §4-style cutoff whose
  annular difference piece has transform supported away from the origin.
* bspline: chi(xi) = sinc(xi/m)^m, whose transform is the m-fold box
  convolution (support radius 1); the strictly positive mixture of two
  incommensurately scaled copies backs the subordination weight.

Kernels are produced by the Abel-type formula (exact support truncation) and
cross-checked against the spectral synthesis in the transform module.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from . import quadrature as quad
from .transform import MultiplierSymbol, RadialProfile, multiplier_kernel_abel

SQRT_2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# smooth step and bump families
# ---------------------------------------------------------------------------

def _h(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 1e-12
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a = _h(x)
    b = _h(1.0 - x)
    return np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, a / (a + b + (a + b == 0.0))))


def smooth_step_prime(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 1e-9) & (x < 1.0 - 1e-9)
    out = np.zeros_like(x)
    xi = x[inside]
    a, b = _h(xi), _h(1.0 - xi)
    da = a / xi**2
    db = b / (1.0 - xi) ** 2
    out[inside] = (da * b + a * db) / (a + b) ** 2
    return out


@dataclass
class BumpFamily:
    """Even cutoff chi with compactly supported transform chi_hat.

    The derived annular piece is psi = chi - chi(./2)/2, whose transform
    psi_hat = chi_hat - chi_hat(2 .) vanishes on the inner half of the
    support for the plateau kind (exactly) and only approximately for the
    bspline kinds.
    """

    kind: str
    hat_support_radius: float
    chi: Callable
    chi_hat: Callable
    chi_hat_prime: Callable
    chi_tail_radius: float
    chi_at_zero: float
    chi_hat_second: Optional[Callable] = None

    def psi(self, xi):
        return self.chi(xi) - 0.5 * self.chi(0.5 * np.asarray(xi, dtype=float))

    def psi_hat(self, s):
        s = np.asarray(s, dtype=float)
        return self.chi_hat(s) - self.chi_hat(2.0 * s)

    def psi_hat_prime(self, s):
        s = np.asarray(s, dtype=float)
        return self.chi_hat_prime(s) - 2.0 * self.chi_hat_prime(2.0 * s)


def _plateau_chi_hat(s):
    s = np.abs(np.asarray(s, dtype=float))
    return np.where(s <= 1.0, 1.0, smooth_step(2.0 - s))


def _plateau_chi_hat_prime(s):
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    inner = (a > 1.0) & (a < 2.0)
    out = np.zeros_like(s)
    out[inner] = -np.sign(s[inner]) * smooth_step_prime(2.0 - a[inner])
    return out


def _plateau_chi_factory(cut=None):
    """chi by the inverse cosine transform of the plateau profile.

    Values beyond `cut` (where |chi| has fallen under 1e-8 of chi(0)) are
    returned as exact 0; the truncation is consistent across every caller,
    so derived identities (telescoping) remain exact.
    """
    def chi(xi):
        xi = np.atleast_1d(np.abs(np.asarray(xi, dtype=float)))
        out = np.zeros(xi.shape)
        mask = xi <= (cut if cut is not None else math.inf)
        if not np.any(mask):
            return out
        xs = xi[mask]
        n = quad.panel_count(float(np.max(xs)), 0.0, 2.0, min_panels=8)
        nodes, w = quad.panel_nodes(quad.uniform_edges(0.0, 2.0, n))
        base = _plateau_chi_hat(nodes) * w
        vals = np.empty(len(xs))
        step = max(1, int(4_000_000 / max(1, len(nodes))))
        for i in range(0, len(xs), step):
            vals[i:i + step] = np.cos(np.outer(xs[i:i + step], nodes)) @ base
        out[mask] = math.sqrt(2.0 / math.pi) * vals
        return out
    return chi


def _sinc_pow(x, m):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-6
    core = np.where(small, 1.0 - x**2 / 6.0, np.sin(np.where(small, 1.0, x)) / np.where(small, 1.0, x))
    return core**m


def _irwin_hall(x, m):
    """Density of the sum of m uniform(0,1) variables, vectorized."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    fact = math.factorial(m - 1)
    for j in range(m + 1):
        out += (-1.0) ** j * math.comb(m, j) * np.maximum(x - j, 0.0) ** (m - 1)
    return np.where((x >= 0) & (x <= m), out / fact, 0.0)


def _irwin_hall_prime(x, m):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    fact = math.factorial(m - 2)
    for j in range(m + 1):
        out += (-1.0) ** j * math.comb(m, j) * np.maximum(x - j, 0.0) ** (m - 2)
    return np.where((x >= 0) & (x <= m), out / ((m - 1) * fact) * (m - 1), 0.0)


def _irwin_hall_second(x, m):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    fact = math.factorial(m - 3)
    for j in range(m + 1):
        out += (-1.0) ** j * math.comb(m, j) * np.maximum(x - j, 0.0) ** (m - 3)
    return np.where((x >= 0) & (x <= m), out / fact / (m - 1) * (m - 1), 0.0)


def _bspline_pair(m, beta=1.0):
    """chi(xi) = sinc(beta xi / m)^m and its transform pieces."""
    h = beta / m

    def chi(xi):
        return _sinc_pow(h * np.asarray(xi, dtype=float), m)

    def chi_hat(s):
        s = np.asarray(s, dtype=float)
        return SQRT_2PI * _irwin_hall(s / (2 * h) + m / 2.0, m) / (2 * h)

    def chi_hat_prime(s):
        s = np.asarray(s, dtype=float)
        return SQRT_2PI * _irwin_hall_prime(s / (2 * h) + m / 2.0, m) / (2 * h) ** 2

    def chi_hat_second(s):
        s = np.asarray(s, dtype=float)
        return SQRT_2PI * _irwin_hall_second(s / (2 * h) + m / 2.0, m) / (2 * h) ** 3

    return chi, chi_hat, chi_hat_prime, chi_hat_second


@lru_cache(maxsize=None)
def build_bump(kind, order=4) -> BumpFamily:
    """Construct a cutoff family: kind in {"plateau", "bspline", "positive"}.

    bspline/positive require an even order >= 4.  The plateau cutoff keeps
    chi_hat = 1 on [-1, 1] (so chi(0) = integral of chi_hat != 1); the
    bspline kinds are normalized to chi(0) = 1 instead.
    """
    if kind == "plateau":
        raw = _plateau_chi_factory()
        tail = _plateau_tail_radius(raw)
        # dense spline of chi (oscillation scale ~2, so 0.01 spacing leaves
        # locally-relative interpolation error around 1e-9)
        knots = np.arange(0.0, tail + 0.02, 0.01)
        spline = CubicSpline(knots, raw(knots))

        def chi(xi):
            xi = np.abs(np.asarray(xi, dtype=float))
            return np.where(xi <= tail, spline(np.minimum(xi, tail)), 0.0)

        chi0 = float(chi(np.array([0.0]))[0])
        return BumpFamily("plateau", 2.0, chi, _plateau_chi_hat,
                          _plateau_chi_hat_prime, tail, chi0)
    if kind in ("bspline", "positive"):
        if order % 2 != 0 or order < 4:
            raise ValueError("bspline order must be even and >= 4")
        if kind == "bspline":
            chi, chi_hat, chi_hat_prime, chi_hat_second = _bspline_pair(order)
            tail = (1e8) ** (1.0 / order) * order
            return BumpFamily("bspline", 1.0, chi, chi_hat, chi_hat_prime, tail, 1.0,
                              chi_hat_second)
        c1, h1, d1, s1 = _bspline_pair(order, 1.0)
        c2, h2, d2, s2 = _bspline_pair(order, 1.0 / math.sqrt(2.0))

        def chi(xi):
            return 0.5 * (c1(xi) + c2(xi))

        def chi_hat(s):
            return 0.5 * (h1(s) + h2(s))

        def chi_hat_prime(s):
            return 0.5 * (d1(s) + d2(s))

        def chi_hat_second(s):
            return 0.5 * (s1(s) + s2(s))

        tail = (2e8) ** (1.0 / order) * order * math.sqrt(2.0)
        return BumpFamily("positive", 1.0, chi, chi_hat, chi_hat_prime, tail, 1.0,
                          chi_hat_second)
    raise ValueError(f"unknown bump kind {kind!r}")


def _plateau_tail_radius(chi, floor=1e-8, hi=250.0):
    grid = np.linspace(0.0, hi, 2501)
    v = np.abs(chi(grid))
    keep = np.nonzero(v >= floor * v[0])[0]
    return float(grid[min(keep[-1] + 1, len(grid) - 1)])


# ---------------------------------------------------------------------------
# windows, dyadic bookkeeping, Stein twist
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralWindow:
    lam: float
    eta: float

    def __post_init__(self):
        if not (self.lam > 0 and self.eta > 0):
            raise ValueError("window needs lam > 0 and eta > 0")

    def require_high_frequency(self):
        if self.eta > self.lam:
            raise ValueError(f"high-frequency routines need eta <= lam, got {self}")


def dyadic_base_index(lam):
    """k0 = -ceil(log2 lam), so 2^-k0 >= lam > 2^-k0-1."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    return -int(math.ceil(math.log2(lam)))


@dataclass(frozen=True)
class DyadicDecomposition:
    lam: float
    k0: int
    k_max: int

    @property
    def scales(self):
        return [2.0 ** (-k) for k in range(self.k0, self.k_max + 1)]


def dyadic_decomposition(lam, k_max=0):
    k0 = dyadic_base_index(lam)
    if k_max < k0:
        raise ValueError("k_max must be >= k0")
    return DyadicDecomposition(float(lam), k0, int(k_max))


def stein_theta(s, lam, y, bump: BumpFamily):
    """theta_{k0}(s) = sum_{k0 < k <= 0} 2^{(1/2+iy)k} psi_hat(2^{-k} s)."""
    s = np.asarray(s, dtype=float)
    k0 = dyadic_base_index(lam)
    out = np.zeros(s.shape, dtype=complex)
    for k in range(k0 + 1, 1):
        out += 2.0 ** ((0.5 + 1j * y) * k) * bump.psi_hat(2.0 ** (-k) * s)
    return out


def stein_theta_prime(s, lam, y, bump: BumpFamily):
    s = np.asarray(s, dtype=float)
    k0 = dyadic_base_index(lam)
    out = np.zeros(s.shape, dtype=complex)
    for k in range(k0 + 1, 1):
        out += 2.0 ** ((0.5 + 1j * y) * k) * 2.0 ** (-k) * bump.psi_hat_prime(2.0 ** (-k) * s)
    return out


def telescoping_check(lam, K, mu_grid, bump: BumpFamily):
    """Max defect of 2^k0 chi(2^k0 mu) + sum 2^k psi(2^k mu) = 2^K chi(2^K mu)."""
    k0 = dyadic_base_index(lam)
    if K <= k0:
        raise ValueError("K must exceed k0")
    mu = np.asarray(mu_grid, dtype=float)
    lhs = 2.0**k0 * bump.chi(2.0**k0 * mu)
    for k in range(k0 + 1, K + 1):
        lhs = lhs + 2.0**k * bump.psi(2.0**k * mu)
    rhs = 2.0**K * bump.chi(2.0**K * mu)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# window symbols (one object serves the Abel and the spectral route)
# ---------------------------------------------------------------------------

def window_symbol(window: SpectralWindow, bump: BumpFamily, piece="chi") -> MultiplierSymbol:
    """Symbol chi((mu-lam)/eta) + chi((mu+lam)/eta), or the psi analogue."""
    lam, eta = window.lam, window.eta
    if piece == "chi":
        f, fh, fhp = bump.chi, bump.chi_hat, bump.chi_hat_prime
        tail_factor = 1.0
    elif piece == "psi":
        f, fh, fhp = bump.psi, bump.psi_hat, bump.psi_hat_prime
        tail_factor = 2.0  # the chi(./2) term reaches twice as far
    else:
        raise ValueError("piece must be 'chi' or 'psi'")

    def m_eval(mu):
        mu = np.asarray(mu, dtype=float)
        return f((mu - lam) / eta) + f((mu + lam) / eta)

    def hat_eval(s):
        s = np.asarray(s, dtype=float)
        return 2.0 * eta * np.cos(lam * s) * fh(eta * s)

    def hat_prime(s):
        s = np.asarray(s, dtype=float)
        return 2.0 * eta * (-lam * np.sin(lam * s) * fh(eta * s)
                            + eta * np.cos(lam * s) * fhp(eta * s))

    S = bump.hat_support_radius / eta
    u = bump.chi_tail_radius * tail_factor
    return MultiplierSymbol(
        eval=m_eval, hat_eval=hat_eval, hat_prime=hat_prime,
        hat_support_radius=S, freq=lam + 3.0 * eta, freq_mu=S,
        carrier=lam, support=(max(0.0, lam - u * eta), lam + u * eta))


def stein_symbol(lam, y, bump: BumpFamily) -> MultiplierSymbol:
    """Symbol of the interpolation-family kernel at imaginary height y."""

    def m_eval(mu):
        mu = np.asarray(mu, dtype=float)
        k0 = dyadic_base_index(lam)
        out = np.zeros(mu.shape, dtype=complex)
        for k in range(k0 + 1, 1):
            sc = 2.0**k
            out += 2.0 ** ((1.5 + 1j * y) * k) * (bump.psi(sc * (mu - lam))
                                                  + bump.psi(sc * (mu + lam)))
        return out

    def hat_eval(s):
        s = np.asarray(s, dtype=float)
        return 2.0 * np.cos(lam * s) * stein_theta(s, lam, y, bump)

    def hat_prime(s):
        s = np.asarray(s, dtype=float)
        return 2.0 * (-lam * np.sin(lam * s) * stein_theta(s, lam, y, bump)
                      + np.cos(lam * s) * stein_theta_prime(s, lam, y, bump))

    S = bump.hat_support_radius
    u = bump.chi_tail_radius
    # widest annular window has scale 2^{-k0-1} ~ lam/2
    width = u * min(lam, 2.0 ** (-dyadic_base_index(lam) - 1)) * 2.0
    return MultiplierSymbol(
        eval=m_eval, hat_eval=hat_eval, hat_prime=hat_prime,
        hat_support_radius=S, freq=lam + 3.0, freq_mu=S, carrier=lam,
        support=(max(0.0, lam - width), lam + width))


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def default_r_grid(window: SpectralWindow, bump: BumpFamily, r_cap=20.0, n_log=36):
    """{0} + fine linear points below 1 + slightly jittered log points above.

    The jitter keeps the grid off resonance with cos(lam r) so suprema over
    the grid see generic phases.
    """
    S = bump.hat_support_radius / window.eta
    hi = min(S * 0.999, r_cap)
    head = np.linspace(0.0, min(1.0, 0.5 * hi), 13)
    if hi > 1.0:
        tail = np.geomspace(1.0, hi, n_log)
        tail = tail * (1.0 + 0.011 * np.sin(7.0 * np.arange(n_log)))
        tail = np.clip(tail, 1.0 + 1e-9, hi)
        grid = np.concatenate([head, tail])
    else:
        grid = head
    return np.unique(grid)


def kernel_p(window: SpectralWindow, bump: BumpFamily, r_grid, tol=1e-8) -> RadialProfile:
    """Radial kernel of the smooth window cutoff (Abel route)."""
    window.require_high_frequency()
    sym = window_symbol(window, bump, "chi")
    return multiplier_kernel_abel(sym, r_grid, tol=tol)


def kernel_q(window: SpectralWindow, bump: BumpFamily, r_grid, tol=1e-8) -> RadialProfile:
    """Radial kernel of the annular-piece cutoff (Abel route)."""
    window.require_high_frequency()
    sym = window_symbol(window, bump, "psi")
    return multiplier_kernel_abel(sym, r_grid, tol=tol)


def kernel_sigma(lam, y, bump: BumpFamily, r_grid, tol=1e-8) -> RadialProfile:
    """Radial kernel of the interpolation-family piece (Abel route)."""
    if lam <= 1.0:
        raise ValueError("interpolation-family kernel needs lam > 1")
    sym = stein_symbol(lam, y, bump)
    return multiplier_kernel_abel(sym, r_grid, tol=tol)


def kernel_support_radius(window: SpectralWindow, bump: BumpFamily):
    return bump.hat_support_radius / window.eta


# ---------------------------------------------------------------------------
# normalized bound scans
# ---------------------------------------------------------------------------

@dataclass
class BoundRow:
    lam: float
    eta: float
    regime: str
    normalized_sup: float
    r_argmax: float


@dataclass
class BoundReport:
    rows: list

    def by_regime(self, regime):
        return [row for row in self.rows if row.regime == regime]

    def octave_stability(self, regime):
        """Max ratio of normalized sups between consecutive lambda octaves."""
        rows = sorted(self.by_regime(regime), key=lambda r: (r.eta, r.lam))
        worst = 1.0
        by_eta = {}
        for row in rows:
            by_eta.setdefault(round(math.log(row.eta) if row.eta > 0 else 0, 9), []).append(row)
        for group in by_eta.values():
            for a, b in zip(group[:-1], group[1:]):
                if a.normalized_sup > 0 and b.normalized_sup > 0:
                    ratio = max(a.normalized_sup, b.normalized_sup) / \
                        min(a.normalized_sup, b.normalized_sup)
                    worst = max(worst, ratio)
        return worst

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("lambda,eta,regime,normalized_sup,r_argmax\n")
            for row in self.rows:
                fh.write(f"{row.lam!r},{row.eta!r},{row.regime},"
                         f"{row.normalized_sup!r},{row.r_argmax!r}\n")


def _sup(values, grid, mask):
    if not np.any(mask):
        return 0.0, 0.0
    vals = values[mask]
    i = int(np.argmax(vals))
    return float(vals[i]), float(grid[mask][i])


def verify_busard_bounds(lambdas=(8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0),
                         eta_kinds=("inv_lam", 0.1, 1.0), bump=None,
                         epsilon=0.5, tol=1e-8, include_eta_eq_lam=False):
    """Normalized kernel sups per regime over the (lam, eta) scan.

    Regimes: window kernel at r <= 1 against lam*eta; window kernel at r > 1
    against lam^(1/2) eta e^(-r/2); annular kernel against
    lam^(1/2) eta (1+eta)^(1/2) e^(-eps/(8 eta)) e^(-(1-eps)r/2).  The
    annular row is skipped for eta = 1/lam where the target is below
    quadrature noise.
    """
    if bump is None:
        bump = build_bump("plateau")
    rows = []
    for lam in lambdas:
        etas = []
        for kind in eta_kinds:
            etas.append(1.0 / lam if kind == "inv_lam" else float(kind))
        if include_eta_eq_lam:
            etas.append(lam)
        for eta in etas:
            w = SpectralWindow(lam, eta)
            grid = default_r_grid(w, bump)
            p = np.abs(kernel_p(w, bump, grid, tol=tol).values)
            sup_small, arg_small = _sup(p / (lam * eta), grid, grid <= 1.0)
            sup_large, arg_large = _sup(p * np.exp(0.5 * grid) / (math.sqrt(lam) * eta),
                                        grid, grid > 1.0)
            rows.append(BoundRow(lam, eta, "p_small_r", sup_small, arg_small))
            if np.any(grid > 1.0):
                rows.append(BoundRow(lam, eta, "p_large_r", sup_large, arg_large))
            if eta * lam > 1.5:  # skip eta = 1/lam: annular target under noise
                q = np.abs(kernel_q(w, bump, grid, tol=tol).values)
                norm = (math.sqrt(lam) * eta * math.sqrt(1.0 + eta)
                        * math.exp(-epsilon / (8.0 * eta)))
                qn = q * np.exp(0.5 * (1.0 - epsilon) * grid) / norm
                sup_q, arg_q = _sup(qn, grid, np.ones_like(grid, dtype=bool))
                rows.append(BoundRow(lam, eta, "q_decay", sup_q, arg_q))
    return BoundReport(rows)


def verify_sigma_bounds(lambdas=(8.0, 32.0, 128.0), ys=(0.0, 5.0), bump=None, tol=1e-8):
    """sup_r |sigma_{lam,y}| / sqrt(lam) rows (kernel supported in r <= 2)."""
    if bump is None:
        bump = build_bump("plateau")
    rows = []
    grid = np.unique(np.concatenate([np.linspace(0.0, 2.0, 41),
                                     np.geomspace(0.02, 2.0, 25)]))
    for lam in lambdas:
        for y in ys:
            sig = np.abs(kernel_sigma(lam, y, bump, grid, tol=tol).values)
            sup, arg = _sup(sig / math.sqrt(lam), grid, np.ones_like(grid, dtype=bool))
            rows.append(BoundRow(lam, y, f"sigma_y{y:g}", sup, arg))
    return BoundReport(rows)


def low_frequency_check(lam, eta, bump=None, r_grid=None, tol=1e-9):
    """sup_r |p_{lam,eta}(r)| / ((lam^2+eta^2) eta (1+r) e^{-r/2}).

    Valid for 0 <= lam <= 1, 0 < eta < 1; lam = 0 is taken as the degenerate
    window centered at the spectral origin.
    """
    if not (0.0 <= lam <= 1.0 and 0.0 < eta < 1.0):
        raise ValueError("low-frequency check needs 0 <= lam <= 1, 0 < eta < 1")
    if bump is None:
        bump = build_bump("plateau")
    lam_eff = max(lam, 1e-12)
    S = bump.hat_support_radius / eta

    def hat_prime(s):
        s = np.asarray(s, dtype=float)
        return 2.0 * eta * (-lam * np.sin(lam * s) * bump.chi_hat(eta * s)
                            + eta * np.cos(lam * s) * bump.chi_hat_prime(eta * s))

    sym = MultiplierSymbol(eval=lambda mu: (bump.chi((np.asarray(mu) - lam) / eta)
                                            + bump.chi((np.asarray(mu) + lam) / eta)),
                           hat_prime=hat_prime, hat_support_radius=S,
                           freq=lam_eff + 3.0 * eta)
    if r_grid is None:
        r_grid = np.unique(np.concatenate([np.linspace(0.0, 1.0, 9),
                                           np.geomspace(1.0, min(S * 0.999, 25.0), 25)]))
    p = np.abs(multiplier_kernel_abel(sym, r_grid, tol=tol).values)
    norm = (lam**2 + eta**2) * eta * (1.0 + r_grid) * np.exp(-0.5 * r_grid)
    vals = p / norm
    i = int(np.argmax(vals))
    return float(vals[i]), float(r_grid[i])
