"""Half-plane geometry, Mobius actions, Fuchsian orbits and Poincare sums.

Groups are presented either as a single hyperbolic translation (``cyclic``,
generator z -> exp(ell) z up to conjugation) or as a list of Mobius
generators acting freely (``schottky``).  Orbit enumeration walks reduced
words depth-first, never stepping back onto the inverse of the last letter.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InsufficientDataError

DET_TOL = 1e-12


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"half-plane point needs y > 0, got y = {self.y}")

    @property
    def z(self):
        return complex(self.x, self.y)


@dataclass(frozen=True)
class Mobius:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > DET_TOL:
            raise ValueError(f"Mobius matrix must have det 1, got {det}")

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def translation_along_axis(cls, ell):
        """diag(e^{ell/2}, e^{-ell/2}): z -> e^ell z."""
        h = math.exp(0.5 * ell)
        return cls(h, 0.0, 0.0, 1.0 / h)

    def inverse(self):
        return Mobius(self.d, -self.b, -self.c, self.a)

    def compose(self, other):
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def trace(self):
        return self.a + self.d

    def translation_length(self):
        """2 arccosh(|tr|/2) for hyperbolic elements, 0 otherwise."""
        t = 0.5 * abs(self.trace())
        if t <= 1.0:
            return 0.0
        return 2.0 * math.acosh(t)


def mobius_apply(g: Mobius, z: HalfPlanePoint) -> HalfPlanePoint:
    """Standard action z -> (az + b)/(cz + d)."""
    det = g.a * g.d - g.b * g.c
    if abs(det - 1.0) > DET_TOL:
        raise ValueError("degenerate matrix: determinant far from 1")
    w = (g.a * z.z + g.b) / (g.c * z.z + g.d)
    return HalfPlanePoint(w.real, w.imag)


def hyperbolic_distance(z: HalfPlanePoint, w: HalfPlanePoint) -> float:
    """arccosh(1 + |z-w|^2 / (2 y_z y_w)), guarded at coincident points."""
    dz = z.z - w.z
    arg = 1.0 + (dz.real * dz.real + dz.imag * dz.imag) / (2.0 * z.y * w.y)
    return math.acosh(max(1.0, arg))


def _apply_complex(g: Mobius, z: complex) -> complex:
    return (g.a * z + g.b) / (g.c * z + g.d)


def _dist_complex(z: complex, w: complex) -> float:
    dz = z - w
    arg = 1.0 + (dz.real * dz.real + dz.imag * dz.imag) / (2.0 * z.imag * w.imag)
    return math.acosh(max(1.0, arg))


@dataclass(frozen=True)
class GroupPresentation:
    """Fuchsian group as generators plus enumeration limits.

    kind = "cyclic": generated by z -> exp(ell) z.
    kind = "schottky": free group on the given Mobius generators.
    prune_radius bounds the reported orbit: words certified (triangle
    inequality with the per-letter displacement bound) to keep every
    extension beyond the radius are dropped.
    """

    kind: str
    ell: float = 0.0
    generators: tuple = ()
    max_word_length: int = 0
    prune_radius: float = math.inf

    def __post_init__(self):
        if self.kind == "cyclic":
            if not self.ell > 0:
                raise ValueError("cyclic group needs ell > 0")
        elif self.kind == "schottky":
            if len(self.generators) == 0:
                raise ValueError("schottky group needs at least one generator")
        else:
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.max_word_length < 0:
            raise ValueError("max_word_length must be >= 0")
        if self.prune_radius < 0:
            raise ValueError("prune_radius must be >= 0")

    def generator(self):
        if self.kind != "cyclic":
            raise ValueError("generator() is the cyclic accessor")
        return Mobius.translation_along_axis(self.ell)


def cyclic_group(ell, max_word_length=20, prune_radius=math.inf):
    return GroupPresentation("cyclic", ell=ell, max_word_length=max_word_length,
                             prune_radius=prune_radius)


def schottky_group(generators, max_word_length=6, prune_radius=math.inf):
    return GroupPresentation("schottky", generators=tuple(generators),
                             max_word_length=max_word_length, prune_radius=prune_radius)


def _letters(group: GroupPresentation):
    """Generators and inverses as (index, matrix); inverse of letter i is i^1."""
    letters = []
    for g in group.generators:
        letters.append(g)
        letters.append(g.inverse())
    return letters


def enumerate_orbit(group: GroupPresentation, z: HalfPlanePoint, z0: HalfPlanePoint,
                    max_word_length=None, prune_radius=None):
    """Distances d(gamma z, z0) over reduced words up to the length cap.

    Returns a list of (word_length, distance), identity included, sorted by
    (word_length, distance).  Words whose every extension provably exceeds
    prune_radius are cut; surviving words with d > prune_radius are omitted
    from the output but still extended.
    """
    L = group.max_word_length if max_word_length is None else max_word_length
    R = group.prune_radius if prune_radius is None else prune_radius
    if group.kind == "cyclic":
        out = []
        ell = group.ell
        g = group.generator()
        zc = z.z
        fwd = zc
        bwd = zc
        d0 = _dist_complex(zc, z0.z)
        if d0 <= R:
            out.append((0, d0))
        shrink = math.exp(-ell)
        for k in range(1, L + 1):
            fwd = _apply_complex(g, fwd)
            bwd = bwd * shrink
            d1 = _dist_complex(fwd, z0.z)
            d2 = _dist_complex(bwd, z0.z)
            if d1 <= R:
                out.append((k, d1))
            if d2 <= R:
                out.append((k, d2))
        out.sort()
        return out

    letters = _letters(group)
    n = len(letters)
    # per-letter displacement at z bounds how much one extension can shrink d
    disp = max(_dist_complex(_apply_complex(g, z.z), z.z) for g in letters)
    out = []
    z0c = z0.z

    def visit(w, depth, last):
        d = _dist_complex(w, z0c)
        if d <= R:
            out.append((depth, d))
        if depth == L:
            return
        # certified prune: extensions shrink d by at most (L - depth) * disp
        if d - (L - depth) * disp > R:
            return
        for i in range(n):
            if last >= 0 and i == (last ^ 1):
                continue
            visit(_apply_complex(letters[i], w), depth + 1, i)

    visit(z.z, 0, -1)
    out.sort()
    return out


@dataclass(frozen=True)
class PoincareSum:
    s: float
    partial: float
    word_length_used: int
    tail_bound: float


def _min_displacement(group: GroupPresentation, z: HalfPlanePoint):
    """Per-letter decay rate for the tail bound.

    Cyclic groups use the translation length (certified: d(g^k z, z) >=
    k * ell).  Schottky groups use the minimal generator displacement at the
    basepoint, which is the documented crude surrogate.
    """
    if group.kind == "cyclic":
        return group.ell
    return min(_dist_complex(_apply_complex(g, z.z), z.z) for g in _letters(group))


def _words_per_length(group: GroupPresentation, n):
    if group.kind == "cyclic":
        return 2 if n >= 1 else 1
    g = len(group.generators)
    if n == 0:
        return 1
    return 2 * g * (2 * g - 1) ** (n - 1)


def poincare_partial_sum(group: GroupPresentation, s, z: HalfPlanePoint,
                         z0: HalfPlanePoint, L) -> PoincareSum:
    """Partial sum of exp(-s d(gamma z, z0)) over words of length <= L.

    The tail bound majorizes each longer word by
    exp(-s (m |word| - d(z, z0))) with m the per-letter rate, then sums the
    geometric series against the reduced-word count.
    """
    if s <= 0:
        raise ValueError("Poincare exponent s must be > 0")
    orbit = enumerate_orbit(group, z, z0, max_word_length=L, prune_radius=math.inf)
    partial = float(np.sum(np.exp(-s * np.array([d for (_, d) in orbit]))))
    m = _min_displacement(group, z)
    if m <= 0:
        raise DivergenceError("minimal generator displacement is 0: no tail bound")
    d00 = hyperbolic_distance(z, z0)
    if group.kind == "cyclic":
        growth = 1.0
        count0 = 2.0
    else:
        g = len(group.generators)
        growth = max(1.0, 2.0 * g - 1.0)
        count0 = 2.0 * g
    ratio = growth * math.exp(-s * m)
    if ratio >= 1.0:
        raise DivergenceError(
            f"geometric tail ratio {ratio:.3f} >= 1 at s = {s}; raise s or L")
    # sum_{n > L} count(n) e^{-s(m n - d00)}; the 1e-12 pad keeps the bracket
    # valid under floating roundoff when the bound is attained (on-axis cyclic)
    first = count0 * growth ** L * math.exp(-s * (m * (L + 1) - d00))
    tail = (first / (1.0 - ratio)) * (1.0 + 1e-12)
    return PoincareSum(float(s), partial, int(L), float(tail))


def cyclic_poincare_closed_form(s, ell):
    """Limit of the on-axis cyclic sum: (1 + e^{-s ell}) / (1 - e^{-s ell})."""
    q = math.exp(-s * ell)
    return (1.0 + q) / (1.0 - q)


def critical_exponent_estimate(group: GroupPresentation, radius_grid,
                               z: HalfPlanePoint | None = None):
    """Least-squares slope of log #{orbit points within R} against R.

    Heuristic orbit-count regression; documented accuracy is qualitative
    (cyclic groups report ~0, genuinely thick groups report delta > 0).
    """
    radius_grid = np.asarray(radius_grid, dtype=float)
    if radius_grid.size < 2:
        raise InsufficientDataError("need at least two radii for a slope")
    if z is None:
        z = HalfPlanePoint(0.0, 1.0)
    r_max = float(np.max(radius_grid))
    m = _min_displacement(group, z)
    if group.kind == "cyclic":
        counts = np.array([1 + 2 * int(math.floor(r / group.ell)) for r in radius_grid],
                          dtype=float)
    else:
        L = min(group.max_word_length, int(math.ceil(r_max / max(m, 1e-9))) + 2)
        orbit = enumerate_orbit(group, z, z, max_word_length=L, prune_radius=r_max)
        dists = np.array([d for (_, d) in orbit])
        counts = np.array([np.sum(dists <= r) for r in radius_grid], dtype=float)
    if counts[-1] < 10:
        raise InsufficientDataError(
            f"only {int(counts[-1])} orbit points within R = {r_max}")
    slope = float(np.polyfit(radius_grid, np.log(counts), 1)[0])
    return max(0.0, slope)


def schottky_two_generator(ell1=3.0, ell2=3.0, feet=(2.0, 8.0)):
    """Two hyperbolic translations with disjoint, separated axes.

    First generator translates along the imaginary axis; the second along the
    geodesic with the given positive real feet, built by conjugation.
    """
    f1, f2 = feet
    if not (0.0 < f1 < f2):
        raise ValueError("feet must satisfy 0 < f1 < f2 (disjoint from the imaginary axis)")
    a = Mobius.translation_along_axis(ell1)
    # conj sends 0 -> f1, inf -> f2:  z -> (f2 z + f1)/(z + 1)
    s = 1.0 / math.sqrt(f2 - f1)
    conj = Mobius(f2 * s, f1 * s, s, s)
    b = conj.compose(Mobius.translation_along_axis(ell2)).compose(conj.inverse())
    return schottky_group([a, b])
