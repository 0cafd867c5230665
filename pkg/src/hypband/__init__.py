"""Numerical laboratory for spectral projector kernels on the hyperbolic plane
and its Fuchsian quotients.

Submodules
----------
geometry     half-plane points, Mobius maps, Fuchsian orbits, Poincare sums
special      Gamma-based normalizations and spherical functions (two routes)
transform    spherical Fourier transform pair, Plancherel, multiplier kernels
projector    band cutoffs, window kernels, telescoping and bound scans
extremizers  radial and geodesic-beam lower-bound examples, exponent fits
quotient     periodized kernels and cylinder eigenfunction identities
dispersive   time-evolved band kernels and the subordination weight
cusp         parabolic-cylinder divergence witness
harness      experiment configs, runners and CSV/JSON persistence
"""

__version__ = "0.1.0"
