"""Spectrum of the reduced auxiliary transfer matrix and the wedge of quasilocality.

Run with ``python demos/02_auxiliary_spectrum.py``.
"""
import cmath
import math

import numpy as np

from hirota import auxiliary as aux
from hirota import quasilocality as ql
from hirota.weyl import make_root

root = make_root(2, 3)
kappa = 2.0
lam, mu = 0.4 + 0.1j, 0.6 - 0.2j

red = aux.reduce(aux.aux_transfer_factorized(lam, mu, kappa, root))
vals = np.linalg.eigvals(red)
print("6 x 6 block, entry-by-entry formula residual:",
      np.linalg.norm(red - aux.reduced_closed_form(lam, mu, kappa, root.q)))
for name, v in aux.tau_closed_forms(lam, mu, kappa).items():
    print(f"  {name:5s} = {v:.6f}   nearest eigenvalue off by {np.min(np.abs(vals - v)):.1e}")
print("  remaining pair:", aux.q_dependent_eigenvalues(red, lam, mu, kappa))

# follow the eigenvalues around a circle |lambda| = 1.5
print("\nphi     |tau|/rho   leading")
for phi in np.linspace(0, math.pi / 2, 10):
    rec = ql.scan_point(1.5, phi, kappa, root)
    print(f"{phi:5.3f}   {1 - rec.observable:8.5f}   {rec.leading}")

for (ell, m), k in [((2, 3), 2.0), ((4, 5), 3.0), ((2, 7), 3.0)]:
    r = make_root(ell, m)
    edge = ql.locate_wedge_edge(1.5, k, r)
    print(f"q = exp(i {ell} pi/{m}), kappa = {k}: edge at {edge:.6f}, eta pi/(2m) = {ql.wedge_half_angle(r):.6f}")

print("\nin the wedge:", [z for z in (0.5, cmath.exp(0.4j), 1j, -2.0) if z in ql.WedgeDomain(root)])
