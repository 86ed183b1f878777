"""Local densities of X(lambda) in the operator basis and their decay with support.

Run with ``python demos/04_matrix_product_form.py``.
"""
import numpy as np

from hirota import mps
from hirota import quasilocality as ql
from hirota.weyl import ChainGeometry, make_root

root = make_root(2, 3)
lam, kappa = 0.5, 1.0

table = mps.coefficient_table(lam, kappa, root, 4)
print("strings per support:", {r: len(table.block(r)) for r in range(1, 5)})
print("one-cell coefficients:", table.block(1))

profile = mps.decay_profile(lam, kappa, root, 12)
for r, w in profile:
    print(f"  r = {r:2d}: weight {w:.6e}")
print("fitted decay rate:", mps.fit_decay_rate(profile))
total = sum(w for _, w in mps.decay_profile(lam, kappa, root, 2000))
print("sum of weights:", total, " kernel:", ql.hs_kernel(lam, lam, kappa, root.q).real)

# translate-and-sum on finite rings, compared with the traceless part of X
for n in (2, 3):
    geom = ChainGeometry(n, root.m)
    x = ql.build_charge(lam, kappa, root, geom)
    x -= np.trace(x) / x.shape[0] * np.eye(x.shape[0])
    a = mps.assemble_truncated(table, geom, r_max=n)
    print(f"N = {n}: relative deviation {np.linalg.norm(a - x) / np.linalg.norm(x):.3f}")
