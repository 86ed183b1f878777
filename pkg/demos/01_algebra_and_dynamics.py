"""Weyl pairs, the zigzag variables and one period of the Floquet map.

Run with ``python demos/01_algebra_and_dynamics.py``.
"""
import numpy as np

from hirota import dynamics as dyn
from hirota import transfer as tr
from hirota.weyl import ChainGeometry, clock_shift, hs_norm2, make_root

root = make_root(2, 3)          # q = exp(2 pi i / 3)
pair = clock_shift(root)
print(root, "  |uv - q vu| =", np.linalg.norm(pair.u @ pair.v - root.q * pair.v @ pair.u))

# four sites, two unit cells
geom = ChainGeometry(2, root.m)
ws = dyn.all_w(geom, pair)
print("w_1 w_2 = q^2 w_2 w_1:", np.allclose(ws[0] @ ws[1], root.q**2 * ws[1] @ ws[0]))

# the propagator is a product of local r-matrices; the closed-form update agrees with U^-1 w U
kappa = 2.0
prop = dyn.build_propagator(geom, pair, kappa)
closed = dyn.step_closed_form(ws, kappa, root)
conj = [dyn.step_conjugate(w, prop) for w in ws]
print("closed form vs conjugation after one step:", max(np.linalg.norm(a - b) for a, b in zip(closed, conj)))

# the staggered transfer matrix is conserved and commutes with itself
t1 = tr.transfer(0.3 + 0.2j, kappa, geom, pair)
t2 = tr.transfer(-0.7, kappa, geom, pair)
u = prop.full
print("||[U, T]|| =", np.linalg.norm(u @ t1 - t1 @ u), "  ||[T, T']|| =", np.linalg.norm(t1 @ t2 - t2 @ t1))

# small-lambda expansion: T(0) has norm 2 and no linear term
print("||T(0)||^2 =", hs_norm2(tr.transfer(0.0, kappa, geom, pair)))
print("||T'(0)||^2 =", hs_norm2(tr.transfer_derivative(0.0, kappa, geom, pair)))
for n in (2, 3, 4):
    print(f"  N={n}: ||T''(0)||^2 = {tr.derivative_norms(2, 1.0, pair, [n])[0]:.1f}")
