"""Dynamical variables, the r-matrix and the factorized Floquet propagator."""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .weyl import ChainGeometry, RootOfUnity, WeylPair

__all__ = [
    "site_product",
    "build_w",
    "all_w",
    "r_coefficients",
    "r_matrix",
    "unitarize_r",
    "Propagator",
    "build_propagator",
    "step_conjugate",
    "step_closed_form",
    "evolve",
    "f_map",
    "FloquetHamiltonians",
    "floquet_hamiltonians",
    "alpha_m3",
    "log_r_closed_form_m3",
    "w_power_coefficients",
]


def site_product(ops: dict[int, np.ndarray], geom: ChainGeometry) -> np.ndarray:
    """Kronecker product with ``ops[j]`` on site ``j`` and identities elsewhere."""
    out = np.ones((1, 1), dtype=complex)
    eye = np.eye(geom.m)
    for j in range(1, geom.n_sites + 1):
        out = np.kron(out, ops.get(j, eye))
    return out


def build_w(j: int, geom: ChainGeometry, pair: WeylPair) -> np.ndarray:
    """``w_j = u_{j-1} v_{j-1} u_j v_j^{-1}``, with site 0 identified with site 2N."""
    n = geom.n_sites
    if not 1 <= j <= n:
        raise IndexError(f"dynamical variable index {j} outside 1..{n}")
    if n < 2:
        raise ValueError("need at least two sites")
    prev = n if j == 1 else j - 1
    return site_product({prev: pair.u @ pair.v, j: pair.u @ pair.v_inv}, geom)


def all_w(geom: ChainGeometry, pair: WeylPair) -> list[np.ndarray]:
    """``[w_1, ..., w_2N]``."""
    return [build_w(j, geom, pair) for j in range(1, geom.n_sites + 1)]


def r_coefficients(kappa2: complex, root: RootOfUnity) -> dict[int, complex]:
    """Coefficients ``c_k`` of ``w**k`` in the r-matrix, ``k = -(m-1)/2 .. (m-1)/2``."""
    half = (root.m - 1) // 2
    coeffs = {0: 1.0 + 0j}
    c = 1.0 + 0j
    for l in range(1, half + 1):
        den = kappa2 * root.power(l) - root.power(-l)
        if abs(den) < 1e-14:
            raise ZeroDivisionError(
                f"r-matrix coefficient singular at kappa^2={kappa2}, l={l}"
            )
        c *= (kappa2 * root.power(-l + 1) - root.power(l - 1)) / den
        coeffs[l] = coeffs[-l] = c
    return coeffs


def r_matrix(kappa2: complex, w: np.ndarray, root: RootOfUnity, coeffs=None) -> np.ndarray:
    """``r(kappa^2, w) = sum_k c_k w^k`` for a two-site or full-chain ``w``.

    ``coeffs`` overrides the coefficients (used for negative controls).
    """
    if coeffs is None:
        coeffs = r_coefficients(kappa2, root)
    w = np.asarray(w, dtype=complex)
    w_inv = np.linalg.inv(w)
    out = np.zeros_like(w)
    pos = np.eye(w.shape[0], dtype=complex)
    neg = np.eye(w.shape[0], dtype=complex)
    out += coeffs[0] * pos
    for k in range(1, (root.m - 1) // 2 + 1):
        pos = pos @ w
        neg = neg @ w_inv
        out += coeffs[k] * pos + coeffs[-k] * neg
    return out


def unitarize_r(r: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Rescale ``r`` by the positive scalar that makes it unitary.

    Raises ``ValueError`` when ``r r^dag`` is not proportional to the identity,
    which happens for non-real ``kappa``.
    """
    rr = r @ r.conj().T
    c = np.trace(rr).real / r.shape[0]
    defect = np.linalg.norm(rr - c * np.eye(r.shape[0])) / max(c, 1e-300)
    if defect > tol:
        raise ValueError(f"r r^dag is not proportional to the identity (relative defect {defect:.3e})")
    return r / np.sqrt(c)


@dataclass(frozen=True, eq=False)
class Propagator:
    u_even: np.ndarray
    u_odd: np.ndarray
    kappa: complex
    r_even: tuple
    r_odd: tuple

    @property
    def full(self) -> np.ndarray:
        return self.u_even @ self.u_odd


def _require_real(kappa, what):
    if abs(complex(kappa).imag) > 0:
        raise ValueError(f"{what} needs real kappa, got {kappa}")


def build_propagator(geom: ChainGeometry, pair: WeylPair, kappa: complex,
                     unitary: bool = True, check_order: bool = True) -> Propagator:
    """``U = prod_n r(k^2, w_2n) prod_n r(k^2, w_2n-1)``.

    With ``unitary=True`` every local factor is rescaled to be unitary, which
    requires real ``kappa``.
    """
    if unitary:
        _require_real(kappa, "a unitary propagator")
    kappa2 = complex(kappa) ** 2
    ws = all_w(geom, pair)
    rs = []
    for w in ws:
        r = r_matrix(kappa2, w, pair.root)
        rs.append(unitarize_r(r) if unitary else r)
    r_odd, r_even = tuple(rs[0::2]), tuple(rs[1::2])
    if check_order:
        for group in (r_odd, r_even):
            for a in group:
                for b in group:
                    if np.linalg.norm(a @ b - b @ a) > 1e-9 * max(1.0, np.linalg.norm(a) * np.linalg.norm(b)):
                        raise RuntimeError("factors of one sublattice do not commute")
    d = geom.dim_total
    u_even = np.eye(d, dtype=complex)
    u_odd = np.eye(d, dtype=complex)
    for r in r_even:
        u_even = u_even @ r
    for r in r_odd:
        u_odd = u_odd @ r
    return Propagator(u_even, u_odd, complex(kappa), r_even, r_odd)


def step_conjugate(w: np.ndarray, prop: Propagator) -> np.ndarray:
    """Heisenberg step ``U^{-1} w U``."""
    u = prop.full
    return np.linalg.solve(u, w @ u)


def f_map(x: np.ndarray, kappa2: complex) -> np.ndarray:
    """``f(x) = (1 + k^2 x)(k^2 + x)^{-1}``, evaluated with a linear solve."""
    eye = np.eye(x.shape[0], dtype=complex)
    num = eye + kappa2 * x
    den = kappa2 * eye + x
    # num and den commute, so right division is the same as left division
    return np.linalg.solve(den, num)


def _f_inv(x, kappa2):
    eye = np.eye(x.shape[0], dtype=complex)
    return np.linalg.solve(eye + kappa2 * x, kappa2 * eye + x)


def step_closed_form(ws: list[np.ndarray], kappa: complex, root: RootOfUnity) -> list[np.ndarray]:
    """One time step of the local update rule.

    ``ws[k]`` holds ``w_{k+1}``. Even variables are updated first from the old
    odd ones; odd variables are then updated from the new even ones.
    """
    n = len(ws)
    if n % 2:
        raise ValueError("need an even number of dynamical variables")
    kappa2 = complex(kappa) ** 2
    q = root.q
    old = list(ws)
    new = list(ws)

    def at(seq, j):  # 1-based periodic access
        return seq[(j - 1) % n]

    for j in range(2, n + 1, 2):
        left = f_map(q * at(old, j + 1), kappa2)
        right = _f_inv(q * at(old, j - 1), kappa2)
        new[j - 1] = left @ at(old, j) @ right
    for j in range(1, n + 1, 2):
        left = f_map(q * at(new, j + 1), kappa2)
        right = _f_inv(q * at(new, j - 1), kappa2)
        new[j - 1] = left @ at(old, j) @ right
    return new


def evolve(ws: list[np.ndarray], kappa: complex, root: RootOfUnity, steps: int) -> list[list[np.ndarray]]:
    """Trajectory ``[w(0), w(1), ..., w(steps)]`` under the closed-form map."""
    traj = [list(ws)]
    for _ in range(steps):
        traj.append(step_closed_form(traj[-1], kappa, root))
    return traj


@dataclass(frozen=True, eq=False)
class FloquetHamiltonians:
    h_even: np.ndarray
    h_odd: np.ndarray
    phase_even: complex
    phase_odd: complex


def _local_log(r, branch_tol):
    ev = np.linalg.eigvals(r)
    bad = [z for z in ev if abs(z.imag) < branch_tol and z.real < 0]
    if bad:
        raise ValueError(f"r has eigenvalue {bad[0]} on the branch cut of the logarithm")
    return scipy.linalg.logm(r)


def floquet_hamiltonians(prop: Propagator, branch_tol: float = 1e-12) -> FloquetHamiltonians:
    """``H = i sum log r`` per sublattice with the principal matrix logarithm.

    ``phase_*`` is the scalar with ``exp(-iH) = phase * U``; it is 1 up to
    rounding when the local factors commute.
    """
    _require_real(prop.kappa, "Floquet Hamiltonians")
    out = []
    for rs, u in ((prop.r_even, prop.u_even), (prop.r_odd, prop.u_odd)):
        h = 1j * sum(_local_log(r, branch_tol) for r in rs)
        e = scipy.linalg.expm(-1j * h)
        phase = np.trace(np.linalg.solve(u, e)) / u.shape[0]
        out.append((h, complex(phase)))
    (he, pe), (ho, po) = out
    return FloquetHamiltonians(he, ho, pe, po)


def alpha_m3(kappa2: complex, root: RootOfUnity) -> complex:
    """``alpha = (k^2 - 1)/(k^2 q - q^{-1})`` so that ``r = 1 + alpha (w + w^-1)`` at ``m = 3``."""
    return (kappa2 - 1) / (kappa2 * root.q - 1 / root.q)


def log_r_closed_form_m3(kappa2: complex, w: np.ndarray, root: RootOfUnity) -> np.ndarray:
    """Closed-form ``log r`` for ``m = 3``; scalar logs use the principal branch."""
    if root.m != 3:
        raise ValueError("closed form only available for m = 3")
    a = alpha_m3(kappa2, root)
    c_id = cmath.log((1 + 2 * a) * (1 - a) ** 2) / 3
    c_w = cmath.log((1 + 2 * a) / (1 - a)) / 3
    eye = np.eye(w.shape[0], dtype=complex)
    return c_id * eye + c_w * (w + np.linalg.inv(w))


def w_power_coefficients(n: int) -> tuple[int, int]:
    """``(A(n), B(n))`` with ``W**n = A(n) + B(n) W`` for ``W = w + w^-1``, ``w**3 = 1``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    a, b = 0, 1
    for _ in range(n - 1):
        a, b = 2 * b, a + b
    return a, b
