"""Staggered and double Lax components, and the auxiliary transfer matrix.

Components are keyed by ``(i, j, k, l)`` in ``Z_m^4``: ``(i, j)`` labels the
basis element ``u^i v^j`` on the odd site of a unit cell and ``(k, l)`` the one
on the even site. Auxiliary vectors use the computational basis with the
leftmost factor most significant, so ``|n1 n2 n3 n4>`` has index
``8 n1 + 4 n2 + 2 n3 + n4``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .weyl import RootOfUnity, WeylPair, basis_element

__all__ = [
    "PSI_S",
    "PSI_T",
    "REDUCED_BASIS",
    "REDUCED_LABELS",
    "PARITY_6",
    "staggered_keys",
    "staggered_components",
    "staggered_from_expansion",
    "double_lax",
    "double_lax_family",
    "double_lax_keys",
    "leading_component",
    "singlet_eigenvalue",
    "triplet_eigenvalue",
    "singlet_triplet",
    "aux_transfer",
    "aux_transfer_factorized",
    "reduce",
    "null_block_residual",
    "reduced_closed_form",
    "tau_closed_forms",
    "ReducedEigensystem",
    "reduced_eigensystem",
    "q_dependent_eigenvalues",
    "check_factorization",
    "check_kappa_commutation",
    "aux_parity",
]

_KET0 = np.array([1.0, 0.0])
_KET1 = np.array([0.0, 1.0])
PSI_S = (np.kron(_KET0, _KET1) - np.kron(_KET1, _KET0)) / np.sqrt(2)
PSI_T = (np.kron(_KET0, _KET1) + np.kron(_KET1, _KET0)) / np.sqrt(2)

REDUCED_LABELS = ("0000", "0101", "0110", "1001", "1010", "1111")
REDUCED_BASIS = tuple(int(s, 2) for s in REDUCED_LABELS)
PARITY_6 = np.fliplr(np.eye(6))


def _ketbra(a, b):
    out = np.zeros((2, 2), dtype=complex)
    out[a, b] = 1.0
    return out


def staggered_keys(m: int) -> tuple:
    """The eight keys carrying a nonzero staggered component."""
    n = m - 1
    return ((0, 1, 0, n), (0, 1, 1, 0), (0, n, 0, 1), (0, n, n, 0),
            (1, 0, 0, n), (1, 0, 1, 0), (n, 0, 0, 1), (n, 0, n, 0))


def staggered_components(lam: complex, kappa: complex, m: int, deriv: int = 0) -> dict:
    """Nonzero components of ``L_2(lam/kappa) L_1(lam kappa)`` (or their lambda-derivatives).

    Each component is ``coeff * lam**power * |a><b|``.
    """
    n = m - 1
    table = {
        (0, 1, 0, n): (-1.0, 2, 1, 1),
        (0, 1, 1, 0): (kappa, 1, 0, 1),
        (0, n, 0, 1): (-1.0, 2, 0, 0),
        (0, n, n, 0): (-kappa, 1, 1, 0),
        (1, 0, 0, n): (-1.0 / kappa, 1, 1, 0),
        (1, 0, 1, 0): (1.0, 0, 0, 0),
        (n, 0, 0, 1): (1.0 / kappa, 1, 0, 1),
        (n, 0, n, 0): (1.0, 0, 1, 1),
    }
    out = {}
    for key, (c, p, a, b) in table.items():
        if deriv > p:
            continue
        fall = 1
        for t in range(deriv):
            fall *= p - t
        out[key] = c * fall * lam ** (p - deriv) * _ketbra(a, b)
    return out


def _lax_local_components(lam, pair):
    """``L^{i,j}(lam)`` with ``L(lam) = sum L^{i,j} (x) e_{i,j}``, by projection."""
    from .transfer import lax

    blocks = lax(0, lam, pair).blocks
    m = pair.m
    comps = {}
    for i in range(m):
        for j in range(m):
            e = basis_element(i, j, pair)
            c = np.einsum("kl,abkl->ab", e.conj(), blocks) / m
            if np.abs(c).max() > 1e-13:
                comps[(i, j)] = c
    return comps


def staggered_from_expansion(lam: complex, kappa: complex, pair: WeylPair) -> dict:
    """Staggered components obtained by expanding the Lax operators in the basis."""
    odd = _lax_local_components(lam * kappa, pair)
    even = _lax_local_components(lam / kappa, pair)
    out = {}
    for (i, j), c1 in odd.items():
        for (k, l), c2 in even.items():
            prod = c2 @ c1
            if np.abs(prod).max() > 1e-13:
                out[(i, j, k, l)] = prod
    return out


def _add_keys(a, b, m):
    return tuple((x + y) % m for x, y in zip(a, b))


@lru_cache(maxsize=None)
def double_lax_keys(m: int) -> tuple:
    """Keys reachable as sums of two staggered keys."""
    keys = staggered_keys(m)
    return tuple(sorted({_add_keys(a, b, m) for a in keys for b in keys}))


def double_lax_family(lam1, lam2, kappa, root: RootOfUnity, d1: int = 0, d2: int = 0) -> dict:
    """All nonzero double Lax components ``LL^[ijkl](lam1, lam2)``.

    ``d1``/``d2`` take derivatives of the staggered components in the first /
    second spectral slot.
    """
    m = root.m
    first = staggered_components(lam1, kappa, m, d1)
    second = staggered_components(lam2, kappa, m, d2)
    out = {}
    for k1, a in first.items():
        i1, j1, k1_, l1 = k1
        for k2, b in second.items():
            key = _add_keys(k1, k2, m)
            i, j, k, l = key
            phase = root.power((i1 - i) * j1 + (k1_ - k) * l1)
            term = phase * np.kron(a, b)
            if key in out:
                out[key] = out[key] + term
            else:
                out[key] = term
    return out


def double_lax(key, lam1, lam2, kappa, root: RootOfUnity, d1: int = 0, d2: int = 0) -> np.ndarray:
    """One double Lax component; zero outside the reachable key set."""
    key = tuple(x % root.m for x in key)
    return double_lax_family(lam1, lam2, kappa, root, d1, d2).get(key, np.zeros((4, 4), dtype=complex))


def leading_component(lam1, lam2, kappa) -> np.ndarray:
    """Closed form of ``LL^[0000](lam1, lam2)``."""
    k2 = kappa**2 + kappa**-2
    out = np.zeros((4, 4), dtype=complex)
    out[1, 1] = out[2, 2] = 1 + lam1**2 * lam2**2
    out[1, 2] = out[2, 1] = -k2 * lam1 * lam2
    return out


def singlet_eigenvalue(lam1, lam2, kappa):
    return 1 + (kappa**2 + kappa**-2) * lam1 * lam2 + lam1**2 * lam2**2


def triplet_eigenvalue(lam1, lam2, kappa):
    return 1 - (kappa**2 + kappa**-2) * lam1 * lam2 + lam1**2 * lam2**2


def singlet_triplet(lam1, lam2, kappa):
    """``((Lambda_s, psi_s), (Lambda_t, psi_t))`` for the leading component."""
    return ((singlet_eigenvalue(lam1, lam2, kappa), PSI_S.astype(complex)),
            (triplet_eigenvalue(lam1, lam2, kappa), PSI_T.astype(complex)))


def aux_transfer(lam1, lam2, mu1, mu2, kappa, root: RootOfUnity, dx: int = 0, dy: int = 0) -> np.ndarray:
    """``TT = sum_k conj(LL^k(lam1, lam2)) (x) LL^k(mu1, mu2)``, a 16 x 16 matrix.

    ``dx`` differentiates the conjugated factor in its second slot (a derivative
    in ``conj(lam2)``), ``dy`` the plain factor in its second slot.
    """
    left = double_lax_family(lam1, lam2, kappa, root, 0, dx)
    right = double_lax_family(mu1, mu2, kappa, root, 0, dy)
    out = np.zeros((16, 16), dtype=complex)
    for key, a in left.items():
        b = right.get(key)
        if b is not None:
            out += np.kron(a.conj(), b)
    return out


def aux_transfer_factorized(lam, mu, kappa, root: RootOfUnity, dx: int = 0, dy: int = 0) -> np.ndarray:
    """``TT(lam q^1/2, lam q^-1/2, mu q^1/2, mu q^-1/2)`` with optional slot derivatives."""
    qh = root.q_half
    return aux_transfer(lam * qh, lam / qh, mu * qh, mu / qh, kappa, root, dx, dy)


def reduce(aux: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Restrict a factorized auxiliary transfer matrix to the six-dimensional block.

    The rows and columns outside the block must vanish; a ``ValueError`` is
    raised otherwise.
    """
    resid = null_block_residual(aux)
    scale = max(1.0, np.abs(aux).max())
    if resid > tol * scale:
        raise ValueError(f"auxiliary transfer matrix has weight {resid:.3e} outside the reduced block")
    idx = list(REDUCED_BASIS)
    return aux[np.ix_(idx, idx)]


def null_block_residual(aux: np.ndarray) -> float:
    """Largest entry in rows or columns outside the reduced block."""
    comp = [k for k in range(16) if k not in REDUCED_BASIS]
    return float(max(np.abs(aux[comp, :]).max(), np.abs(aux[:, comp]).max()))


def reduced_closed_form(lam, mu, kappa, q, square_weight: float = 1.0) -> np.ndarray:
    """The explicit 6 x 6 reduced auxiliary transfer matrix, entry by entry.

    Entries (2, 2) and (5, 5) are ``a^4 b^4 + w (a^2 + b^2)^2 + 1`` with
    ``a = conj(lam)``, ``b = mu``; the correct weight is ``w = 1``. Any other
    weight destroys the closed-form eigenvalues.
    """
    a = np.conj(lam)
    b = mu
    k2 = kappa**2 + kappa**-2
    k4 = kappa**4 + kappa**-4
    q2 = q**2
    qq = q2 + 1 / q2
    g = k2 * (a**3 * b**3 + a * b) - a * b**3 - a**3 * b
    corner = a**2 * b**2 * k4 + (qq + 2) * a**2 * b**2
    diag1 = a**4 * b**4 + (qq + 2) * a**2 * b**2 + 1
    diag2 = a**4 * b**4 + square_weight * (a**2 + b**2) ** 2 + 1
    diag3 = a**4 + a**4 * b**4 + b**4 + qq * a**2 * b**2 + 1
    r2c1 = k2 * (a**3 * b**3 + a * b) - q2 * a * b**3 - a**3 * b / q2
    r2c6 = k2 * (a**3 * b**3 + a * b) - q2 * a**3 * b - a * b**3 / q2
    r3c1 = k2 * (a**3 * b**3 / q2 + q2 * a * b) - a * b**3 - a**3 * b
    r3c6 = k2 * (a * b / q2 + q2 * a**3 * b**3) - a * b**3 - a**3 * b
    mb2 = -b**2 * (1 + a**4) * k2
    ma2 = -a**2 * (1 + b**4) * k2
    ab2 = a**2 * b**2
    return np.array([
        [diag1, g, g, g, g, corner],
        [r2c1, diag2, mb2 + 2 * ab2, ma2 + 2 * ab2, ab2 * (k4 + 4), r2c6],
        [r3c1, mb2 + qq * ab2, diag3, ab2 * (k4 + qq + 2), ma2 + qq * ab2, r3c6],
        [r3c6, ma2 + qq * ab2, ab2 * (k4 + qq + 2), diag3, mb2 + qq * ab2, r3c1],
        [r2c6, ab2 * (k4 + 4), ma2 + 2 * ab2, mb2 + 2 * ab2, diag2, r2c1],
        [corner, g, g, g, g, diag1],
    ], dtype=complex)


def tau_closed_forms(lam, mu, kappa) -> dict:
    """The four q-independent eigenvalues of the reduced matrix."""
    a = np.conj(lam)
    b = mu
    k = kappa
    k4 = k**4
    return {
        "tau1": -(k**2 - a**2) * (k**2 * a**2 - 1) * (k**2 + b**2) * (k**2 * b**2 + 1) / k4,
        "tau2": -(k**2 + a**2) * (k**2 * a**2 + 1) * (k**2 - b**2) * (k**2 * b**2 - 1) / k4,
        "tau3": a**4 * b**4 - (k**8 + 1) * a**2 * b**2 / k4 + 1,
        "tau": (k**2 + a**2) * (k**2 * a**2 + 1) * (k**2 + b**2) * (k**2 * b**2 + 1) / k4,
    }


@dataclass(frozen=True, eq=False)
class ReducedEigensystem:
    """Eigen-decomposition of a 6 x 6 reduced matrix.

    ``matches`` maps each closed-form name to the index of the nearest computed
    eigenvalue; ``others`` lists the indices of the two remaining ones.
    """

    values: np.ndarray
    left: np.ndarray
    right: np.ndarray
    matches: dict
    others: tuple
    closed: dict
    cond: float

    def mismatch(self, name: str) -> float:
        return float(abs(self.values[self.matches[name]] - self.closed[name]))


def _match(values, closed):
    matches = {}
    free = list(range(len(values)))
    # assign the closed forms greedily by distance, most certain first
    pairs = sorted(((abs(values[i] - c), name, i) for name, c in closed.items() for i in free))
    used_names = set()
    for _, name, i in pairs:
        if name in used_names or i not in free:
            continue
        matches[name] = i
        used_names.add(name)
        free.remove(i)
    return matches, tuple(free)


def reduced_eigensystem(red: np.ndarray, lam, mu, kappa, cond_warn: float = 1e8) -> ReducedEigensystem:
    """Full non-Hermitian eigensystem with the closed-form eigenvalues identified."""
    vals, left, right = scipy.linalg.eig(red, left=True, right=True)
    closed = tau_closed_forms(lam, mu, kappa)
    matches, others = _match(vals, closed)
    try:
        cond = float(np.linalg.cond(right))
    except np.linalg.LinAlgError:
        cond = float("inf")
    if not np.isfinite(cond) or cond > cond_warn:
        warnings.warn(f"reduced matrix close to defective (eigenvector condition {cond:.3e})",
                      RuntimeWarning, stacklevel=2)
    return ReducedEigensystem(vals, left, right, matches, others, closed, cond)


def _charpoly(a: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients (highest power first), Faddeev-LeVerrier."""
    n = a.shape[0]
    coeffs = [1.0 + 0j]
    mk = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        mk = a @ mk + coeffs[-1] * eye
        coeffs.append(-np.trace(a @ mk) / k)
    return np.array(coeffs)


def q_dependent_eigenvalues(red: np.ndarray, lam, mu, kappa) -> np.ndarray:
    """The two eigenvalues without closed form, without calling an eigensolver.

    Divides the characteristic polynomial by the four known linear factors and
    solves the remaining quadratic.
    """
    poly = _charpoly(red)
    for c in tau_closed_forms(lam, mu, kappa).values():
        poly, _ = np.polydiv(poly, np.array([1.0, -c]))
    a, b, c = poly[-3:]
    disc = np.sqrt(b * b - 4 * a * c)
    return np.array([(-b + disc) / (2 * a), (-b - disc) / (2 * a)])


def check_factorization(lam, kappa, root: RootOfUnity, mu=None, shifted: bool = True,
                        state: np.ndarray = PSI_S) -> tuple[float, float]:
    """Residuals of the factorization condition.

    Returns ``(max_k ||LL^k psi||, ||TT Psi - tau Psi||)`` where the maximum
    runs over every nonzero key. With ``shifted=False`` both slots use ``lam``
    (a negative control).
    """
    if mu is None:
        mu = lam
    qh = root.q_half if shifted else 1.0
    fam = double_lax_family(lam * qh, lam / qh, kappa, root)
    zero = (0, 0, 0, 0)
    worst = max(np.linalg.norm(c @ state) for key, c in fam.items() if key != zero)
    big = aux_transfer(lam * qh, lam / qh, mu * qh, mu / qh, kappa, root)
    psi = np.kron(state, state)
    tau = np.conj(singlet_eigenvalue(lam * qh, lam / qh, kappa)) * singlet_eigenvalue(mu * qh, mu / qh, kappa)
    return float(worst), float(np.linalg.norm(big @ psi - tau * psi))


def check_kappa_commutation(lam, mu, root: RootOfUnity, kappa, kappa_other) -> float:
    """``||[TT_r(lam, mu; kappa), TT_r(lam, mu; kappa')]||_F``."""
    a = reduce(aux_transfer_factorized(lam, mu, kappa, root))
    b = reduce(aux_transfer_factorized(lam, mu, kappa_other, root))
    return float(np.linalg.norm(a @ b - b @ a))


def aux_parity() -> np.ndarray:
    """``P (x) P`` on the four-fold auxiliary space with ``P = -sigma_y (x) sigma_y``."""
    sy = np.array([[0, -1j], [1j, 0]])
    p = -np.kron(sy, sy)
    return np.kron(p, p)
