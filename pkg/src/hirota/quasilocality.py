"""The charge X(lambda), its HS kernel and the wedge of quasilocality."""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .auxiliary import (
    PSI_S,
    PSI_T,
    REDUCED_BASIS,
    aux_transfer,
    aux_transfer_factorized,
    double_lax_family,
    leading_component,
    reduce,
    tau_closed_forms,
)
from .transfer import transfer, transfer_derivative
from .weyl import ChainGeometry, RootOfUnity, clock_shift, hs_inner

__all__ = [
    "DEFAULT_MEM_CAP",
    "singlet_lambda",
    "build_charge",
    "hs_kernel",
    "hs_kernel_from_aux",
    "KernelValue",
    "kernel_value",
    "finite_chain_overlap",
    "ExtensivityRow",
    "extensivity_study",
    "WedgeDomain",
    "wedge_half_angle",
    "wedge_predicate",
    "in_d_greater",
    "ScanRecord",
    "scan_point",
    "wedge_scan",
    "leading_margin",
    "locate_wedge_edge",
]

DEFAULT_MEM_CAP = 1 << 30


def singlet_lambda(lam, kappa):
    """``Lambda_s(lam) = 1 + (kappa^2 + kappa^-2) lam^2 + lam^4``."""
    return 1 + (kappa**2 + kappa**-2) * lam**2 + lam**4


def build_charge(lam: complex, kappa: complex, root: RootOfUnity, geom: ChainGeometry,
                 mem_cap: int | None = DEFAULT_MEM_CAP) -> np.ndarray:
    """``X(lam) = Lambda_s(lam)^-N T(lam q^1/2) d/dlam[T(lam q^-1/2)]``.

    The derivative acts on the composite argument, so it carries the factor
    ``q^-1/2``; this phase drops out of every HS inner product.
    """
    if lam == 0:
        raise ValueError("lambda = 0 is excluded")
    norm = singlet_lambda(lam, kappa)
    if abs(norm) < 1e-14:
        zeros = [1j * kappa, -1j * kappa, 1j / kappa, -1j / kappa]
        nearest = min(zeros, key=lambda z: abs(z - lam))
        raise ZeroDivisionError(f"Lambda_s vanishes at lambda={lam} (zero at {nearest})")
    geom.check_memory(None if mem_cap is None else mem_cap)
    pair = clock_shift(root)
    qh = root.q_half
    t_plus = transfer(lam * qh, kappa, geom, pair)
    d_minus = transfer_derivative(lam / qh, kappa, geom, pair, 1)
    d_minus *= 1 / qh / norm**geom.n_half
    out = t_plus @ d_minus
    del t_plus, d_minus
    return out


def hs_kernel(lam: complex, mu: complex, kappa: complex, q: complex) -> complex:
    """Closed-form HS kernel ``K(lam, mu)`` of the charges."""
    a = np.conj(lam)
    b = mu
    k2 = kappa**2 + kappa**-2
    qq = q**2 + q**-2
    resonance = a**4 + b**4 - a**2 * b**2 * qq
    den_a = a**4 + k2 * a**2 + 1
    den_b = b**4 + k2 * b**2 + 1
    if abs(resonance) < 1e-14:
        raise ZeroDivisionError(f"kernel pole: conj(lam)^4 + mu^4 - (q^2+q^-2) conj(lam)^2 mu^2 = 0 at {lam}, {mu}")
    if abs(den_a) < 1e-14 or abs(den_b) < 1e-14:
        raise ZeroDivisionError("kernel pole: Lambda_s vanishes")
    num = (2 - qq) * a * b * (a**2 + b**2) * (k2 * (a**2 * b**2 + 1) + 2 * a**2 + 2 * b**2)
    return complex(num / (2 * den_a * den_b * resonance))


def _left_eigvec(red: np.ndarray, value: complex) -> tuple[np.ndarray, float]:
    """Left eigenvector of ``red`` for the eigenvalue closest to ``value``."""
    vals, left, right = scipy.linalg.eig(red, left=True, right=True)
    i = int(np.argmin(abs(vals - value)))
    cond = np.linalg.cond(right)
    return left[:, i].conj(), float(cond)


def hs_kernel_from_aux(lam: complex, mu: complex, kappa: complex, root: RootOfUnity,
                       state: str = "singlet", cond_max: float = 1e8) -> complex:
    """HS kernel from derivatives of the auxiliary transfer matrix.

    Uses the factorized eigenvector ``psi (x) psi`` on the right and the
    numerically computed left eigenvector, normalized against it. The slot
    derivatives are exact (the double Lax components are polynomials).
    ``state="triplet"`` uses the triplet eigenpair with its own spectral shift.
    """
    qh = root.q_half
    if state == "singlet":
        sign, psi, k_sign = 1.0, PSI_S, 1.0
    elif state == "triplet":
        sign, psi, k_sign = -1.0, PSI_T, -1.0
    else:
        raise ValueError(f"unknown state {state!r}")
    a1, a2 = lam * qh, sign * lam / qh
    b1, b2 = mu * qh, sign * mu / qh
    k2 = kappa**2 + kappa**-2

    def eig(x1, x2):
        return 1 + k_sign * k2 * x1 * x2 + x1**2 * x2**2

    def d_eig(x1, x2):
        return k_sign * k2 * x1 + 2 * x1**2 * x2

    big = aux_transfer(a1, a2, b1, b2, kappa, root)
    tau = np.conj(eig(a1, a2)) * eig(b1, b2)
    basis = list(REDUCED_BASIS)
    right = np.kron(psi, psi)
    red = big[np.ix_(basis, basis)]
    left_red, cond = _left_eigvec(red, tau)
    if cond > cond_max:
        raise np.linalg.LinAlgError(
            f"leading eigenvalue is not safely simple at lambda={lam}, mu={mu} (condition {cond:.3e})")
    left = np.zeros(16, dtype=complex)
    left[basis] = left_red
    left = left / (left @ right)
    d2 = aux_transfer(a1, a2, b1, b2, kappa, root, dx=1, dy=1)
    first = left @ d2 @ right
    second = np.conj(d_eig(a1, a2)) * d_eig(b1, b2)
    return complex((first - second) / tau)


@dataclass(frozen=True)
class KernelValue:
    lam: complex
    mu: complex
    value: complex
    source: str = "closed"


def kernel_value(lam, mu, kappa, root: RootOfUnity, source: str = "closed") -> KernelValue:
    """``K(lam, mu)`` tagged with the path that produced it (``closed``, ``singlet``, ``triplet``)."""
    if source == "closed":
        val = hs_kernel(lam, mu, kappa, root.q)
    else:
        val = hs_kernel_from_aux(lam, mu, kappa, root, state=source)
    return KernelValue(complex(lam), complex(mu), val, source)


def finite_chain_overlap(lam: complex, mu: complex, kappa: complex, root: RootOfUnity, n_half: int) -> complex:
    """Exact ``<X(lam), X(mu)>`` on ``N`` cells from traces of 16 x 16 auxiliary matrices.

    Sums the placements of the two derivative cells around the ring; the
    identity component comes from the ``0000`` double Lax component alone.
    Cheap for any ``N``, so it resolves the approach to ``N K(lam, mu)``.
    """
    n = int(n_half)
    if n < 1:
        raise ValueError("n_half must be positive")
    qh = root.q_half
    a1, a2, b1, b2 = lam * qh, lam / qh, mu * qh, mu / qh
    tt = aux_transfer(a1, a2, b1, b2, kappa, root)
    dx = aux_transfer(a1, a2, b1, b2, kappa, root, dx=1)
    dy = aux_transfer(a1, a2, b1, b2, kappa, root, dy=1)
    dxy = aux_transfer(a1, a2, b1, b2, kappa, root, dx=1, dy=1)
    powers = [np.eye(16, dtype=complex)]
    for _ in range(n - 1):
        powers.append(powers[-1] @ tt)
    total = np.trace(dxy @ powers[n - 1])
    for k in range(1, n):
        total += np.trace(dx @ powers[k - 1] @ dy @ powers[n - 1 - k])
    total *= n

    def trace_part(x1, x2):
        l0 = leading_component(x1, x2, kappa)
        d0 = double_lax_family(x1, x2, kappa, root, 0, 1).get((0, 0, 0, 0), np.zeros((4, 4)))
        return n * np.trace(d0 @ np.linalg.matrix_power(l0, n - 1))

    ident = np.conj(trace_part(a1, a2)) * trace_part(b1, b2)
    norm = np.conj(singlet_lambda(lam, kappa)) ** n * singlet_lambda(mu, kappa) ** n
    return complex((total - ident) / norm)


@dataclass
class ExtensivityRow:
    n_half: int
    norm2: float
    kernel_n: float
    deviation: float
    in_wedge: bool

    @property
    def norm2_per_site(self) -> float:
        return self.norm2 / self.n_half


def extensivity_study(lam: complex, kappa: complex, root: RootOfUnity, n_list,
                      mu: complex | None = None,
                      mem_cap: int | None = DEFAULT_MEM_CAP) -> list[ExtensivityRow]:
    """Brute-force ``<X(lam), X(mu)>`` against ``N K(lam, mu)`` for each ``N``.

    For ``mu`` given, ``norm2`` and ``kernel_n`` hold the real parts of the
    cross products and ``deviation`` the modulus of their difference.
    """
    n_list = list(n_list)
    if n_list != sorted(n_list):
        raise ValueError("n_list must be ascending")
    for n in n_list:
        ChainGeometry(n, root.m).check_memory(mem_cap)
    rows = []
    inside = wedge_predicate(lam, root) and (mu is None or wedge_predicate(mu, root))
    kern = hs_kernel(lam, lam if mu is None else mu, kappa, root.q)
    for n in n_list:
        geom = ChainGeometry(n, root.m)
        x = build_charge(lam, kappa, root, geom, mem_cap)
        if mu is None:
            val = hs_inner(x, x)
        else:
            y = build_charge(mu, kappa, root, geom, mem_cap)
            val = hs_inner(x, y)
            del y
        del x
        rows.append(ExtensivityRow(n, val.real, (n * kern).real, abs(val - n * kern), inside))
    return rows


def wedge_half_angle(root: RootOfUnity) -> float:
    return root.eta * math.pi / (2 * root.m)


@dataclass(frozen=True)
class WedgeDomain:
    """Double wedge ``|arg z| < half_angle`` (mod pi) around the real axis."""

    root: RootOfUnity

    @property
    def eta(self) -> int:
        return self.root.eta

    @property
    def half_angle(self) -> float:
        return wedge_half_angle(self.root)

    def __contains__(self, z) -> bool:
        return wedge_predicate(z, self.root)

    def distance_to_edge(self, z) -> float:
        """Angular distance of ``arg z`` from the nearest wedge edge."""
        phi = abs(cmath.phase(z))
        phi = min(phi, math.pi - phi)
        return abs(phi - self.half_angle)


def _in_double_wedge(z, half):
    phi = cmath.phase(z)
    return abs(phi) < half or abs(abs(phi) - math.pi) < half


def wedge_predicate(z: complex, root: RootOfUnity) -> bool:
    """Membership in the wedge of quasilocality; ``z = 0`` is excluded."""
    if z == 0:
        warnings.warn("lambda = 0 is excluded from the wedge", RuntimeWarning, stacklevel=2)
        return False
    return _in_double_wedge(z, wedge_half_angle(root))


def in_d_greater(z: complex) -> bool:
    """Domain where the singlet eigenvalue leads the leading double Lax component."""
    return z != 0 and _in_double_wedge(z, math.pi / 4)


@dataclass
class ScanRecord:
    r: float
    phi: float
    eigenvalues: list = field(default_factory=list)
    tau: complex = 0j
    leading: bool | None = None
    observable: float | None = None
    error: str = ""

    @property
    def lam(self) -> complex:
        return self.r * cmath.exp(1j * self.phi)


def scan_point(r: float, phi: float, kappa: complex, root: RootOfUnity, tie_tol: float = 1e-10) -> ScanRecord:
    """All six eigenvalues of the reduced matrix at ``lam = mu = r e^{i phi}``."""
    lam = r * cmath.exp(1j * phi)
    rec = ScanRecord(r, phi)
    try:
        red = reduce(aux_transfer_factorized(lam, lam, kappa, root))
        vals = scipy.linalg.eigvals(red)
    except (np.linalg.LinAlgError, ValueError) as exc:
        rec.error = str(exc)
        return rec
    tau = tau_closed_forms(lam, lam, kappa)["tau"]
    rho = float(np.max(np.abs(vals)))
    rec.eigenvalues = sorted(vals, key=lambda z: (-abs(z), z.real, z.imag))
    rec.tau = complex(tau)
    rec.leading = abs(tau) >= (1 - tie_tol) * rho
    rec.observable = float(1 - abs(tau) / rho)
    return rec


def wedge_scan(root: RootOfUnity, kappa: complex, r_list, phi_grid, workers: int = 1) -> list[ScanRecord]:
    """Leading-eigenvalue map on a polar grid, ordered by ``(r, phi)``."""
    points = [(float(r), float(phi)) for r in r_list for phi in phi_grid]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_scan_task, [(r, p, kappa, root) for r, p in points]))
    return [scan_point(r, p, kappa, root) for r, p in points]


def _scan_task(args):
    return scan_point(*args)


def leading_margin(lam: complex, kappa: complex, root: RootOfUnity) -> float:
    """``|tau| - max |other eigenvalue|``; positive where ``tau`` strictly leads."""
    red = reduce(aux_transfer_factorized(lam, lam, kappa, root))
    vals = scipy.linalg.eigvals(red)
    tau = tau_closed_forms(lam, lam, kappa)["tau"]
    i = int(np.argmin(abs(vals - tau)))
    others = np.delete(vals, i)
    return float(abs(tau) - np.max(np.abs(others)))


def locate_wedge_edge(r: float, kappa: complex, root: RootOfUnity, lo: float = 1e-3,
                      hi: float = math.pi / 4, tol: float = 1e-10) -> float:
    """Bisect in ``phi`` for the angle where ``tau`` stops being the leading eigenvalue."""
    f_lo = leading_margin(r * cmath.exp(1j * lo), kappa, root)
    f_hi = leading_margin(r * cmath.exp(1j * hi), kappa, root)
    if f_lo <= 0 or f_hi > 0:
        raise ValueError(f"no leading-status change bracketed in [{lo}, {hi}] (margins {f_lo:.3e}, {f_hi:.3e})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if leading_margin(r * cmath.exp(1j * mid), kappa, root) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
