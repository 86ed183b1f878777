"""Invariant suite behind ``hirota verify``: one residual per identity."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import auxiliary as aux
from . import dynamics as dyn
from . import mps
from . import quasilocality as ql
from . import transfer as tr
from .weyl import DEFAULT_TOL, ChainGeometry, RootOfUnity, Tolerances, clock_shift, hs_norm2, local_gram, parity_map

__all__ = ["CheckResult", "run_suite"]


@dataclass
class CheckResult:
    check: str
    residual: float
    tolerance: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def row(self) -> dict:
        return {"check": self.check, "residual": float(self.residual), "tolerance": float(self.tolerance),
                "passed": self.passed, "note": self.note}


def _rel(a, b):
    return float(np.linalg.norm(a) / max(np.linalg.norm(b), 1e-300))


def _algebra(root, tol):
    pair = clock_shift(root)
    u, v, m = pair.u, pair.v, root.m
    eye = np.eye(m)
    yield CheckResult("weyl.commutation", np.linalg.norm(u @ v - root.q * v @ u), tol.local)
    order = np.linalg.norm(np.linalg.matrix_power(u, m) - eye) + np.linalg.norm(np.linalg.matrix_power(v, m) - eye)
    yield CheckResult("weyl.order", order, tol.local)
    yield CheckResult("weyl.gram", np.linalg.norm(local_gram(pair) - np.eye(m * m)), tol.local)


def _transfer(root, kappa, geom, tol, rng):
    pair = clock_shift(root)
    t0 = tr.transfer(0.0, kappa, geom, pair)
    i_even, i_odd = tr.trivial_charges(geom, pair)
    yield CheckResult("transfer.t0_norm", abs(hs_norm2(t0) - 2), tol.chain)
    # T(0) = S + S^-1 with S the product of all shifts
    s = np.ones((1, 1))
    for _ in range(geom.n_sites):
        s = np.kron(s, pair.u)
    yield CheckResult("transfer.t0_shift_product", np.linalg.norm(t0 - s - s.conj().T), tol.chain)
    if root.m == 3:
        p = i_odd @ i_even
        yield CheckResult("transfer.t0_trivial", np.linalg.norm(t0 - p - p @ p), tol.chain)
    yield CheckResult("transfer.first_derivative_at_zero", hs_norm2(tr.transfer_derivative(0.0, kappa, geom, pair)), tol.chain)
    lam, mu = rng.normal(size=2) + 1j * rng.normal(size=2)
    a = tr.transfer(lam, kappa, geom, pair)
    b = tr.transfer(mu, kappa, geom, pair)
    yield CheckResult("transfer.commuting_rel", _rel(a @ b - b @ a, a) / max(np.linalg.norm(b), 1e-300), tol.chain)
    yield CheckResult("transfer.intertwining", tr.check_intertwining(lam, kappa, pair), tol.local)


def _dynamics(root, kappa, geom, tol, rng):
    if abs(complex(kappa).imag) > 0:
        yield CheckResult("dynamics", 0.0, 0.0, "skipped: needs real kappa")
        return
    pair = clock_shift(root)
    prop = dyn.build_propagator(geom, pair, kappa.real)
    u = prop.full
    yield CheckResult("dynamics.unitarity", np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])), tol.local * geom.dim_total)
    lam = complex(rng.normal(), rng.normal())
    t = tr.transfer(lam, kappa, geom, pair)
    yield CheckResult("dynamics.transfer_conserved_rel", _rel(u @ t - t @ u, t), tol.chain)
    ws = dyn.all_w(geom, pair)
    closed = ws
    conj = ws
    worst = 0.0
    for _ in range(2):
        closed = dyn.step_closed_form(closed, kappa.real, root)
        conj = [dyn.step_conjugate(w, prop) for w in conj]
        worst = max(worst, max(np.linalg.norm(a - b) for a, b in zip(closed, conj)))
    yield CheckResult("dynamics.closed_form_vs_conjugation", worst, tol.chain)
    i_even, i_odd = tr.trivial_charges(geom, pair)
    yield CheckResult("dynamics.trivial_charges_conserved",
                      max(np.linalg.norm(u @ i_even - i_even @ u), np.linalg.norm(u @ i_odd - i_odd @ u)), tol.chain)
    if root.m == 3:
        w = np.kron(pair.u @ pair.v, pair.u @ pair.v_inv)
        k2 = kappa.real ** 2
        r = dyn.r_matrix(k2, w, root)
        c = np.trace(r @ r.conj().T).real / r.shape[0]
        ref = scipy.linalg.logm(r / math.sqrt(c)) + 0.5 * math.log(c) * np.eye(r.shape[0])
        yield CheckResult("dynamics.log_r_closed_form", np.linalg.norm(dyn.log_r_closed_form_m3(k2, w, root) - ref), tol.chain)


def _auxiliary(root, kappa, geom, tol, rng):
    pair = clock_shift(root)
    lam = rng.normal(size=4) * 0.6 + 1j * rng.normal(size=4) * 0.6
    x = tr.transfer(lam[0], kappa, geom, pair) @ tr.transfer(lam[1], kappa, geom, pair)
    y = tr.transfer(lam[2], kappa, geom, pair) @ tr.transfer(lam[3], kappa, geom, pair)
    lhs = np.vdot(x, y) / geom.dim_total
    big = aux.aux_transfer(lam[0], lam[1], lam[2], lam[3], kappa, root)
    rhs = np.trace(np.linalg.matrix_power(big, geom.n_half))
    yield CheckResult("aux.trace_identity_rel", abs(lhs - rhs) / max(abs(rhs), 1e-300), tol.chain)
    l, m_ = lam[0], lam[2]
    red = aux.reduce(aux.aux_transfer_factorized(l, m_, kappa, root))
    vals = np.linalg.eigvals(red)
    closed = aux.tau_closed_forms(l, m_, kappa)
    worst = max(min(abs(vals - v)) / max(1.0, abs(v)) for v in closed.values())
    yield CheckResult("aux.closed_form_eigenvalues", worst, tol.chain)
    key_res, eig_res = aux.check_factorization(l, kappa, root, mu=m_)
    yield CheckResult("aux.factorization_keys", key_res, tol.local)
    yield CheckResult("aux.factorization_eigen", eig_res, tol.chain)


def _quasilocality(root, kappa, geom, tol, rng, lam):
    half = ql.wedge_half_angle(root)
    pairs = []
    for _ in range(3):
        a = rng.uniform(0.2, 1.2) * cmath.exp(1j * rng.uniform(-0.8, 0.8) * half)
        b = rng.uniform(0.2, 1.2) * cmath.exp(1j * rng.uniform(-0.8, 0.8) * half)
        pairs.append((a, b))
    worst = max(abs(ql.hs_kernel(a, b, kappa, root.q) - ql.hs_kernel_from_aux(a, b, kappa, root)) for a, b in pairs)
    yield CheckResult("quasilocality.kernel_two_path", worst, tol.chain)
    try:
        edge = ql.locate_wedge_edge(1.5, kappa, root)
        yield CheckResult("quasilocality.wedge_edge", abs(edge - half), 0.02)
    except ValueError as exc:
        yield CheckResult("quasilocality.wedge_edge", math.inf, 0.02, str(exc))
    pair = clock_shift(root)
    x = ql.build_charge(lam, kappa, root, geom, mem_cap=None)
    if abs(complex(kappa).imag) == 0:
        u = dyn.build_propagator(geom, pair, kappa.real).full
        yield CheckResult("quasilocality.charge_conserved_rel", _rel(u @ x - x @ u, x), tol.chain)
    yield CheckResult("quasilocality.charge_parity_rel", _rel(parity_map(x, geom, pair) - x, x), tol.chain)
    exact = ql.finite_chain_overlap(lam, lam, kappa, root, geom.n_half)
    yield CheckResult("quasilocality.norm_vs_aux_traces_rel",
                      abs(hs_norm2(x) - exact.real) / max(abs(exact), 1e-300), tol.chain)


def _mps(root, kappa, tol, lam):
    table = mps.coefficient_table(lam, kappa, root, 3)
    from_table = dict(mps.decay_weights_from_table(table))
    from_aux = dict(mps.decay_profile(lam, kappa, root, 3))
    yield CheckResult("mps.weights_table_vs_transfer", max(abs(from_table[r] - from_aux[r]) for r in from_aux), tol.chain)
    full = mps.decay_profile(lam, kappa, root, 4000)
    kern = ql.hs_kernel(lam, lam, kappa, root.q).real
    yield CheckResult("mps.weights_sum_to_kernel_rel", abs(sum(w for _, w in full) - kern) / abs(kern), 1e-6)


def run_suite(root: RootOfUnity, kappa: complex, geom: ChainGeometry, tol: Tolerances = DEFAULT_TOL,
              lam: complex = 0.5, seed: int = 7) -> list[CheckResult]:
    """Run every check at the given sizes; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    kappa = complex(kappa)
    out = []
    out += list(_algebra(root, tol))
    out += list(_transfer(root, kappa, geom, tol, rng))
    out += list(_dynamics(root, kappa, geom, tol, rng))
    out += list(_auxiliary(root, kappa, geom, tol, rng))
    if ql.wedge_predicate(lam, root):
        out += list(_quasilocality(root, kappa, geom, tol, rng, lam))
        out += list(_mps(root, kappa, tol, lam))
    else:
        out.append(CheckResult("quasilocality", 0.0, 0.0, f"skipped: lambda={lam} outside the wedge"))
    return out
