import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from hirota import dynamics as dyn
from hirota.transfer import trivial_charges
from hirota.weyl import ChainGeometry, clock_shift, make_root
from oracles import r_scalar

M3 = make_root(2, 3)


def _local_w(pair):
    return np.kron(pair.u @ pair.v, pair.u @ pair.v_inv)


@pytest.mark.parametrize("ell,m", [(2, 3), (2, 5), (4, 5), (4, 7)])
def test_r_functional_relation(ell, m):
    root = make_root(ell, m)
    w = _local_w(clock_shift(root))
    eye = np.eye(m * m)
    k2 = 2.3
    lhs = dyn.r_matrix(k2, root.q * w, root) @ (k2 * eye + w)
    rhs = dyn.r_matrix(k2, w / root.q, root) @ (eye + k2 * w)
    assert np.linalg.norm(lhs - rhs) < 1e-10


@settings(max_examples=25)
@given(st.floats(0.2, 3.0), st.integers(0, 6))
def test_r_coefficients_match_product_formula(k2, power):
    root = make_root(2, 5)
    z = np.exp(2j * np.pi * power / 5)
    coeffs = dyn.r_coefficients(k2, root)
    ours = sum(c * z**k for k, c in coeffs.items())
    assert abs(ours - r_scalar(k2, z, 5, 2)) < 1e-9 * max(1, abs(ours))


def test_r_coefficients_singular():
    # k^2 q - q^-1 = 0
    with pytest.raises(ZeroDivisionError):
        dyn.r_coefficients(M3.q**-2, M3)


def test_w_neighbours_q2_commute():
    geom = ChainGeometry(2, 3)
    pair = clock_shift(M3)
    ws = dyn.all_w(geom, pair)
    for j in range(4):
        a, b = ws[j], ws[(j + 1) % 4]
        assert np.allclose(a @ b, M3.q**2 * b @ a) or np.allclose(b @ a, M3.q**2 * a @ b)
    assert np.allclose(ws[0] @ ws[2], ws[2] @ ws[0])


def test_build_w_index_errors():
    geom = ChainGeometry(2, 3)
    pair = clock_shift(M3)
    with pytest.raises(IndexError):
        dyn.build_w(5, geom, pair)


@pytest.mark.parametrize("kappa", [0.5, 2.0])
def test_propagator_unitary(kappa):
    geom = ChainGeometry(2, 3)
    u = dyn.build_propagator(geom, clock_shift(M3), kappa).full
    assert np.linalg.norm(u.conj().T @ u - np.eye(81)) < 1e-12


def test_complex_kappa_refused():
    with pytest.raises(ValueError, match="real kappa"):
        dyn.build_propagator(ChainGeometry(1, 3), clock_shift(M3), 1 + 1j)
    w = _local_w(clock_shift(M3))
    with pytest.raises(ValueError):
        dyn.unitarize_r(dyn.r_matrix((1 + 1j) ** 2, w, M3))


@pytest.mark.parametrize("ell,m,n_half", [(2, 3, 2), (2, 5, 1), (4, 5, 1)])
def test_closed_form_matches_conjugation(ell, m, n_half):
    root = make_root(ell, m)
    pair = clock_shift(root)
    geom = ChainGeometry(n_half, m)
    prop = dyn.build_propagator(geom, pair, 1.7)
    ws = dyn.all_w(geom, pair)
    traj = dyn.evolve(ws, 1.7, root, 3)
    conj = ws
    for t in range(1, 4):
        conj = [dyn.step_conjugate(w, prop) for w in conj]
        assert max(np.linalg.norm(a - b) for a, b in zip(traj[t], conj)) < 1e-9


def test_kappa_one_is_trivial():
    geom = ChainGeometry(2, 3)
    pair = clock_shift(M3)
    ws = dyn.all_w(geom, pair)
    for a, b in zip(dyn.evolve(ws, 1.0, M3, 4)[-1], ws):
        assert np.allclose(a, b, atol=1e-12)


def test_trivial_charges_conserved():
    geom = ChainGeometry(2, 3)
    pair = clock_shift(M3)
    u = dyn.build_propagator(geom, pair, 2.0).full
    for charge in trivial_charges(geom, pair):
        assert np.linalg.norm(u @ charge - charge @ u) < 1e-10


def test_odd_length_refused():
    with pytest.raises(ValueError):
        dyn.step_closed_form([np.eye(3)] * 3, 2.0, M3)


@pytest.mark.parametrize("kappa", [0.5, 0.8, 2.0, 3.0])
def test_log_r_closed_form(kappa):
    w = _local_w(clock_shift(M3))
    r = dyn.r_matrix(kappa**2, w, M3)
    c = np.trace(r @ r.conj().T).real / 9
    ref = scipy.linalg.logm(r / math.sqrt(c)) + 0.5 * math.log(c) * np.eye(9)
    assert np.linalg.norm(dyn.log_r_closed_form_m3(kappa**2, w, M3) - ref) < 1e-9


def test_log_r_only_m3():
    with pytest.raises(ValueError):
        dyn.log_r_closed_form_m3(2.0, np.eye(25), make_root(2, 5))


def test_floquet_hamiltonians_reproduce_propagator():
    geom = ChainGeometry(1, 3)
    prop = dyn.build_propagator(geom, clock_shift(M3), 2.0)
    fh = dyn.floquet_hamiltonians(prop)
    assert np.allclose(fh.h_even, fh.h_even.conj().T, atol=1e-10)
    assert np.allclose(scipy.linalg.expm(-1j * fh.h_even), fh.phase_even * prop.u_even, atol=1e-10)


def test_w_power_coefficients():
    # W = w + w^-1 with w^3 = 1 obeys W^2 = 2 + W
    assert dyn.w_power_coefficients(1) == (0, 1)
    assert dyn.w_power_coefficients(2) == (2, 1)
    w = _local_w(clock_shift(M3))
    big = w + np.linalg.inv(w)
    a, b = dyn.w_power_coefficients(5)
    assert np.allclose(np.linalg.matrix_power(big, 5), a * np.eye(9) + b * big)
    with pytest.raises(ValueError):
        dyn.w_power_coefficients(0)
