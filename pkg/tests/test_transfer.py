import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hirota import transfer as tr
from hirota.weyl import ChainGeometry, clock_shift, hs_norm2, make_root
from oracles import transfer_fd_derivative, transfer_oracle

import frozen

M3 = make_root(2, 3)
complex_lam = st.builds(complex, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))


@pytest.mark.parametrize("ell,m,n_half", [(2, 3, 1), (2, 3, 2), (2, 5, 1), (4, 5, 1)])
def test_transfer_matches_oracle(ell, m, n_half):
    root = make_root(ell, m)
    pair = clock_shift(root)
    geom = ChainGeometry(n_half, m)
    for lam, kappa in [(0.37 - 0.2j, 1.8), (1.1, 0.6), (0.5j, 1.0 + 0.3j)]:
        ours = tr.transfer(lam, kappa, geom, pair)
        ref = transfer_oracle(lam, kappa, n_half, m, ell)
        assert np.linalg.norm(ours - ref) < 1e-10 * max(1, np.linalg.norm(ref))


def test_swap_equals_inverse_kappa():
    pair = clock_shift(M3)
    geom = ChainGeometry(2, 3)
    a = tr.transfer(0.4 + 0.1j, 2.0, geom, pair, swap=True)
    b = tr.transfer(0.4 + 0.1j, 0.5, geom, pair)
    assert np.allclose(a, b, atol=1e-12)


def test_derivative_matches_finite_difference():
    pair = clock_shift(M3)
    geom = ChainGeometry(2, 3)
    lam = 0.3 + 0.25j
    ours = tr.transfer_derivative(lam, 1.6, geom, pair)
    ref = transfer_fd_derivative(lam, 1.6, 2, 3, 2)
    assert np.linalg.norm(ours - ref) < 1e-7 * np.linalg.norm(ref)


def test_taylor_orders():
    pair = clock_shift(M3)
    geom = ChainGeometry(1, 3)
    # T is a polynomial of degree 2N in lambda
    assert np.count_nonzero(tr.transfer_taylor(0.3, 2.0, geom, pair, 3)) == 0
    with pytest.raises(ValueError):
        tr.transfer_taylor(0.3, 2.0, geom, pair, -1)
    with pytest.raises(ValueError):
        tr.transfer_derivative(0.3, 2.0, geom, pair, 0)
    lam = 0.7
    series = sum(tr.transfer_taylor(0.0, 2.0, geom, pair, n) * lam**n for n in range(3))
    assert np.allclose(series, tr.transfer(lam, 2.0, geom, pair))


@pytest.mark.parametrize("n_half", [2, 3])
def test_t0_structure(n_half):
    pair = clock_shift(M3)
    geom = ChainGeometry(n_half, 3)
    t0 = tr.transfer(0.0, 2.0, geom, pair)
    i_even, i_odd = tr.trivial_charges(geom, pair)
    p = i_odd @ i_even
    assert abs(hs_norm2(t0) - 2) < 1e-9
    assert np.linalg.norm(t0 - p - p @ p) < 1e-9


def test_t0_shift_identity_m5():
    root = make_root(2, 5)
    pair = clock_shift(root)
    geom = ChainGeometry(1, 5)
    s = np.kron(pair.u, pair.u)
    assert np.allclose(tr.transfer(0.0, 1.3, geom, pair), s + s.conj().T)


@settings(max_examples=10, deadline=None)
@given(complex_lam, complex_lam)
def test_commuting_family(lam, mu):
    pair = clock_shift(M3)
    geom = ChainGeometry(2, 3)
    a = tr.transfer(lam, 2.0, geom, pair)
    b = tr.transfer(mu, 2.0, geom, pair)
    scale = max(1.0, np.linalg.norm(a) * np.linalg.norm(b))
    assert np.linalg.norm(a @ b - b @ a) < 1e-9 * scale


@pytest.mark.parametrize("lam", [0.3, 0.5 + 0.5j, 2.0])
def test_intertwining(lam):
    pair = clock_shift(M3)
    assert tr.check_intertwining(lam, 1.7, pair) < 1e-12
    # a wrong r-matrix breaks it
    assert tr.check_intertwining(lam, 1.7, pair, coeffs={0: 1.0, 1: 0.3, -1: 0.3}) > 1e-3


def test_derivative_norms_frozen():
    pair = clock_shift(M3)
    assert np.allclose(tr.derivative_norms(2, 1.0, pair, [2, 3]), [frozen.D2_NORM_KAPPA1[2], frozen.D2_NORM_KAPPA1[3]])
    assert max(tr.derivative_norms(1, 2.0, pair, [2, 3])) < 1e-12
    with pytest.raises(ValueError):
        tr.derivative_scaling_probe(1, 1.0, pair, [2, 3])
