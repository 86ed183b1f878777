import cmath
import json

import numpy as np
import pytest

from hirota import mps
from hirota import quasilocality as ql
from hirota.auxiliary import PSI_S, double_lax_keys
from hirota.weyl import ChainGeometry, clock_shift, hs_inner, hs_norm2, make_root, parity_map
from oracles import hs

import frozen

M3 = make_root(2, 3)
SINGLET = np.outer(PSI_S, PSI_S)


@pytest.fixture(scope="module")
def table3():
    return mps.coefficient_table(0.5, 1.0, M3, 3)


def test_projector_limit():
    assert np.linalg.norm(mps.singlet_projector_limit(0.5, 2.0, M3, 64) - SINGLET) < 1e-10
    # outside the singlet-dominant domain the powers do not settle
    assert np.linalg.norm(mps.singlet_projector_limit(cmath.exp(1j * np.pi / 3), 2.0, M3, 64) - SINGLET) > 1


@pytest.mark.parametrize("n", [1, 5, 17])
def test_singlet_is_fixed_vector(n):
    p = mps.singlet_projector_limit(0.3 + 0.2j, 1.7, M3, n)
    assert np.allclose(p @ PSI_S, PSI_S)


def test_zero_key_coefficient_nonzero():
    assert abs(mps.mps_coefficient(0.5, [mps.ZERO_KEY] * 2, 1.0, M3)) > 0.1
    with pytest.raises(ValueError):
        mps.mps_coefficient(0.5, [], 1.0, M3)


def test_unreachable_key_vanishes():
    assert mps.mps_coefficient(0.5, [(1, 0, 0, 0), (1, 1, 1, 2)], 1.0, M3) == 0


def test_one_cell_coefficients(table3):
    # two nonzero one-cell strings, the local w and w^-1 directions
    r1 = table3.block(1)
    assert set(r1) == {((1, 1, 1, 2),), ((2, 2, 2, 1),)}
    for c in r1.values():
        assert abs(c - frozen.MPS_R1_COEFF) < 1e-12


@pytest.mark.parametrize("n_half", [2, 3])
def test_one_cell_projection_of_charge(n_half):
    geom = ChainGeometry(n_half, 3)
    x = ql.build_charge(0.5, 1.0, M3, geom)
    e = mps.string_operator([(1, 1, 1, 2)], geom, M3)
    proj = hs(e, x)
    assert abs(proj - frozen.MPS_R1_PROJECTION[n_half]) < 1e-9
    # the finite-chain projection approaches the one-cell coefficient
    gap = {n: abs(v - frozen.MPS_R1_COEFF) for n, v in frozen.MPS_R1_PROJECTION.items()}
    assert gap[3] < gap[2]


def test_keys_reachable(table3):
    allowed = set(double_lax_keys(3))
    for keys in table3.entries:
        assert all(k in allowed for k in keys)
        assert keys[0] != mps.ZERO_KEY and keys[-1] != mps.ZERO_KEY


def test_weights_match_transfer_formula(table3):
    from_table = dict(mps.decay_weights_from_table(table3))
    for r, w in mps.decay_profile(0.5, 1.0, M3, 3):
        assert abs(from_table[r] - w) < 1e-12
    assert abs(from_table[1] - frozen.MPS_WEIGHTS_05[1]) < 1e-12
    assert abs(from_table[2] - frozen.MPS_WEIGHTS_05[2]) < 1e-12


def test_weights_sum_to_kernel():
    prof = mps.decay_profile(0.5, 1.0, M3, 4000)
    assert all(w >= 0 for _, w in prof)
    assert abs(sum(w for _, w in prof) - ql.hs_kernel(0.5, 0.5, 1.0, M3.q).real) < 1e-9


def test_decay_monotone_and_slower_near_edge():
    prof = mps.decay_profile(0.5, 1.0, M3, 6)
    ws = [w for r, w in prof if r >= 2]
    assert all(a > b for a, b in zip(ws, ws[1:]))
    inner = mps.fit_decay_rate(mps.decay_profile(0.5, 1.0, M3, 30), r_from=5)
    edge = mps.fit_decay_rate(mps.decay_profile(0.5 * cmath.exp(0.45j), 1.0, M3, 30), r_from=5)
    assert 0 < edge < inner
    with pytest.raises(ValueError):
        mps.fit_decay_rate([(1, 1.0), (2, 0.5)])


def test_shift_periodic():
    geom = ChainGeometry(3, 3)
    rng = np.random.default_rng(3)
    op = rng.normal(size=(729, 729))
    assert np.array_equal(mps.shift(op, geom, 3), op)
    e1 = mps.string_operator([(1, 1, 1, 2)], geom, M3, 0)
    e2 = mps.string_operator([(1, 1, 1, 2)], geom, M3, 1)
    assert np.allclose(mps.shift(e1, geom, 1), e2)


def test_string_too_long():
    with pytest.raises(ValueError):
        mps.string_operator([(1, 1, 1, 2)] * 3, ChainGeometry(2, 3), M3)


def test_assembled_symmetries(table3):
    geom = ChainGeometry(3, 3)
    a = mps.assemble_truncated(table3, geom)
    assert np.allclose(mps.shift(a, geom, 1), a)
    assert np.allclose(parity_map(a, geom, clock_shift(M3)), a)
    with pytest.raises(ValueError):
        mps.assemble_truncated(table3, ChainGeometry(2, 3))


def test_assembled_vs_charge(table3):
    devs, cos = {}, {}
    for n in (2, 3):
        geom = ChainGeometry(n, 3)
        x = ql.build_charge(0.5, 1.0, M3, geom)
        x -= np.trace(x) / x.shape[0] * np.eye(x.shape[0])
        a = mps.assemble_truncated(table3, geom, r_max=n)
        devs[n] = np.linalg.norm(a - x) / np.linalg.norm(x)
        cos[n] = hs_inner(a, x) / np.sqrt(hs_norm2(a) * hs_norm2(x))
    assert devs[3] < devs[2]
    # same phase convention on both sides: the HS cosine is near the positive real axis
    assert cos[3].real > cos[2].real > 0.7


def test_json_round_trip(table3):
    text = mps.table_to_json(table3, {"note": "x"})
    doc = json.loads(text)
    assert doc["schema_version"] == 1 and doc["note"] == "x"
    back = mps.table_from_json(text)
    assert back.entries == table3.entries
    geom = ChainGeometry(3, 3)
    assert np.array_equal(mps.assemble_truncated(back, geom), mps.assemble_truncated(table3, geom))


def test_table_rejects_bad_rmax():
    with pytest.raises(ValueError):
        mps.coefficient_table(0.5, 1.0, M3, 0)
