"""Matrix product form of X(lambda): local-basis coefficients, reassembly and decay.

A basis string ``keys = (k_1, ..., k_r)`` with ``k_a = (i, j, k, l)`` stands for
``e_ij (x) e_kl`` on cell ``a`` (two physical sites), ``k_1`` on the leftmost
cell. Only strings of exact support ``r`` are stored, so ``k_1`` and ``k_r``
are both nonzero; every operator string then appears once per placement.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .auxiliary import PSI_S, aux_transfer, double_lax_family, singlet_eigenvalue
from .weyl import ChainGeometry, RootOfUnity, make_root

__all__ = [
    "ZERO_KEY",
    "MpsCoefficientTable",
    "singlet_projector_limit",
    "mps_coefficient",
    "coefficient_table",
    "string_operator",
    "shift",
    "assemble_truncated",
    "decay_profile",
    "decay_weights_from_table",
    "fit_decay_rate",
    "table_to_json",
    "table_from_json",
]

ZERO_KEY = (0, 0, 0, 0)


def _points(lam, root):
    qh = root.q_half
    return lam * qh, lam / qh


def singlet_projector_limit(lam: complex, kappa: complex, root: RootOfUnity, n: int) -> np.ndarray:
    """``(LL_0(lam q^1/2, lam q^-1/2) / Lambda_s(lam))**n``."""
    a1, a2 = _points(lam, root)
    l0 = double_lax_family(a1, a2, kappa, root)[ZERO_KEY]
    return np.linalg.matrix_power(l0 / singlet_eigenvalue(a1, a2, kappa), n)


class _Components:
    """Double Lax components and their slot derivatives at one spectral point."""

    def __init__(self, lam, kappa, root):
        a1, a2 = _points(lam, root)
        self.lam = complex(lam)
        self.plain = double_lax_family(a1, a2, kappa, root)
        # the mu-derivative of LL(lam q^1/2, mu q^-1/2) carries q^-1/2
        self.deriv = {k: v / root.q_half for k, v in double_lax_family(a1, a2, kappa, root, 0, 1).items()}
        self.norm = singlet_eigenvalue(a1, a2, kappa)
        self.m = root.m

    def get(self, key, deriv=False):
        table = self.deriv if deriv else self.plain
        key = tuple(x % self.m for x in key)
        return table.get(key)


def mps_coefficient(lam: complex, keys, kappa: complex, root: RootOfUnity) -> complex:
    """``<psi_s| LL^[k_r] ... LL^[k_2] dLL^[k_1] |psi_s> / Lambda_s^r``."""
    keys = [tuple(k) for k in keys]
    if not keys:
        raise ValueError("need at least one key")
    comp = _Components(lam, kappa, root)
    vec = PSI_S.astype(complex)
    mat = comp.get(keys[0], deriv=True)
    if mat is None:
        return 0j
    vec = mat @ vec
    for key in keys[1:]:
        mat = comp.get(key)
        if mat is None:
            return 0j
        vec = mat @ vec
    return complex(PSI_S @ vec / comp.norm ** len(keys))


@dataclass
class MpsCoefficientTable:
    """Coefficients of exact-support strings, keyed by the tuple of cell keys."""

    lam: complex
    kappa: complex
    root: RootOfUnity
    r_max: int
    entries: dict = field(default_factory=dict)

    def block(self, r: int) -> dict:
        return {k: v for k, v in self.entries.items() if len(k) == r}

    def weights(self) -> dict:
        out = {r: 0.0 for r in range(1, self.r_max + 1)}
        for keys, c in self.entries.items():
            out[len(keys)] += abs(c) ** 2
        return out


def coefficient_table(lam: complex, kappa: complex, root: RootOfUnity, r_max: int,
                      tol: float = 1e-14) -> MpsCoefficientTable:
    """All nonzero coefficients with support ``r <= r_max``.

    Strings are grown from the derivative cell leftwards, carrying the partial
    product applied to ``psi_s``; branches whose vector vanishes are dropped.
    """
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    comp = _Components(lam, kappa, root)
    psi = PSI_S.astype(complex)
    left = {k: psi @ v for k, v in comp.plain.items() if k != ZERO_KEY}
    left = {k: v for k, v in left.items() if np.linalg.norm(v) > tol}
    table = MpsCoefficientTable(complex(lam), complex(kappa), root, r_max)
    frontier = {}
    for key, mat in comp.deriv.items():
        if key == ZERO_KEY:
            continue
        v = mat @ psi
        if np.linalg.norm(v) > tol:
            frontier[(key,)] = v
    for keys, v in frontier.items():
        c = psi @ v / comp.norm
        if abs(c) > tol:
            table.entries[keys] = complex(c)
    # frontier holds strings of r - 1 cells; close each with a nonzero last key
    for r in range(2, r_max + 1):
        scale = comp.norm ** r
        for keys, v in frontier.items():
            for key, row in left.items():
                c = row @ v / scale
                if abs(c) > tol:
                    table.entries[keys + (key,)] = complex(c)
        if r == r_max:
            break
        grown = {}
        for keys, v in frontier.items():
            for key, mat in comp.plain.items():
                w = mat @ v
                if np.linalg.norm(w) > tol:
                    grown[keys + (key,)] = w
        frontier = grown
    return table


def _site_perm(keys_per_site, m, n_sites):
    """Columns and phases of the generalized permutation ``(x)_s u^i_s v^j_s``."""
    d = m ** n_sites
    rows = np.arange(d)
    cols = np.zeros(d, dtype=np.int64)
    expo = np.zeros(d, dtype=np.int64)
    for s in range(n_sites):
        digit = (rows // m ** (n_sites - 1 - s)) % m
        i, j = keys_per_site[s]
        b = (digit + i) % m
        cols = cols * m + b
        expo += j * b
    return cols, expo


def string_operator(keys, geom: ChainGeometry, root: RootOfUnity, start: int = 0) -> np.ndarray:
    """Dense basis string placed with ``k_1`` on cell ``start + 1`` (cells wrap around)."""
    cols, expo = _string_perm(keys, geom, root, start)
    d = geom.dim_total
    out = np.zeros((d, d), dtype=complex)
    out[np.arange(d), cols] = np.exp(1j * np.pi * root.ell * expo / root.m)
    return out


def _string_perm(keys, geom, root, start):
    n = geom.n_half
    if len(keys) > n:
        raise ValueError(f"string of {len(keys)} cells does not fit on {n} cells")
    per_site = [(0, 0)] * geom.n_sites
    for a, (i, j, k, l) in enumerate(keys):
        cell = (start + a) % n
        per_site[2 * cell] = (i, j)
        per_site[2 * cell + 1] = (k, l)
    return _site_perm(per_site, root.m, geom.n_sites)


def shift(op: np.ndarray, geom: ChainGeometry, steps: int = 1) -> np.ndarray:
    """Translate a chain operator by ``2 * steps`` physical sites to the right, periodically."""
    m, n = geom.m, geom.n_sites
    t = op.reshape((m,) * (2 * n))
    k = (2 * steps) % n
    # content of site s moves to site s + k: new axis a reads old axis a - k
    src = [(a - k) % n for a in range(n)]
    t = t.transpose(src + [n + s for s in src])
    return np.ascontiguousarray(t).reshape(op.shape)


def assemble_truncated(table: MpsCoefficientTable, geom: ChainGeometry, r_max: int | None = None,
                       r_min: int = 1) -> np.ndarray:
    """``sum_r sum_keys c(keys) sum_j S^j(e_keys)`` for ``r_min <= r <= r_max``."""
    r_max = table.r_max if r_max is None else r_max
    if r_max > geom.n_half:
        raise ValueError(f"r_max={r_max} exceeds the number of cells N={geom.n_half}")
    if r_max > table.r_max:
        raise ValueError(f"table only holds strings up to r={table.r_max}")
    d = geom.dim_total
    out = np.zeros((d, d), dtype=complex)
    rows = np.arange(d)
    phase_of = np.exp(1j * np.pi * table.root.ell * np.arange(2 * table.root.m) / table.root.m)
    # sorted order keeps the floating-point sum independent of how the table was built
    for keys, c in sorted(table.entries.items()):
        if not r_min <= len(keys) <= r_max:
            continue
        for j in range(geom.n_half):
            cols, expo = _string_perm(keys, geom, table.root, j)
            np.add.at(out, (rows, cols), c * phase_of[expo % (2 * table.root.m)])
    return out


def decay_profile(lam: complex, kappa: complex, root: RootOfUnity, r_max: int) -> list[tuple[int, float]]:
    """``[(r, sum over support-r strings of |c|^2)]`` from auxiliary transfer matrices.

    With ``Psi = psi_s (x) psi_s`` and ``D`` the doubly differentiated
    auxiliary matrix, the weight is ``Psi (TT - TT_0) TT^(r-2) D Psi / |Lambda|^2r``
    for ``r >= 2``; ``TT_0`` is the zero-key term.
    """
    a1, a2 = _points(lam, root)
    tt = aux_transfer(a1, a2, a1, a2, kappa, root)
    dd = aux_transfer(a1, a2, a1, a2, kappa, root, dx=1, dy=1)
    fam = double_lax_family(a1, a2, kappa, root)
    dfam = double_lax_family(a1, a2, kappa, root, 0, 1)
    tt0 = np.kron(fam[ZERO_KEY].conj(), fam[ZERO_KEY])
    dd0 = np.kron(dfam[ZERO_KEY].conj(), dfam[ZERO_KEY])
    big_psi = np.kron(PSI_S, PSI_S).astype(complex)
    lam2 = abs(singlet_eigenvalue(a1, a2, kappa)) ** 2
    out = [(1, float((big_psi @ (dd - dd0) @ big_psi).real / lam2))]
    # vec carries TT^(r-2) D Psi / |Lambda|^2(r-1), kept at order one
    vec = dd @ big_psi / lam2
    row = big_psi @ (tt - tt0) / lam2
    for r in range(2, r_max + 1):
        out.append((r, float((row @ vec).real)))
        vec = tt @ vec / lam2
    return out


def decay_weights_from_table(table: MpsCoefficientTable) -> list[tuple[int, float]]:
    w = table.weights()
    return sorted(w.items())


def fit_decay_rate(profile, r_from: int = 2) -> float:
    """Least-squares ``gamma`` in ``weight ~ C exp(-gamma r)``."""
    rs = np.array([r for r, w in profile if r >= r_from and w > 0], dtype=float)
    ws = np.array([w for r, w in profile if r >= r_from and w > 0])
    if len(rs) < 2:
        raise ValueError("need at least two positive weights to fit")
    slope, _ = np.polyfit(rs, np.log(ws), 1)
    return float(-slope)


def table_to_json(table: MpsCoefficientTable, extra: dict | None = None) -> str:
    """Serialize with keys as integer tuples and coefficients as ``[re, im]``."""
    entries = [
        {"keys": [list(k) for k in keys], "c": [c.real, c.imag]}
        for keys, c in sorted(table.entries.items())
    ]
    doc = {
        "schema_version": 1,
        "lambda": [table.lam.real, table.lam.imag],
        "kappa": [table.kappa.real, table.kappa.imag],
        "ell": table.root.ell,
        "m": table.root.m,
        "r_max": table.r_max,
        "entries": entries,
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1)


def table_from_json(text: str) -> MpsCoefficientTable:
    doc = json.loads(text)
    table = MpsCoefficientTable(complex(*doc["lambda"]), complex(*doc["kappa"]),
                                make_root(doc["ell"], doc["m"]), int(doc["r_max"]))
    for e in doc["entries"]:
        table.entries[tuple(tuple(k) for k in e["keys"])] = complex(*e["c"])
    return table
