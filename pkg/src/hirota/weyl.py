"""Weyl pairs at odd roots of unity, site embeddings and the HS inner product.

Operators on the chain are plain dense ``numpy`` arrays. Site ``j`` runs from
1 to ``2N`` and site 1 is the leftmost Kronecker factor.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "RootOfUnity",
    "WeylPair",
    "ChainGeometry",
    "make_root",
    "clock_shift",
    "embed",
    "basis_element",
    "local_gram",
    "hs_inner",
    "hs_norm2",
    "identity_component",
    "parity_map",
]


@dataclass(frozen=True)
class Tolerances:
    """Absolute tolerances for identities at local and at full-chain size."""

    local: float = 1e-12
    chain: float = 1e-9


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class RootOfUnity:
    """``q = exp(i pi ell / m)`` with ``m`` odd and ``ell`` even, ``0 < ell < m``."""

    ell: int
    m: int

    def __post_init__(self):
        if self.m % 2 == 0:
            raise ValueError(f"m must be odd, got m={self.m}")
        if self.ell % 2 != 0:
            raise ValueError(f"ell must be even, got ell={self.ell}")
        if self.ell <= 0:
            raise ValueError(f"ell must be positive, got ell={self.ell}")
        if self.ell >= self.m:
            raise ValueError(f"ell must be smaller than m, got ell={self.ell}, m={self.m}")

    @property
    def q(self) -> complex:
        return complex(np.exp(1j * np.pi * self.ell / self.m))

    @property
    def q_half(self) -> complex:
        # principal branch, fixed by construction rather than by a numerical sqrt
        return complex(np.exp(0.5j * np.pi * self.ell / self.m))

    @property
    def eta(self) -> int:
        return min(self.ell, self.m - self.ell)

    def power(self, k: int) -> complex:
        """``q**k`` with the exponent reduced mod ``2m`` for exactness."""
        return complex(np.exp(1j * np.pi * self.ell * (k % (2 * self.m)) / self.m))

    def __str__(self):
        return f"q=exp(i*{self.ell}pi/{self.m})"


def make_root(ell: int, m: int) -> RootOfUnity:
    """Validate ``(ell, m)`` and return the corresponding root of unity."""
    return RootOfUnity(int(ell), int(m))


@dataclass(frozen=True, eq=False)
class WeylPair:
    """Unitary ``u`` (shift) and ``v`` (clock) with ``u v = q v u``."""

    u: np.ndarray
    v: np.ndarray
    root: RootOfUnity

    @property
    def m(self) -> int:
        return self.root.m

    @functools.cached_property
    def u_inv(self) -> np.ndarray:
        return self.u.conj().T

    @functools.cached_property
    def v_inv(self) -> np.ndarray:
        return self.v.conj().T


@functools.lru_cache(maxsize=32)
def clock_shift(root: RootOfUnity) -> WeylPair:
    """Shift and clock matrices of dimension ``m``.

    ``u`` has ones on the first superdiagonal and in the bottom-left corner,
    ``v = diag(1, q, ..., q**(m-1))``.
    """
    m = root.m
    u = np.roll(np.eye(m, dtype=complex), 1, axis=1)
    v = np.diag([root.power(k) for k in range(m)]).astype(complex)
    u.setflags(write=False)
    v.setflags(write=False)
    return WeylPair(u, v, root)


@dataclass(frozen=True)
class ChainGeometry:
    """Periodic chain of ``2N`` sites with local dimension ``m``."""

    n_half: int
    m: int

    def __post_init__(self):
        if self.n_half < 1:
            raise ValueError(f"n_half must be positive, got {self.n_half}")

    @property
    def n_sites(self) -> int:
        return 2 * self.n_half

    @property
    def dim_total(self) -> int:
        return self.m ** self.n_sites

    def matrix_bytes(self) -> int:
        """Bytes needed for one dense complex operator on the chain."""
        return 16 * self.dim_total ** 2

    def check_memory(self, cap_bytes: int | None):
        if cap_bytes is not None and self.matrix_bytes() > cap_bytes:
            raise MemoryError(
                f"dense operator on {self.n_sites} sites of dimension {self.m} needs "
                f"{self.matrix_bytes()} bytes, above the cap of {cap_bytes}"
            )


def embed(site: int, op: np.ndarray, geom: ChainGeometry) -> np.ndarray:
    """Place the local operator ``op`` on ``site`` (1-based) of the chain."""
    if not 1 <= site <= geom.n_sites:
        raise IndexError(f"site {site} outside 1..{geom.n_sites}")
    left = np.eye(geom.m ** (site - 1))
    right = np.eye(geom.m ** (geom.n_sites - site))
    return np.kron(np.kron(left, op), right)


def basis_element(i: int, j: int, pair: WeylPair) -> np.ndarray:
    """Operator basis element ``u**i v**j`` with indices taken mod ``m``."""
    m = pair.m
    i, j = i % m, j % m
    return np.linalg.matrix_power(pair.u, i) @ np.linalg.matrix_power(pair.v, j)


def local_gram(pair: WeylPair) -> np.ndarray:
    """Gram matrix ``tr(e_a^dag e_b) / m`` over all ``m**2`` basis elements."""
    m = pair.m
    basis = np.array([basis_element(i, j, pair) for i in range(m) for j in range(m)])
    flat = basis.reshape(m * m, -1)
    return flat.conj() @ flat.T / m


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Normalized trace product with the identity component removed.

    ``<A, B> = tr(A^dag B)/tr 1 - (tr A^dag / tr 1)(tr B / tr 1)``
    """
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator shapes differ or are not square: {a.shape} vs {b.shape}")
    d = a.shape[0]
    return complex(np.vdot(a, b) / d - np.conj(np.trace(a)) * np.trace(b) / d**2)


def hs_norm2(a: np.ndarray) -> float:
    """Squared HS seminorm, ``hs_inner(a, a)``."""
    return hs_inner(a, a).real


def identity_component(a: np.ndarray) -> complex:
    return complex(np.trace(a) / a.shape[0])


def parity_map(op: np.ndarray, geom: ChainGeometry, pair: WeylPair) -> np.ndarray:
    """Apply ``u -> u^-1, v -> v^-1`` on every site.

    In the clock/shift representation this is conjugation by the reflection
    ``|k> -> |-k mod m>`` on each site.
    """
    m = pair.m
    t = op.reshape((m,) * (2 * geom.n_sites))
    idx = (-np.arange(m)) % m
    for ax in range(2 * geom.n_sites):
        t = np.take(t, idx, axis=ax)
    return t.reshape(op.shape)
