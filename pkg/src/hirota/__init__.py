"""Quasilocal conserved charges of the quantum Hirota model at roots of unity.

Dense numerics on small periodic chains: Weyl pairs, the Floquet propagator,
the staggered transfer matrix, the 16 x 16 auxiliary transfer matrix, the
Hilbert-Schmidt kernel of the charges and their matrix product form.
"""
from .weyl import (
    DEFAULT_TOL,
    ChainGeometry,
    RootOfUnity,
    Tolerances,
    WeylPair,
    clock_shift,
    embed,
    hs_inner,
    hs_norm2,
    make_root,
    parity_map,
)
from .dynamics import build_propagator, evolve, r_matrix, step_closed_form, step_conjugate
from .transfer import transfer_derivative, trivial_charges
from .auxiliary import aux_transfer, aux_transfer_factorized, double_lax, reduce, tau_closed_forms
from .quasilocality import (
    WedgeDomain,
    build_charge,
    extensivity_study,
    finite_chain_overlap,
    hs_kernel,
    hs_kernel_from_aux,
    wedge_predicate,
    wedge_scan,
)
from .mps import assemble_truncated, coefficient_table, decay_profile, mps_coefficient

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "ChainGeometry",
    "RootOfUnity",
    "Tolerances",
    "WeylPair",
    "clock_shift",
    "embed",
    "hs_inner",
    "hs_norm2",
    "make_root",
    "parity_map",
    "build_propagator",
    "evolve",
    "r_matrix",
    "step_closed_form",
    "step_conjugate",
    "transfer_derivative",
    "trivial_charges",
    "aux_transfer",
    "aux_transfer_factorized",
    "double_lax",
    "reduce",
    "tau_closed_forms",
    "WedgeDomain",
    "build_charge",
    "extensivity_study",
    "finite_chain_overlap",
    "hs_kernel",
    "hs_kernel_from_aux",
    "wedge_predicate",
    "wedge_scan",
    "assemble_truncated",
    "coefficient_table",
    "decay_profile",
    "mps_coefficient",
]
