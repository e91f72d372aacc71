"""Witnesses and quantitative bounds for non-decomposable mediated dynamics."""

__version__ = "0.1.0"

from .tensor import (
    SystemLayout, QState, QOp, tripartite, pure_state, basis_ket,
    embed, partial_trace, partial_transpose, expm_hamiltonian,
    norms, trace_distance, vn_entropy,
)
from .correlations import (
    ContinuityFn, MeasureSpec, negativity, log_negativity,
    mutual_information, rel_ent_entanglement, total_correlations,
    capacity, g_eval, g_inv, default_measure,
)
from .dynamics import (
    KrausMap, DecomposableSpec, DilationSpec, evolve, apply_map,
    marginal_of_dilation, trotter_unitary, commutator_norm,
    trotter_error, min_steps, trotter_steps_bound,
    classicality_check, dephasing_invariance,
)
from .witness import (
    WitnessReport, witness_accessible, witness_inaccessible,
    excluded_mediator_dim, falsify_decomposition, swap_dilation_test,
    strict_inclusion_demo, sandwich_check,
)

__all__ = [
    "SystemLayout", "QState", "QOp", "tripartite", "pure_state", "basis_ket",
    "embed", "partial_trace", "partial_transpose", "expm_hamiltonian",
    "norms", "trace_distance", "vn_entropy",
    "ContinuityFn", "MeasureSpec", "negativity", "log_negativity",
    "mutual_information", "rel_ent_entanglement", "total_correlations",
    "capacity", "g_eval", "g_inv", "default_measure",
    "KrausMap", "DecomposableSpec", "DilationSpec", "evolve", "apply_map",
    "marginal_of_dilation", "trotter_unitary", "commutator_norm",
    "trotter_error", "min_steps", "trotter_steps_bound",
    "classicality_check", "dephasing_invariance",
    "WitnessReport", "witness_accessible", "witness_inaccessible",
    "excluded_mediator_dim", "falsify_decomposition", "swap_dilation_test",
    "strict_inclusion_demo", "sandwich_check",
]
