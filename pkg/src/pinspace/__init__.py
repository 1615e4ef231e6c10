"""Pinned natural occupation numbers, generalized Pauli constraints and
pinning-based active spaces for few-fermion states."""

from pinspace.constraints import (
    ConstraintCatalog,
    FaceSpec,
    LinearConstraint,
    builtin_catalog,
    evaluate,
    l1_distance,
    named_face,
    particle_hole_dual,
    pauli_constraint,
    vertex_value,
)
from pinspace.fock import Setting, Wavefunction, apply_orbital_rotation, build_basis
from pinspace.hamiltonian import ManyBodyOperator, build_matrix, ground_state, hubbard_cluster
from pinspace.mcscf import build_ansatz, minimize
from pinspace.pinning import (
    analyze,
    bd_degenerate_rotation,
    find_consistent_permutation,
    selection_rule_configs,
    verify_pinning_structure,
)
from pinspace.rdm import natural_basis, one_rdm, to_natural_expansion

__version__ = "0.1.0"

__all__ = [
    "ConstraintCatalog", "FaceSpec", "LinearConstraint", "ManyBodyOperator", "Setting", "Wavefunction",
    "analyze", "apply_orbital_rotation", "bd_degenerate_rotation", "build_ansatz", "build_basis",
    "build_matrix", "builtin_catalog", "evaluate", "find_consistent_permutation", "ground_state",
    "hubbard_cluster", "l1_distance", "minimize", "named_face", "natural_basis", "one_rdm",
    "particle_hole_dual", "pauli_constraint", "selection_rule_configs", "to_natural_expansion",
    "verify_pinning_structure", "vertex_value",
]
