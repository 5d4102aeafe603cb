"""
Distributed projection-consensus for ``Ax = b`` over time-varying directed
graphs, with the kernel-dependent connectivity theory that decides when it
converges exponentially fast.
"""

from .analysis import (ContractionCertificate, RateBound, StabilityReport,
                       UnitEigenvalueWitness, contraction_certificate,
                       corollary_lambda, p_convergable_check,
                       rate_bound_corollary, rate_bound_strong_sequences,
                       stability_report, stability_scc, stability_spectral,
                       unit_eigenvalue_witness)
from .connectivity import (PopulationOracle, SubsetClass,
                           check_strong_equivalence, classify_subset,
                           is_d_connected, is_d_connected_bruteforce,
                           is_jointly, is_jointly_d_connected,
                           is_jointly_rooted, is_jointly_strongly_connected,
                           is_repeatedly_jointly, search_witness)
from .digraph import (DiGraph, ExplicitSequence, PeriodicSequence,
                      RandomSequence, compose, compose_sequence, find_route,
                      flocking_matrix, graph_of_matrix, is_rooted,
                      is_strongly_connected, is_strongly_sunk_at,
                      neighbor_set, scc_decomposition, sunk_vertex_set)
from .errors import (CapacityError, InconsistentEquationError,
                     InvalidInputError, NotApplicableError,
                     ScenarioParseError)
from .linalg import (Subspace, induced_two_norm, intersect, kernel_basis,
                     mixed_matrix_norm, projector_onto, spectral_radius,
                     subspace_equal)
from .solver import (AgentData, Problem, SimulationTrace, StackedOperator,
                     build_stacked, consensus_subsystem_step, init_states,
                     quotient_decompose, simulate, step, to_least_squares)

__version__ = "0.1.0"

__all__ = [
    "AgentData",
    "CapacityError",
    "ContractionCertificate",
    "DiGraph",
    "ExplicitSequence",
    "InconsistentEquationError",
    "InvalidInputError",
    "NotApplicableError",
    "PeriodicSequence",
    "PopulationOracle",
    "Problem",
    "RandomSequence",
    "RateBound",
    "ScenarioParseError",
    "SimulationTrace",
    "StabilityReport",
    "StackedOperator",
    "SubsetClass",
    "Subspace",
    "UnitEigenvalueWitness",
    "build_stacked",
    "check_strong_equivalence",
    "classify_subset",
    "compose",
    "compose_sequence",
    "consensus_subsystem_step",
    "contraction_certificate",
    "corollary_lambda",
    "find_route",
    "flocking_matrix",
    "graph_of_matrix",
    "induced_two_norm",
    "init_states",
    "intersect",
    "is_d_connected",
    "is_d_connected_bruteforce",
    "is_jointly",
    "is_jointly_d_connected",
    "is_jointly_rooted",
    "is_jointly_strongly_connected",
    "is_repeatedly_jointly",
    "is_rooted",
    "is_strongly_connected",
    "is_strongly_sunk_at",
    "kernel_basis",
    "mixed_matrix_norm",
    "neighbor_set",
    "p_convergable_check",
    "projector_onto",
    "quotient_decompose",
    "rate_bound_corollary",
    "rate_bound_strong_sequences",
    "scc_decomposition",
    "search_witness",
    "simulate",
    "spectral_radius",
    "stability_report",
    "stability_scc",
    "stability_spectral",
    "step",
    "subspace_equal",
    "sunk_vertex_set",
    "to_least_squares",
    "unit_eigenvalue_witness",
]
