"""Many-party correlation of classical and quantum states via hierarchical Gibbs models."""

from .algebra import (
    CLASSICAL,
    QUANTUM,
    HermitianObservable,
    ShapeError,
    State,
    SystemShape,
    gibbs_map,
    hermitize_basis,
    marginal,
    matrix_fourier_basis,
    relative_entropy,
    tensor,
    von_neumann_entropy,
)
from .factorization import (
    GuardExceeded,
    build_interaction_matrix,
    check_toric_membership,
    enumerate_feasibility,
    integer_kernel,
    is_k_feasible,
    monomial_map,
    toric_kernel,
)
from .hierarchy import (
    HierarchicalModel,
    Hypergraph,
    HypergraphError,
    build_model,
    covering_hypergraphs,
    full_model,
    hypergraph_k,
    independence_hypergraph,
    model_dim,
    numerical_basis_rank,
    validate_hypergraph,
)
from .maxent import (
    ConvergenceError,
    GibbsParameters,
    ProjectionResult,
    chain_step_divergence,
    correlation_decomposition,
    divergence_from_model,
    irreducible_correlation,
    k_party_correlation,
    maxent_project,
    multi_information,
    pythagorean_residual,
)
from .maximizers import (
    SearchReport,
    check_exponential_form,
    search_local_maximizers,
    support_bound,
)
from .states import (
    basis_state,
    bell_state,
    ghz_state,
    maximally_mixed,
    random_density,
    random_pure,
    uniform_on,
)
from .twoqubit import (
    BellDiagonal,
    bell_from_lambda,
    bell_from_t,
    is_classically_correlated_bd,
    is_separable,
    mutual_information_bd,
    separable_extreme_points,
    verify_mutual_information_bound,
)

__all__ = [
    "CLASSICAL",
    "QUANTUM",
    "BellDiagonal",
    "ConvergenceError",
    "GibbsParameters",
    "GuardExceeded",
    "HermitianObservable",
    "HierarchicalModel",
    "Hypergraph",
    "HypergraphError",
    "ProjectionResult",
    "SearchReport",
    "ShapeError",
    "State",
    "SystemShape",
    "basis_state",
    "bell_from_lambda",
    "bell_from_t",
    "bell_state",
    "build_interaction_matrix",
    "build_model",
    "chain_step_divergence",
    "check_exponential_form",
    "check_toric_membership",
    "correlation_decomposition",
    "covering_hypergraphs",
    "divergence_from_model",
    "enumerate_feasibility",
    "full_model",
    "ghz_state",
    "gibbs_map",
    "hermitize_basis",
    "hypergraph_k",
    "independence_hypergraph",
    "integer_kernel",
    "irreducible_correlation",
    "is_classically_correlated_bd",
    "is_k_feasible",
    "is_separable",
    "k_party_correlation",
    "marginal",
    "matrix_fourier_basis",
    "maxent_project",
    "maximally_mixed",
    "model_dim",
    "monomial_map",
    "multi_information",
    "mutual_information_bd",
    "numerical_basis_rank",
    "pythagorean_residual",
    "random_density",
    "random_pure",
    "relative_entropy",
    "search_local_maximizers",
    "separable_extreme_points",
    "support_bound",
    "tensor",
    "toric_kernel",
    "uniform_on",
    "validate_hypergraph",
    "verify_mutual_information_bound",
    "von_neumann_entropy",
]

__version__ = "0.1.0"
