"""Positive maps on matrix algebras and bipartite entanglement analyses.

The package revolves around one correspondence: a linear map between
matrix algebras, its Choi matrix, and the linear functional that matrix
implements on the tensor product. Classification of maps (completely
positive, copositive, block positive, entanglement breaking) mirrors
classification of states (PPT, witness-detected, separable), and the
interesting objects live in the gap between the two sides.
"""

from .blocks import (
    BlockComponent,
    BlockDecomposition,
    ExpectationReport,
    NotAbelian,
    SeparableEnsemble,
    abelian_range_decompose,
    conditional_expectation_verdict,
    decompose_separable,
    hermitian_basis,
    is_definite_element,
    split_by_projection,
)
from .classify import (
    Budget,
    BlockMinimum,
    MapClassReport,
    WitnessLibrary,
    block_positivity_minimize,
    builtin_choi_map,
    builtin_map,
    classify_map,
    default_witness_library,
    is_cp,
    is_copositive,
)
from .duality import (
    BipartiteState,
    HolevoForm,
    MatrixMap,
    apply_map,
    apply_to_second,
    choi_from_action,
    compose,
    holevo_to_map,
    identity_map,
    kraus_to_map,
    map_adjoint,
    map_from_state,
    map_transpose_conjugate,
    maximally_entangled,
    maximally_entangled_matrix,
    pairing_value,
    post_transpose,
    pre_transpose,
    state_from_map,
    transpose_map,
)
from .errors import (
    DimensionError,
    DomainError,
    EntangleConeError,
    NumericalError,
    ParseError,
    SearchError,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    hermitian_eigen,
    is_psd,
    kron,
    partial_trace,
    partial_transpose,
    support_projection,
)
from .states import (
    SEARCH_BUDGET,
    SearchResult,
    StateReport,
    WitnessHit,
    peres_equivalence,
    ppt_check,
    search_ppt_entangled,
    witness_battery,
    witness_pairing,
)

__version__ = "0.1.0"

__all__ = [
    "BipartiteState",
    "BlockComponent",
    "BlockDecomposition",
    "BlockMinimum",
    "Budget",
    "DEFAULT_TOL",
    "DimensionError",
    "DomainError",
    "EntangleConeError",
    "ExpectationReport",
    "HolevoForm",
    "MapClassReport",
    "MatrixMap",
    "NotAbelian",
    "NumericalError",
    "ParseError",
    "SEARCH_BUDGET",
    "SearchError",
    "SearchResult",
    "SeparableEnsemble",
    "StateReport",
    "Tolerances",
    "WitnessHit",
    "WitnessLibrary",
    "abelian_range_decompose",
    "apply_map",
    "apply_to_second",
    "block_positivity_minimize",
    "builtin_choi_map",
    "builtin_map",
    "choi_from_action",
    "classify_map",
    "compose",
    "conditional_expectation_verdict",
    "decompose_separable",
    "default_witness_library",
    "hermitian_basis",
    "hermitian_eigen",
    "holevo_to_map",
    "identity_map",
    "is_copositive",
    "is_cp",
    "is_definite_element",
    "is_psd",
    "kraus_to_map",
    "kron",
    "map_adjoint",
    "map_from_state",
    "map_transpose_conjugate",
    "maximally_entangled",
    "maximally_entangled_matrix",
    "pairing_value",
    "partial_trace",
    "partial_transpose",
    "peres_equivalence",
    "post_transpose",
    "ppt_check",
    "pre_transpose",
    "search_ppt_entangled",
    "split_by_projection",
    "state_from_map",
    "support_projection",
    "transpose_map",
    "witness_battery",
    "witness_pairing",
]
