from .entanglement import (
    canonical_ghz,
    canonical_ghz_family,
    complement,
    factor_product_state,
    gram_matrix,
    is_product_state,
    make_ghz,
    schmidt_coefficients,
)
from .statevector import (
    Basis,
    DecoyKind,
    SingleQubitOutcome,
    StateVector,
    TwoQubitUnitary,
    append_qubit,
    apply_two_qubit_unitary,
    basis_state,
    inner_product,
    measure_all_z,
    measure_qubit,
    outcome_probabilities,
    prepare_decoy,
    project_qubit,
    tensor,
)
