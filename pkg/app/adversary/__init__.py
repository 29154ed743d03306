from .attacks import (
    AttackModel,
    EveRecord,
    InterceptedParticle,
    entangle_measure,
    estimate_groups,
    eve_information,
    exact_decoy_error,
    intercept_resend,
    measurement_resend,
    reveal_after_announcement,
)
from .constraints import (
    ancilla_components,
    ancilla_distinguishability,
    check_constraints,
    load_unitary,
    random_constraint_satisfying_unitary,
    random_unitary,
)
