from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.config import settings
from ..core.errors import InvalidArgumentError
from .statevector import StateVector


def complement(bits: str) -> str:
    """Bitwise negation of a bit string"""
    return bits.translate(str.maketrans("01", "10"))


def make_ghz(bits: str) -> StateVector:
    """(|0 bits> + |1 ~bits>)/sqrt(2) on len(bits)+1 qubits"""
    if not bits:
        raise InvalidArgumentError("GHZ carrier needs at least one data bit")
    if set(bits) - {"0", "1"}:
        raise InvalidArgumentError(f"Invalid bit string: {bits!r}")
    amplitudes = np.zeros(2 ** (len(bits) + 1), dtype=complex)
    amplitudes[int("0" + bits, 2)] = 1 / np.sqrt(2)
    amplitudes[int("1" + complement(bits), 2)] = 1 / np.sqrt(2)
    return StateVector(amplitudes)


def canonical_ghz(k: int, sign: str, m: int) -> StateVector:
    """(|B(k)> +/- |B(2^m - k - 1)>)/sqrt(2)"""
    if m < 2:
        raise InvalidArgumentError(f"Canonical GHZ states need m >= 2, got {m}")
    if not 0 <= k <= 2 ** (m - 1) - 1:
        raise InvalidArgumentError(f"k={k} out of range [0, {2 ** (m - 1) - 1}]")
    if sign not in ("+", "-"):
        raise InvalidArgumentError(f"Sign must be '+' or '-', got {sign!r}")

    amplitudes = np.zeros(2**m, dtype=complex)
    amplitudes[k] = 1 / np.sqrt(2)
    amplitudes[2**m - k - 1] = (1 if sign == "+" else -1) / np.sqrt(2)
    return StateVector(amplitudes)


def canonical_ghz_family(m: int) -> List[Tuple[int, str, StateVector]]:
    """All 2^m canonical GHZ states as (k, sign, state)"""
    return [
        (k, sign, canonical_ghz(k, sign, m))
        for k in range(2 ** (m - 1))
        for sign in ("+", "-")
    ]


def gram_matrix(states: Sequence[StateVector]) -> np.ndarray:
    basis = np.array([state.amplitudes for state in states])
    return basis.conj() @ basis.T


def _bipartition(state: StateVector, subsystem: Sequence[int]) -> np.ndarray:
    subsystem = list(subsystem)
    if not subsystem or len(set(subsystem)) != len(subsystem):
        raise InvalidArgumentError("Subsystem must be a non-empty set of qubits")
    if any(not 0 <= q < state.qubit_count for q in subsystem):
        raise InvalidArgumentError(f"Subsystem {subsystem} out of range")
    rest = [q for q in range(state.qubit_count) if q not in subsystem]
    if not rest:
        raise InvalidArgumentError("Subsystem must leave a non-empty complement")
    ordered = state.as_tensor().transpose(subsystem + rest)
    return ordered.reshape(2 ** len(subsystem), 2 ** len(rest))


def schmidt_coefficients(state: StateVector, subsystem: Sequence[int]) -> np.ndarray:
    """Schmidt coefficients of the cut (subsystem | rest), descending"""
    return np.linalg.svd(_bipartition(state, subsystem), compute_uv=False)


def is_product_state(
    state: StateVector, subsystem: Sequence[int], tol: Optional[float] = None
) -> bool:
    tol = settings.constraint_tolerance if tol is None else tol
    coefficients = schmidt_coefficients(state, subsystem)
    return float(np.sqrt(np.sum(coefficients[1:] ** 2))) <= tol


def factor_product_state(
    state: StateVector, subsystem: Sequence[int], tol: Optional[float] = None
) -> Tuple[StateVector, StateVector]:
    """Split a product state into (subsystem factor, rest factor); phases are arbitrary"""
    tol = settings.constraint_tolerance if tol is None else tol
    u, s, vh = np.linalg.svd(_bipartition(state, subsystem))
    residual = float(np.sqrt(np.sum(s[1:] ** 2)))
    if residual > tol:
        raise InvalidArgumentError(
            f"State is entangled across the cut (residual {residual:.3e})"
        )
    return StateVector(u[:, 0]), StateVector(s[0] * vh[0])
