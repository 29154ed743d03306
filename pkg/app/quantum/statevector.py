"""Dense statevector engine.

Qubit 0 is the most significant bit of the basis index, so the ket |0 a1 a2 ... an>
has index int("0a1a2...an", 2). Measurements keep the measured qubit in the state
(collapsed), which keeps qubit positions stable inside a joint system.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from ..core.config import settings
from ..core.errors import InvalidArgumentError


_SQRT2_INV = 1 / np.sqrt(2)

# Rows are the measurement bras <b_0|, <b_1| of each basis
_MEASUREMENT_BRAS = {
    "Z": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
}


class Basis(str, Enum):
    Z = "Z"
    X = "X"

    @property
    def other(self) -> "Basis":
        return Basis.X if self is Basis.Z else Basis.Z


class DecoyKind(str, Enum):
    ZERO = "zero"
    ONE = "one"
    PLUS = "plus"
    MINUS = "minus"

    @property
    def basis(self) -> Basis:
        return Basis.Z if self in (DecoyKind.ZERO, DecoyKind.ONE) else Basis.X

    @property
    def bit(self) -> int:
        return 0 if self in (DecoyKind.ZERO, DecoyKind.PLUS) else 1

    @classmethod
    def from_basis_bit(cls, basis: Basis, bit: int) -> "DecoyKind":
        if Basis(basis) is Basis.Z:
            return cls.ZERO if bit == 0 else cls.ONE
        return cls.PLUS if bit == 0 else cls.MINUS


class StateVector:
    """Immutable normalized pure state over m qubits"""

    __slots__ = ("_amplitudes", "_qubit_count")

    def __init__(self, amplitudes):
        amplitudes = np.array(amplitudes, dtype=complex).reshape(-1)
        size = amplitudes.size
        if size < 2 or size & (size - 1):
            raise InvalidArgumentError(
                f"Amplitude count must be a power of two >= 2, got {size}"
            )
        qubit_count = size.bit_length() - 1
        if qubit_count > settings.max_qubits:
            raise InvalidArgumentError(
                f"{qubit_count} qubits exceeds the cap of {settings.max_qubits}"
            )

        norm = np.linalg.norm(amplitudes)
        if abs(norm**2 - 1.0) > settings.normalization_slack:
            raise InvalidArgumentError(f"State is not normalized (norm^2={norm**2})")
        # Absorb rounding drift so the stored norm is 1 to machine precision
        amplitudes = amplitudes / norm
        amplitudes.setflags(write=False)

        self._amplitudes = amplitudes
        self._qubit_count = qubit_count

    @property
    def qubit_count(self) -> int:
        return self._qubit_count

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    @property
    def dimension(self) -> int:
        return self._amplitudes.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self._amplitudes) ** 2

    def norm_squared(self) -> float:
        return float(np.sum(self.probabilities()))

    def as_tensor(self) -> np.ndarray:
        """View the amplitudes as a rank-m tensor with one axis per qubit"""
        return self._amplitudes.reshape([2] * self._qubit_count)

    def allclose(self, other: "StateVector", atol: float = 1e-12) -> bool:
        return self.qubit_count == other.qubit_count and bool(
            np.allclose(self.amplitudes, other.amplitudes, atol=atol, rtol=0.0)
        )

    def __repr__(self) -> str:
        terms = [
            f"{amp:.4g}|{index:0{self._qubit_count}b}>"
            for index, amp in enumerate(self._amplitudes)
            if abs(amp) > 1e-12
        ]
        return f"StateVector({' + '.join(terms)})"


@dataclass(frozen=True)
class SingleQubitOutcome:
    bit: int
    collapsed: StateVector


class TwoQubitUnitary:
    """4x4 unitary acting on (data qubit) x (ancilla qubit), index = 2*data + ancilla"""

    __slots__ = ("_matrix",)

    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (4, 4):
            raise InvalidArgumentError(f"Expected a 4x4 matrix, got {matrix.shape}")
        deviation = np.max(np.abs(matrix.conj().T @ matrix - np.eye(4)))
        if deviation > settings.unitary_tolerance:
            raise InvalidArgumentError(
                f"Matrix is not unitary (max |U^dag U - I| = {deviation:.3e})"
            )
        matrix.setflags(write=False)
        self._matrix = matrix

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @classmethod
    def identity(cls) -> "TwoQubitUnitary":
        return cls(np.eye(4))

    @classmethod
    def cnot(cls) -> "TwoQubitUnitary":
        """Data qubit controls the ancilla"""
        return cls(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
        )

    @classmethod
    def from_json_entries(cls, rows: Sequence[Sequence[Sequence[float]]]):
        """Build from a row-major 4x4 array of [re, im] pairs"""
        try:
            matrix = np.array(
                [[complex(entry[0], entry[1]) for entry in row] for row in rows],
                dtype=complex,
            )
        except (TypeError, IndexError, ValueError) as e:
            raise InvalidArgumentError(f"Malformed unitary entries: {e}") from e
        return cls(matrix)

    def to_json_entries(self) -> list:
        return [
            [[float(entry.real), float(entry.imag)] for entry in row]
            for row in self._matrix
        ]

    def __repr__(self) -> str:
        return f"TwoQubitUnitary({np.array2string(self._matrix, precision=3)})"


def _check_index(state: StateVector, index: int) -> None:
    if not 0 <= index < state.qubit_count:
        raise InvalidArgumentError(
            f"Qubit index {index} out of range for {state.qubit_count} qubits"
        )


def basis_state(bits: str) -> StateVector:
    """Computational basis ket |bits>"""
    if not bits or set(bits) - {"0", "1"}:
        raise InvalidArgumentError(f"Invalid bit string: {bits!r}")
    amplitudes = np.zeros(2 ** len(bits), dtype=complex)
    amplitudes[int(bits, 2)] = 1.0
    return StateVector(amplitudes)


def prepare_decoy(kind: DecoyKind) -> StateVector:
    kind = DecoyKind(kind)
    if kind is DecoyKind.ZERO:
        return StateVector([1, 0])
    if kind is DecoyKind.ONE:
        return StateVector([0, 1])
    if kind is DecoyKind.PLUS:
        return StateVector([_SQRT2_INV, _SQRT2_INV])
    return StateVector([_SQRT2_INV, -_SQRT2_INV])


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>"""
    if a.qubit_count != b.qubit_count:
        raise InvalidArgumentError(
            f"Dimension mismatch: {a.qubit_count} vs {b.qubit_count} qubits"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(np.kron(a.amplitudes, b.amplitudes))


def append_qubit(state: StateVector) -> StateVector:
    """Attach a fresh |0> as the new last qubit"""
    return tensor(state, basis_state("0"))


def _components(state: StateVector, index: int, basis: Basis) -> np.ndarray:
    """Unnormalized remainders <b_j|_index |state> for j = 0, 1"""
    moved = np.moveaxis(state.as_tensor(), index, 0).reshape(2, -1)
    return _MEASUREMENT_BRAS[Basis(basis).value] @ moved


def outcome_probabilities(
    state: StateVector, index: int, basis: Basis
) -> Tuple[float, float]:
    """Exact Born probabilities of measuring one qubit in the given basis"""
    _check_index(state, index)
    components = _components(state, index, basis)
    p0 = float(np.sum(np.abs(components[0]) ** 2))
    p1 = float(np.sum(np.abs(components[1]) ** 2))
    return p0, p1


def project_qubit(state: StateVector, index: int, basis: Basis, bit: int) -> StateVector:
    """Post-selected collapse of one qubit onto the basis state labelled bit"""
    _check_index(state, index)
    if bit not in (0, 1):
        raise InvalidArgumentError(f"Outcome bit must be 0 or 1, got {bit}")
    components = _components(state, index, basis)
    remainder = components[bit]
    weight = np.linalg.norm(remainder)
    if weight < settings.norm_tolerance:
        raise InvalidArgumentError(
            f"Outcome {bit} on qubit {index} has zero probability in basis {basis}"
        )
    ket = _MEASUREMENT_BRAS[Basis(basis).value][bit].conj()
    rest_shape = [2] * (state.qubit_count - 1)
    projected = np.multiply.outer(ket, remainder / weight).reshape([2] + rest_shape)
    return StateVector(np.moveaxis(projected, 0, index).reshape(-1))


def measure_qubit(
    state: StateVector, index: int, basis: Basis, rng: np.random.Generator
) -> SingleQubitOutcome:
    """Born-rule measurement of one qubit; X basis maps |+> to 0 and |-> to 1"""
    _, p1 = outcome_probabilities(state, index, basis)
    bit = 1 if rng.random() < p1 else 0
    return SingleQubitOutcome(bit=bit, collapsed=project_qubit(state, index, basis, bit))


def measure_all_z(state: StateVector, rng: np.random.Generator) -> str:
    """Sample a full computational-basis outcome as an m-bit string"""
    probabilities = state.probabilities()
    index = int(rng.choice(state.dimension, p=probabilities / probabilities.sum()))
    return format(index, f"0{state.qubit_count}b")


def apply_two_qubit_unitary(
    state: StateVector,
    data_index: int,
    ancilla_index: int,
    u: TwoQubitUnitary,
) -> StateVector:
    _check_index(state, data_index)
    _check_index(state, ancilla_index)
    if data_index == ancilla_index:
        raise InvalidArgumentError("Data and ancilla indices must differ")
    if not isinstance(u, TwoQubitUnitary):
        u = TwoQubitUnitary(u)

    moved = np.moveaxis(state.as_tensor(), (data_index, ancilla_index), (0, 1))
    rest_shape = moved.shape[2:]
    transformed = (u.matrix @ moved.reshape(4, -1)).reshape((2, 2) + rest_shape)
    restored = np.moveaxis(transformed, (0, 1), (data_index, ancilla_index))
    return StateVector(restored.reshape(-1))
