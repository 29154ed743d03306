import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from ..core.errors import InvalidArgumentError
from ..models.schemas import Actor, ChannelCheck
from ..quantum import (
    Basis,
    DecoyKind,
    StateVector,
    TwoQubitUnitary,
    append_qubit,
    apply_two_qubit_unitary,
    measure_qubit,
    prepare_decoy,
    project_qubit,
)

if TYPE_CHECKING:
    from ..adversary.attacks import AttackModel, EveRecord

logger = logging.getLogger(__name__)

_DECOY_KINDS = list(DecoyKind)


class QuantumSystem:
    """Mutable holder of one joint statevector (a GHZ group or a decoy, plus ancillas)"""

    def __init__(self, state: StateVector, label: str = ""):
        self.state = state
        self.label = label

    @property
    def qubit_count(self) -> int:
        return self.state.qubit_count

    def measure(self, qubit: int, basis: Basis, rng: np.random.Generator) -> int:
        outcome = measure_qubit(self.state, qubit, basis, rng)
        self.state = outcome.collapsed
        return outcome.bit

    def project(self, qubit: int, basis: Basis, bit: int) -> None:
        self.state = project_qubit(self.state, qubit, basis, bit)

    def attach_ancilla(self) -> int:
        """Append a |0> ancilla and return its qubit index"""
        self.state = append_qubit(self.state)
        return self.qubit_count - 1

    def apply_unitary(self, data: int, ancilla: int, u: TwoQubitUnitary) -> None:
        self.state = apply_two_qubit_unitary(self.state, data, ancilla, u)

    def __repr__(self) -> str:
        return f"QuantumSystem({self.label!r}, {self.qubit_count} qubits)"


class ParticleKind(str, Enum):
    CARRIER = "carrier"
    DECOY = "decoy"


@dataclass(frozen=True, eq=False)
class ParticleRef:
    """One physical qubit: a slot of the transmitted sequence and the system it lives in"""

    kind: ParticleKind
    system: QuantumSystem
    qubit: int
    group_index: Optional[int] = None
    decoy_index: Optional[int] = None

    def resent(self, system: QuantumSystem, qubit: int = 0) -> "ParticleRef":
        """The same slot, now occupied by another physical qubit"""
        return replace(self, system=system, qubit=qubit)


class DecoyEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    position: int
    kind: DecoyKind

    @property
    def basis(self) -> Basis:
        return self.kind.basis

    @property
    def bit(self) -> int:
        return self.kind.bit


class DecoyPlacement(BaseModel):
    """Sender-private record of decoy positions and preparation states"""

    model_config = ConfigDict(frozen=True)

    entries: List[DecoyEntry] = []

    @model_validator(mode="after")
    def check_positions(self):
        positions = self.positions
        if any(a >= b for a, b in zip(positions, positions[1:])):
            raise ValueError("decoy positions must be strictly increasing")
        return self

    @property
    def positions(self) -> List[int]:
        return [entry.position for entry in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class TransmittedSequence:
    particles: List[ParticleRef]
    placement: DecoyPlacement = field(default_factory=DecoyPlacement)
    sender: Actor = Actor.ALICE

    def __len__(self) -> int:
        return len(self.particles)


def take_particles(systems: Sequence[QuantumSystem]) -> List[ParticleRef]:
    """All qubits of the carrier systems in group order, qubit 0 first"""
    return [
        ParticleRef(ParticleKind.CARRIER, system, qubit, group_index=group_index)
        for group_index, system in enumerate(systems)
        for qubit in range(system.qubit_count)
    ]


def insert_decoys(
    carriers: Sequence[ParticleRef],
    decoy_count: int,
    rng: np.random.Generator,
    sender: Actor = Actor.ALICE,
) -> TransmittedSequence:
    """Insert decoys uniform over the four states at uniformly random positions"""
    if decoy_count < 0:
        raise InvalidArgumentError(f"decoy_count must be >= 0, got {decoy_count}")
    total = len(carriers) + decoy_count
    positions = (
        sorted(int(p) for p in rng.choice(total, size=decoy_count, replace=False))
        if decoy_count
        else []
    )
    kinds = [_DECOY_KINDS[int(k)] for k in rng.integers(0, 4, size=decoy_count)]

    decoy_at = dict(zip(positions, kinds))
    remaining = iter(carriers)
    particles: List[ParticleRef] = []
    entries: List[DecoyEntry] = []
    for position in range(total):
        kind = decoy_at.get(position)
        if kind is None:
            particles.append(next(remaining))
            continue
        decoy_index = len(entries)
        system = QuantumSystem(prepare_decoy(kind), label=f"decoy-{decoy_index}")
        particles.append(
            ParticleRef(ParticleKind.DECOY, system, 0, decoy_index=decoy_index)
        )
        entries.append(DecoyEntry(position=position, kind=kind))

    return TransmittedSequence(
        particles=particles, placement=DecoyPlacement(entries=entries), sender=sender
    )


def remove_decoys(sequence: TransmittedSequence) -> List[ParticleRef]:
    """Carrier particles in their original order"""
    decoy_positions = set(sequence.placement.positions)
    return [
        particle
        for position, particle in enumerate(sequence.particles)
        if position not in decoy_positions
    ]


def transmit(
    sequence: TransmittedSequence,
    attack: Optional["AttackModel"],
    rng: np.random.Generator,
) -> Tuple[TransmittedSequence, Optional["EveRecord"]]:
    """Send a sequence to TP; the attack only ever sees the particle stream"""
    if attack is None or not attack.targets(sequence.sender):
        return sequence, None
    particles, record = attack.apply(list(sequence.particles), rng, sequence.sender)
    logger.debug(
        f"{attack.kind.value} on {sequence.sender.value} channel: "
        f"{len(record.entries)} of {len(particles)} particles attacked"
    )
    return replace(sequence, particles=particles), record


def check_eavesdropping(
    received: TransmittedSequence,
    placement: DecoyPlacement,
    threshold: float,
    rng: np.random.Generator,
) -> ChannelCheck:
    """Measure every announced decoy in its basis and compare with its preparation bit"""
    if placement.entries and placement.entries[-1].position >= len(received):
        raise InvalidArgumentError("decoy placement does not fit the received sequence")
    mismatches = 0
    for entry in placement.entries:
        particle = received.particles[entry.position]
        if particle.system.measure(particle.qubit, entry.basis, rng) != entry.bit:
            mismatches += 1
    decoy_count = len(placement)
    error_rate = mismatches / decoy_count if decoy_count else 0.0
    return ChannelCheck(
        channel=received.sender,
        decoy_count=decoy_count,
        mismatches=mismatches,
        error_rate=error_rate,
        passed=error_rate <= threshold,
    )
