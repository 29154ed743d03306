import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..channel.quantum_channel import DecoyPlacement, ParticleRef, QuantumSystem
from ..core.errors import InvalidArgumentError
from ..models.schemas import (
    Actor,
    AttackKind,
    ChannelTarget,
    DecoyErrorProfile,
    EveInformation,
    InterceptStrategy,
)
from ..quantum import (
    Basis,
    DecoyKind,
    TwoQubitUnitary,
    append_qubit,
    apply_two_qubit_unitary,
    complement,
    outcome_probabilities,
    prepare_decoy,
)
from .constraints import ancilla_distinguishability

logger = logging.getLogger(__name__)

_DECOY_KINDS = list(DecoyKind)
_BASES = (Basis.Z, Basis.X)


@dataclass
class InterceptedParticle:
    """What Eve keeps for one attacked slot of the sequence"""

    position: int
    stored: ParticleRef
    basis: Optional[Basis] = None
    bit: Optional[int] = None
    ancilla: Optional[int] = None


@dataclass
class EveRecord:
    kind: AttackKind
    channel: Actor
    strategy: InterceptStrategy = InterceptStrategy.MEASURE_PREPARE
    entries: List[InterceptedParticle] = field(default_factory=list)
    unitaries: List[TwoQubitUnitary] = field(default_factory=list)
    # (group index, qubit index) -> Z outcome learned after the announcement
    revealed: Dict[Tuple[int, int], int] = field(default_factory=dict)


@dataclass(frozen=True)
class AttackModel:
    kind: AttackKind = AttackKind.NONE
    unitary: Optional[TwoQubitUnitary] = None
    unitaries: Tuple[TwoQubitUnitary, ...] = ()
    target: ChannelTarget = ChannelTarget.ALICE_CHANNEL
    strategy: InterceptStrategy = InterceptStrategy.MEASURE_PREPARE
    fraction: float = 1.0

    def __post_init__(self):
        has_unitary = self.unitary is not None or bool(self.unitaries)
        if has_unitary != (self.kind is AttackKind.ENTANGLE_MEASURE):
            raise InvalidArgumentError(
                "An attack unitary is required for entangle_measure and only for it"
            )
        if not 0.0 <= self.fraction <= 1.0:
            raise InvalidArgumentError(f"fraction must lie in [0, 1], got {self.fraction}")

    @classmethod
    def none(cls) -> "AttackModel":
        return cls()

    @classmethod
    def intercept(
        cls,
        strategy: InterceptStrategy = InterceptStrategy.MEASURE_PREPARE,
        target: ChannelTarget = ChannelTarget.ALICE_CHANNEL,
        fraction: float = 1.0,
    ) -> "AttackModel":
        return cls(
            kind=AttackKind.INTERCEPT_RESEND,
            strategy=strategy,
            target=target,
            fraction=fraction,
        )

    @classmethod
    def measure(
        cls, target: ChannelTarget = ChannelTarget.ALICE_CHANNEL, fraction: float = 1.0
    ) -> "AttackModel":
        return cls(kind=AttackKind.MEASUREMENT_RESEND, target=target, fraction=fraction)

    @classmethod
    def entangle(
        cls,
        u: Optional[TwoQubitUnitary] = None,
        target: ChannelTarget = ChannelTarget.ALICE_CHANNEL,
        fraction: float = 1.0,
        unitaries: Sequence[TwoQubitUnitary] = (),
    ) -> "AttackModel":
        return cls(
            kind=AttackKind.ENTANGLE_MEASURE,
            unitary=u,
            unitaries=tuple(unitaries),
            target=target,
            fraction=fraction,
        )

    @property
    def probe_unitaries(self) -> List[TwoQubitUnitary]:
        return list(self.unitaries) if self.unitaries else [self.unitary]

    def unitary_for(self, position: int) -> TwoQubitUnitary:
        """Per-position probes are cycled over the sequence"""
        probes = self.probe_unitaries
        return probes[position % len(probes)]

    def targets(self, sender: Actor) -> bool:
        return self.kind is not AttackKind.NONE and self.target.covers(sender)

    def apply(
        self,
        particles: List[ParticleRef],
        rng: np.random.Generator,
        channel: Actor = Actor.ALICE,
    ) -> Tuple[List[ParticleRef], "EveRecord"]:
        if self.kind is AttackKind.INTERCEPT_RESEND:
            return intercept_resend(particles, rng, self.strategy, self.fraction, channel)
        if self.kind is AttackKind.MEASUREMENT_RESEND:
            return measurement_resend(particles, rng, self.fraction, channel)
        if self.kind is AttackKind.ENTANGLE_MEASURE:
            return entangle_measure(particles, self, rng, self.fraction, channel)
        return list(particles), EveRecord(kind=AttackKind.NONE, channel=channel)


def _selected(
    count: int, rng: Optional[np.random.Generator], fraction: float
) -> List[bool]:
    if fraction >= 1.0:
        return [True] * count
    if fraction <= 0.0:
        return [False] * count
    if rng is None:
        raise InvalidArgumentError("Partial interception needs a random generator")
    return [bool(x) for x in rng.random(count) < fraction]


def _random_basis(rng: np.random.Generator) -> Basis:
    return _BASES[int(rng.integers(2))]


def intercept_resend(
    particles: Sequence[ParticleRef],
    rng: np.random.Generator,
    strategy: InterceptStrategy = InterceptStrategy.MEASURE_PREPARE,
    fraction: float = 1.0,
    channel: Actor = Actor.ALICE,
) -> Tuple[List[ParticleRef], EveRecord]:
    """Keep the intercepted particles and forward freshly prepared ones"""
    strategy = InterceptStrategy(strategy)
    record = EveRecord(
        kind=AttackKind.INTERCEPT_RESEND, channel=channel, strategy=strategy
    )
    forwarded: List[ParticleRef] = []
    for position, (particle, hit) in enumerate(
        zip(particles, _selected(len(particles), rng, fraction))
    ):
        if not hit:
            forwarded.append(particle)
            continue
        if strategy is InterceptStrategy.MEASURE_PREPARE:
            basis = _random_basis(rng)
            bit = particle.system.measure(particle.qubit, basis, rng)
            fake = DecoyKind.from_basis_bit(basis, bit)
            record.entries.append(InterceptedParticle(position, particle, basis, bit))
        else:
            fake = _DECOY_KINDS[int(rng.integers(4))]
            record.entries.append(InterceptedParticle(position, particle))
        system = QuantumSystem(prepare_decoy(fake), label=f"eve-{position}")
        forwarded.append(particle.resent(system))
    return forwarded, record


def measurement_resend(
    particles: Sequence[ParticleRef],
    rng: np.random.Generator,
    fraction: float = 1.0,
    channel: Actor = Actor.ALICE,
) -> Tuple[List[ParticleRef], EveRecord]:
    """Measure each particle in a random basis and forward it collapsed"""
    record = EveRecord(kind=AttackKind.MEASUREMENT_RESEND, channel=channel)
    for position, (particle, hit) in enumerate(
        zip(particles, _selected(len(particles), rng, fraction))
    ):
        if hit:
            basis = _random_basis(rng)
            bit = particle.system.measure(particle.qubit, basis, rng)
            record.entries.append(InterceptedParticle(position, particle, basis, bit))
    return list(particles), record


def entangle_measure(
    particles: Sequence[ParticleRef],
    u,
    rng: Optional[np.random.Generator] = None,
    fraction: float = 1.0,
    channel: Actor = Actor.ALICE,
) -> Tuple[List[ParticleRef], EveRecord]:
    """Entangle a fresh |0> ancilla with every particle and keep the ancillas

    `u` is a single TwoQubitUnitary, a sequence cycled over positions, or an
    AttackModel carrying its probes.
    """
    if isinstance(u, AttackModel):
        model = u
    else:
        raw = u if isinstance(u, (list, tuple)) else [u]
        if not raw:
            raise InvalidArgumentError("entangle_measure needs at least one unitary")
        model = AttackModel.entangle(
            unitaries=[
                p if isinstance(p, TwoQubitUnitary) else TwoQubitUnitary(p)
                for p in raw
            ]
        )
    probes = model.probe_unitaries

    record = EveRecord(kind=AttackKind.ENTANGLE_MEASURE, channel=channel, unitaries=probes)
    for position, (particle, hit) in enumerate(
        zip(particles, _selected(len(particles), rng, fraction))
    ):
        if hit:
            ancilla = particle.system.attach_ancilla()
            particle.system.apply_unitary(
                particle.qubit, ancilla, model.unitary_for(position)
            )
            record.entries.append(InterceptedParticle(position, particle, ancilla=ancilla))
    return list(particles), record


def reveal_after_announcement(
    record: EveRecord, placement: DecoyPlacement, rng: np.random.Generator
) -> Dict[Tuple[int, int], int]:
    """Eve's Z measurements once decoy positions are public

    With the decoys known, the carrier order fixes each slot's group and qubit,
    so the labels on the stored slots are what Eve can infer at this point.
    """
    decoy_positions = set(placement.positions)
    for entry in record.entries:
        if entry.position in decoy_positions:
            continue
        stored = entry.stored
        key = (stored.group_index, stored.qubit)
        if record.kind is AttackKind.ENTANGLE_MEASURE:
            record.revealed[key] = stored.system.measure(entry.ancilla, Basis.Z, rng)
        elif record.kind is AttackKind.INTERCEPT_RESEND:
            record.revealed[key] = stored.system.measure(stored.qubit, Basis.Z, rng)
        elif entry.basis is Basis.Z:
            record.revealed[key] = entry.bit
    logger.debug(f"Eve revealed {len(record.revealed)} carrier bits")
    return record.revealed


def estimate_groups(record: EveRecord, group_count: int, group_size: int) -> List[str]:
    """Eve's guess of each plaintext group

    Unknown qubits and the bit-flip key are guessed as 0; the flag outcome
    undoes the GHZ branch, G' = data xor flag.
    """
    groups = []
    for i in range(group_count):
        flag = record.revealed.get((i, 0), 0)
        data = "".join(
            str(record.revealed.get((i, j), 0)) for j in range(1, group_size + 1)
        )
        groups.append(complement(data) if flag else data)
    return groups


def eve_information(record: EveRecord, truth_groups: Sequence[str]) -> EveInformation:
    group_count = len(truth_groups)
    distinguishability = (
        max(ancilla_distinguishability(u) for u in record.unitaries)
        if record.unitaries
        else None
    )
    if not record.entries or not group_count:
        return EveInformation(
            guess_success_rate=0.0,
            groups_recovered=0,
            group_count=group_count,
            secret_recovered=False,
            ancilla_distinguishability=distinguishability,
        )
    guesses = estimate_groups(record, group_count, len(truth_groups[0]))
    recovered = sum(guess == truth for guess, truth in zip(guesses, truth_groups))
    return EveInformation(
        guess_success_rate=recovered / group_count,
        groups_recovered=recovered,
        group_count=group_count,
        secret_recovered=recovered == group_count,
        ancilla_distinguishability=distinguishability,
    )


def _error_given_state(state, kind: DecoyKind) -> float:
    """Probability that the announced-basis check disagrees with the preparation bit"""
    return outcome_probabilities(state, 0, kind.basis)[1 - kind.bit]


def _exact_error(attack: AttackModel, kind: DecoyKind) -> float:
    decoy = prepare_decoy(kind)
    if attack.kind is AttackKind.NONE:
        return 0.0
    if attack.kind is AttackKind.ENTANGLE_MEASURE:
        probes = attack.probe_unitaries
        return float(
            np.mean(
                [
                    _error_given_state(
                        apply_two_qubit_unitary(append_qubit(decoy), 0, 1, u), kind
                    )
                    for u in probes
                ]
            )
        )
    if (
        attack.kind is AttackKind.INTERCEPT_RESEND
        and attack.strategy is InterceptStrategy.STORE_FAKE
    ):
        return float(
            np.mean([_error_given_state(prepare_decoy(f), kind) for f in _DECOY_KINDS])
        )
    # Eve measures in a uniformly random basis and the check sees her eigenstate
    error = 0.0
    for basis in _BASES:
        probabilities = outcome_probabilities(decoy, 0, basis)
        for bit, p in enumerate(probabilities):
            forwarded = prepare_decoy(DecoyKind.from_basis_bit(basis, bit))
            error += 0.5 * p * _error_given_state(forwarded, kind)
    return error


def exact_decoy_error(attack: AttackModel) -> DecoyErrorProfile:
    """Exact per-decoy disturbance by enumeration over the four preparations"""
    per_kind = {
        kind.value: attack.fraction * _exact_error(attack, kind) for kind in _DECOY_KINDS
    }
    return DecoyErrorProfile(
        per_kind=per_kind, average=float(np.mean(list(per_kind.values())))
    )
