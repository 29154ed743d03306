import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..adversary.attacks import AttackModel, EveRecord, reveal_after_announcement
from ..channel.quantum_channel import (
    ParticleRef,
    QuantumSystem,
    check_eavesdropping,
    insert_decoys,
    remove_decoys,
    take_particles,
    transmit,
)
from ..core.errors import InvalidArgumentError
from ..memory.transcript import Transcript
from ..models.schemas import (
    Actor,
    ChannelCheck,
    EncryptedGroup,
    GroupedSecret,
    KeyMaterial,
    ProtocolConfig,
    RunOutcome,
    Secret,
    TpDecodeRecord,
    Verdict,
)
from ..quantum import Basis
from .coding import (
    compare_groups,
    encrypt_group,
    generate_keys,
    group_secret,
    prepare_carrier,
    tp_decode,
)

logger = logging.getLogger(__name__)


class ProtocolSession:
    """One comparison between Alice and Bob coordinated by TP

    A session is single-threaded and owns its random stream. After `run()` the
    last attempt's keys, groups, TP records, channel checks and Eve's records
    stay available for analysis.
    """

    def __init__(
        self,
        config: ProtocolConfig,
        secret_a: Secret,
        secret_b: Secret,
        attack: Optional[AttackModel] = None,
        rng: Optional[np.random.Generator] = None,
        forced_flag: Optional[int] = None,
        session_id: str = "session",
    ):
        for name, secret in (("secret_a", secret_a), ("secret_b", secret_b)):
            if secret.length != config.secret_length:
                raise InvalidArgumentError(
                    f"{name} has {secret.length} bits, expected N={config.secret_length}"
                )
        if forced_flag not in (None, 0, 1):
            raise InvalidArgumentError(
                f"forced_flag must be 0, 1 or None, got {forced_flag}"
            )

        self.config = config
        self.secret_a = secret_a
        self.secret_b = secret_b
        self.attack = attack or AttackModel.none()
        self.rng = rng if rng is not None else np.random.default_rng()
        self.forced_flag = forced_flag
        self.transcript = Transcript(session_id)

        self.keys: Optional[KeyMaterial] = None
        self.grouped: Dict[Actor, GroupedSecret] = {}
        self.encrypted: Dict[Actor, List[EncryptedGroup]] = {}
        self.tp_records: Dict[Actor, List[TpDecodeRecord]] = {}
        self.checks: List[ChannelCheck] = []
        self.eve_records: Dict[Actor, EveRecord] = {}

    def run(self) -> RunOutcome:
        """Run Steps 1-6, restarting from scratch after an abort while attempts remain"""
        outcome = None
        for attempt in range(1, self.config.max_attempts + 1):
            outcome = self._attempt(attempt)
            if outcome.verdict is not Verdict.ABORTED:
                break
            logger.info(f"Attempt {attempt} aborted: eavesdropping detected")
        return outcome

    def _reset(self):
        self.grouped.clear()
        self.encrypted.clear()
        self.tp_records.clear()
        self.checks = []
        self.eve_records.clear()

    def _attempt(self, attempt: int) -> RunOutcome:
        self._reset()
        config, rng, log = self.config, self.rng, self.transcript
        group_count = config.group_count

        # Step 1
        self.keys = generate_keys(group_count, rng)
        log.add_event(1, Actor.TP, "keys_shared", attempt=attempt, group_count=group_count)

        # Steps 2-4 per participant
        sequences = {}
        for sender, secret, flip_bit in (
            (Actor.ALICE, self.secret_a, self.keys.r_alice),
            (Actor.BOB, self.secret_b, self.keys.r_bob),
        ):
            grouped = group_secret(secret, config.group_size)
            encrypted = [
                encrypt_group(g, flip_bit(i)) for i, g in enumerate(grouped.groups)
            ]
            systems = [
                QuantumSystem(prepare_carrier(e), label=f"{sender.value}-{i}")
                for i, e in enumerate(encrypted)
            ]
            sequence = insert_decoys(
                take_particles(systems), config.decoy_count, rng, sender
            )
            self.grouped[sender] = grouped
            self.encrypted[sender] = encrypted
            log.add_event(2, sender, "encrypt_groups", groups=len(encrypted))
            log.add_event(
                4,
                sender,
                "send_sequence",
                particles=len(sequence),
                decoys=len(sequence.placement),
            )
            sequences[sender] = sequence

        received = {}
        for sender, sequence in sequences.items():
            received[sender], record = transmit(sequence, self.attack, rng)
            if record is not None:
                self.eve_records[sender] = record
                log.add_event(
                    4,
                    Actor.EVE,
                    self.attack.kind.value,
                    channel=sender.value,
                    attacked=len(record.entries),
                )

        # Step 5: placements are announced; Eve may now use them
        for sender, record in self.eve_records.items():
            reveal_after_announcement(record, sequences[sender].placement, rng)
        for sender, sequence in sequences.items():
            check = check_eavesdropping(
                received[sender], sequence.placement, config.threshold, rng
            )
            self.checks.append(check)
            log.add_event(
                5,
                Actor.TP,
                "decoy_check",
                channel=sender.value,
                mismatches=check.mismatches,
                error_rate=check.error_rate,
                passed=check.passed,
            )
        error_rate = max(check.error_rate for check in self.checks)
        if not all(check.passed for check in self.checks):
            log.add_event(5, Actor.TP, "abort", error_rate=error_rate)
            return self._outcome(Verdict.ABORTED, [], error_rate, attempt)

        # Step 6
        key_bits = {Actor.ALICE: self.keys.k_ac, Actor.BOB: self.keys.k_bc}
        for sender in (Actor.ALICE, Actor.BOB):
            carriers = remove_decoys(received[sender])
            self.tp_records[sender] = [
                tp_decode(self._measure_group(group), key_bits[sender][i])
                for i, group in enumerate(self._split_groups(carriers))
            ]

        per_group_rc = []
        all_equal = True
        records = zip(self.tp_records[Actor.ALICE], self.tp_records[Actor.BOB])
        for record_a, record_b in records:
            rc, equal = compare_groups(record_a.m2_prime, record_b.m2_prime)
            per_group_rc.append(rc)
            all_equal = all_equal and equal
        verdict = Verdict.EQUAL if all_equal else Verdict.UNEQUAL
        log.add_event(6, Actor.TP, "announce", verdict=verdict.value)
        logger.debug(f"Session {log.session_id} attempt {attempt}: {verdict.value}")
        return self._outcome(verdict, per_group_rc, error_rate, attempt)

    def _split_groups(
        self, carriers: Sequence[ParticleRef]
    ) -> List[Sequence[ParticleRef]]:
        width = self.config.group_size + 1
        return [carriers[i : i + width] for i in range(0, len(carriers), width)]

    def _measure_group(self, particles: Sequence[ParticleRef]) -> str:
        """TP's Z measurement of one received carrier, flag first"""
        bits = []
        for j, particle in enumerate(particles):
            if j == 0 and self.forced_flag is not None:
                particle.system.project(particle.qubit, Basis.Z, self.forced_flag)
                bits.append(str(self.forced_flag))
            else:
                bit = particle.system.measure(particle.qubit, Basis.Z, self.rng)
                bits.append(str(bit))
        return "".join(bits)

    def _outcome(
        self, verdict: Verdict, per_group_rc: List[str], error_rate: float, attempt: int
    ) -> RunOutcome:
        return RunOutcome(
            verdict=verdict,
            per_group_rc=per_group_rc,
            eavesdrop_error_rate=error_rate,
            channel_checks=list(self.checks),
            attempts=attempt,
            transcript=list(self.transcript.events),
        )


def run_protocol(
    config: ProtocolConfig,
    x: Secret,
    y: Secret,
    attack: Optional[AttackModel] = None,
    rng: Optional[np.random.Generator] = None,
) -> RunOutcome:
    return ProtocolSession(config, x, y, attack=attack, rng=rng).run()
