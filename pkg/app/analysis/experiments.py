import logging
from typing import List, Optional

import numpy as np
from scipy.stats import binom

from ..adversary.attacks import AttackModel, estimate_groups, exact_decoy_error
from ..adversary.constraints import ancilla_distinguishability, check_constraints
from ..models.schemas import (
    Actor,
    AttackKind,
    ChannelTarget,
    ExperimentReport,
    GuessRole,
    InterceptStrategy,
    ProtocolConfig,
    Secret,
    Verdict,
)
from ..protocol.session import ProtocolSession, run_protocol
from ..quantum import complement
from .montecarlo import MonteCarloRunner

logger = logging.getLogger(__name__)


def random_secret(length: int, rng: np.random.Generator) -> Secret:
    return Secret(bits="".join(str(b) for b in rng.integers(0, 2, size=length)))


def analytic_detection(attack: AttackModel, decoy_count: int) -> float:
    """P(at least one flagged decoy) over every attacked channel"""
    if attack.kind is AttackKind.NONE:
        return 0.0
    p = exact_decoy_error(attack).average
    return float(binom.sf(0, decoy_count * attack.target.channel_count, p))


def _detection_trial(
    rng: np.random.Generator, config: ProtocolConfig, attack: AttackModel
) -> bool:
    x = random_secret(config.secret_length, rng)
    y = random_secret(config.secret_length, rng)
    return run_protocol(config, x, y, attack, rng).verdict is Verdict.ABORTED


def detection_experiment(
    attack: AttackModel,
    decoy_count: int,
    trials: int,
    seed: int,
    jobs: int = 1,
    secret_length: int = 2,
    group_size: int = 2,
) -> ExperimentReport:
    """Abort frequency of full protocol runs under an attack"""
    config = ProtocolConfig(
        secret_length=secret_length,
        group_size=group_size,
        decoy_count=decoy_count,
        threshold=0.0,
        max_attempts=1,
    )
    runner = MonteCarloRunner(trials, seed, jobs)
    aborted = runner.count(_detection_trial, config, attack)

    profile = exact_decoy_error(attack)
    details = {"per_decoy_error": profile.average, "per_kind_error": profile.per_kind}
    if attack.kind is AttackKind.ENTANGLE_MEASURE:
        reports = [check_constraints(u) for u in attack.probe_unitaries]
        details["constraints"] = [r.model_dump() for r in reports]
        details["constraints_satisfied"] = all(r.satisfied for r in reports)
        details["ancilla_distinguishability"] = max(
            ancilla_distinguishability(u) for u in attack.probe_unitaries
        )
    return ExperimentReport.from_counts(
        name="detection",
        successes=aborted,
        trials=trials,
        analytic=analytic_detection(attack, decoy_count),
        parameters={
            "attack": attack.kind.value,
            "strategy": attack.strategy.value,
            "target": attack.target.value,
            "fraction": attack.fraction,
            "decoys": decoy_count,
            "N": secret_length,
            "n": group_size,
            "seed": seed,
        },
        details=details,
    )


def analytic_guess(config: ProtocolConfig, exploit_padding: bool = False) -> float:
    unknown = config.group_count
    if exploit_padding and config.padding:
        unknown -= 1
    return 0.5**unknown


def _unmask(
    view: List[str],
    known: List[int],
    config: ProtocolConfig,
    rng: np.random.Generator,
    exploit_padding: bool,
    blind_guess: Optional[int] = None,
) -> str:
    """Recover the secret from groups masked by a known and an unknown key bit

    view[i] = G[i] xor (known[i] xor unknown[i]). The unknown bit is guessed, or
    read off a padded position of the last group, whose plaintext is 0.
    """
    groups = []
    last = len(view) - 1
    for i, masked in enumerate(view):
        if exploit_padding and config.padding and i == last:
            unknown = int(masked[-1]) ^ known[i]
        elif blind_guess is not None:
            unknown = blind_guess
        else:
            unknown = int(rng.integers(2))
        groups.append(complement(masked) if known[i] ^ unknown else masked)
    return "".join(groups)[: config.secret_length]


def _guess_trial(
    rng: np.random.Generator,
    config: ProtocolConfig,
    role: GuessRole,
    exploit_padding: bool,
) -> bool:
    x = random_secret(config.secret_length, rng)
    y = random_secret(config.secret_length, rng)
    groups = config.group_count

    if role is GuessRole.TP:
        session = ProtocolSession(config, x, y, rng=rng)
        session.run()
        if Actor.ALICE not in session.tp_records:
            return False
        view = [record.m2_prime for record in session.tp_records[Actor.ALICE]]
        guess = _unmask(view, [0] * groups, config, rng, exploit_padding)
        return guess == x.bits

    # The attacker holds the victim's particles untouched and Z-measures them
    # once the decoy positions are announced
    victim_channel = {
        GuessRole.ALICE: ChannelTarget.BOB_CHANNEL,
        GuessRole.BOB: ChannelTarget.ALICE_CHANNEL,
        GuessRole.EVE: ChannelTarget.ALICE_CHANNEL,
    }[role]
    victim = Actor.BOB if role is GuessRole.ALICE else Actor.ALICE
    attack = AttackModel.intercept(InterceptStrategy.STORE_FAKE, target=victim_channel)
    session = ProtocolSession(config, x, y, attack=attack, rng=rng)
    session.run()
    view = estimate_groups(session.eve_records[victim], groups, config.group_size)

    if role is GuessRole.EVE:
        guess = _unmask(view, [0] * groups, config, rng, exploit_padding, blind_guess=0)
    else:
        guess = _unmask(view, session.keys.k_ab, config, rng, exploit_padding)
    target = y if victim is Actor.BOB else x
    return guess == target.bits


def guess_experiment(
    role: GuessRole,
    config: ProtocolConfig,
    trials: int,
    seed: int,
    jobs: int = 1,
    exploit_padding: bool = False,
) -> ExperimentReport:
    """Rate at which an insider (or Eve) reconstructs the other party's whole secret"""
    role = GuessRole(role)
    runner = MonteCarloRunner(trials, seed, jobs)
    hits = runner.count(_guess_trial, config, role, exploit_padding)
    return ExperimentReport.from_counts(
        name=f"guess_{role.value}",
        successes=hits,
        trials=trials,
        analytic=analytic_guess(config, exploit_padding),
        parameters={
            "role": role.value,
            "N": config.secret_length,
            "n": config.group_size,
            "groups": config.group_count,
            "decoys": config.decoy_count,
            "exploit_padding": exploit_padding,
            "max_attempts": config.max_attempts,
            "seed": seed,
        },
    )
