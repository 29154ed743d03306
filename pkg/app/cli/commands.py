import argparse
import logging
import sys
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from ..adversary.attacks import AttackModel
from ..adversary.constraints import load_unitary
from ..analysis.experiments import detection_experiment, guess_experiment
from ..analysis.montecarlo import run_with_rerun
from ..analysis.reports import format_report_text, reports_to_csv, to_json
from ..analysis.verification import (
    efficiency_tradeoff,
    exhaustive_correctness,
    qubit_efficiency,
    verify_truth_table,
)
from ..core.errors import UsageError
from ..memory.transcript import TranscriptStore
from ..models.schemas import (
    ChannelTarget,
    ExperimentReport,
    GuessRole,
    InterceptStrategy,
    ProtocolConfig,
    Secret,
)
from ..protocol.session import ProtocolSession

logger = logging.getLogger(__name__)


@dataclass
class CommandResult:
    output: str
    exit_code: int = 0


def draw_seed() -> int:
    """Fresh master seed from system entropy"""
    return int(np.random.SeedSequence().entropy)


def resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    seed = draw_seed()
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def parse_secret(text: str, length: int, flag: str) -> Secret:
    try:
        return Secret.parse(text, length)
    except ValueError as e:
        raise UsageError(f"{flag}: {e}") from e


def build_attack(args: argparse.Namespace) -> AttackModel:
    target = ChannelTarget(args.target)
    if args.attack == "none":
        return AttackModel.none()
    if args.attack == "intercept":
        return AttackModel.intercept(
            InterceptStrategy(args.strategy), target=target, fraction=args.fraction
        )
    if args.attack == "measure":
        return AttackModel.measure(target=target, fraction=args.fraction)
    if args.unitary is None:
        raise UsageError("--unitary is required for the entangle attack")
    return AttackModel.entangle(
        load_unitary(args.unitary), target=target, fraction=args.fraction
    )


def _report_output(report: ExperimentReport, fmt: str, seed: int) -> CommandResult:
    if fmt == "csv":
        output = reports_to_csv([report]).rstrip("\n")
    elif fmt == "text":
        output = format_report_text(report)
    else:
        output = to_json(report, seed=seed)
    return CommandResult(output, 0 if report.passed else 1)


def _require_json(fmt: str, command: str):
    if fmt == "csv":
        raise UsageError(
            f"csv output is only available for experiment reports, not {command}"
        )


def cmd_run(args: argparse.Namespace) -> CommandResult:
    _require_json(args.format, "run")
    seed = resolve_seed(args)
    config = ProtocolConfig(
        secret_length=args.secret_length,
        group_size=args.group_size,
        decoy_count=args.decoys,
        threshold=args.threshold,
        max_attempts=args.max_attempts,
    )
    secret_a = parse_secret(args.secret_a, config.secret_length, "--secret-a")
    secret_b = parse_secret(args.secret_b, config.secret_length, "--secret-b")
    session = ProtocolSession(
        config,
        secret_a,
        secret_b,
        attack=build_attack(args),
        rng=np.random.default_rng(seed),
        session_id=f"run-{seed}",
    )
    outcome = session.run()

    if args.save_transcript:
        path = TranscriptStore(args.save_transcript).save(
            session.transcript.session_id, outcome.transcript
        )
        logger.info(f"Transcript written to {path}")

    if args.format == "text":
        lines = [
            f"verdict: {outcome.verdict.value}",
            f"attempts: {outcome.attempts}",
            f"error rate: {outcome.eavesdrop_error_rate}",
            f"R_C: {' '.join(outcome.per_group_rc) or '-'}",
        ]
        if args.transcript:
            lines += [
                f"  [{e.step}] {e.actor.value} {e.action} {e.payload}"
                for e in outcome.transcript
            ]
        return CommandResult("\n".join(lines))

    exclude = None if args.transcript else {"transcript"}
    result = {
        "parameters": config.model_dump(mode="json"),
        "outcome": outcome.model_dump(mode="json", exclude=exclude),
    }
    return CommandResult(to_json(result, seed=seed))


def cmd_attack(args: argparse.Namespace) -> CommandResult:
    if args.attack == "none":
        raise UsageError("attack needs --kind intercept, measure or entangle")
    attack = build_attack(args)
    seed = resolve_seed(args)
    report = run_with_rerun(
        lambda s: detection_experiment(
            attack,
            args.decoys,
            args.trials,
            s,
            jobs=args.jobs,
            secret_length=args.secret_length,
            group_size=args.group_size,
        ),
        seed,
    )
    return _report_output(report, args.format, seed)


def cmd_guess(args: argparse.Namespace) -> CommandResult:
    config = ProtocolConfig(
        secret_length=args.secret_length,
        group_size=args.group_size,
        decoy_count=args.decoys,
        threshold=args.threshold,
        max_attempts=args.max_attempts,
    )
    seed = resolve_seed(args)
    report = run_with_rerun(
        lambda s: guess_experiment(
            GuessRole(args.role),
            config,
            args.trials,
            s,
            jobs=args.jobs,
            exploit_padding=args.exploit_padding,
        ),
        seed,
    )
    return _report_output(report, args.format, seed)


def cmd_truth_table(args: argparse.Namespace) -> CommandResult:
    _require_json(args.format, "truth-table")
    report = verify_truth_table()
    exit_code = 0 if report.all_passed else 1
    if args.format == "text":
        lines = ["K_AB K_AC K_BC M_A1 M_B1 | R_A R_B C_A C_B | A'  B'  | ok"]
        for r in report.rows:
            lines.append(
                f"{r.k_ab}    {r.k_ac}    {r.k_bc}    {r.m_a1}    {r.m_b1}    | "
                f"{r.r_a}   {r.r_b}   {r.c_a}   {r.c_b}   | "
                f"{r.alice_output:<3} {r.bob_output:<3} | {'yes' if r.passed else 'NO'}"
            )
        lines.append(f"{report.passed_count}/{len(report.rows)} rows pass")
        return CommandResult("\n".join(lines), exit_code)
    return CommandResult(to_json(report), exit_code)


def cmd_efficiency(args: argparse.Namespace) -> CommandResult:
    _require_json(args.format, "efficiency")
    if args.secret_length is not None and args.group_sizes is None:
        rows = efficiency_tradeoff(args.secret_length)
        if args.format == "text":
            lines = ["n  qubits  groups  efficiency  guess"]
            lines += [
                f"{r.group_size:<2} {r.ghz_qubits:<7} {r.group_count:<7} "
                f"{r.efficiency:<11} {r.guess_probability:.6g}"
                for r in rows
            ]
            return CommandResult("\n".join(lines))
        return CommandResult(to_json(rows))

    results = [
        qubit_efficiency(n, args.secret_length) for n in (args.group_sizes or [2])
    ]
    exit_code = 0 if all(r.bounds_ok for r in results) else 1
    if args.format == "text":
        lines = [
            f"n={r.group_size}: {r.efficiency} ~ {r.value:.7g} "
            f"({'bounds ok' if r.bounds_ok else 'OUT OF BOUNDS'})"
            for r in results
        ]
        return CommandResult("\n".join(lines), exit_code)
    return CommandResult(to_json(results), exit_code)


def cmd_correctness(args: argparse.Namespace) -> CommandResult:
    _require_json(args.format, "correctness")
    seed = resolve_seed(args)
    summary = exhaustive_correctness(
        args.max_secret_length, seed=seed, decoy_count=args.decoys
    )
    exit_code = 0 if summary.all_passed else 1
    if args.format == "text":
        lines = [
            f"N={c.secret_length} n={c.group_size}: {c.pairs_checked} pairs, "
            f"{c.equal_verdicts} equal, {c.failures} failures"
            f"{'' if c.exhaustive else ' (sampled)'}"
            for c in summary.cases
        ]
        lines.append(
            "all pass" if summary.all_passed else f"{summary.total_failures} failures"
        )
        return CommandResult("\n".join(lines), exit_code)
    return CommandResult(to_json(summary, seed=seed), exit_code)


COMMANDS: Dict[str, Callable[[argparse.Namespace], CommandResult]] = {
    "run": cmd_run,
    "attack": cmd_attack,
    "guess": cmd_guess,
    "truth-table": cmd_truth_table,
    "efficiency": cmd_efficiency,
    "correctness": cmd_correctness,
}


def dispatch(args: argparse.Namespace) -> CommandResult:
    return COMMANDS[args.command](args)