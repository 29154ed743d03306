import argparse
from typing import Optional

from ..core.config import FlagSettings
from ..models.schemas import ChannelTarget, GuessRole, InterceptStrategy

ATTACK_CHOICES = ["none", "intercept", "measure", "entangle"]
FORMAT_CHOICES = ["json", "csv", "text"]


def _common(defaults: FlagSettings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed", type=int, default=None, help="master seed (drawn if absent)"
    )
    common.add_argument("--format", choices=FORMAT_CHOICES, default="json")
    common.add_argument("--jobs", type=int, default=defaults.default_jobs)
    common.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    return common


def _protocol_flags(
    parser: argparse.ArgumentParser,
    defaults: FlagSettings,
    required: bool = True,
    decoys: Optional[int] = None,
):
    size = {} if required else {"default": 2}
    parser.add_argument("--N", dest="secret_length", type=int, required=required, **size)
    parser.add_argument("--n", dest="group_size", type=int, required=required, **size)
    parser.add_argument(
        "--decoys",
        type=int,
        default=defaults.default_decoy_count if decoys is None else decoys,
    )
    parser.add_argument("--threshold", type=float, default=defaults.default_threshold)


def _attack_flags(parser: argparse.ArgumentParser, kind_flag: str, **kind_kwargs):
    parser.add_argument(kind_flag, dest="attack", choices=ATTACK_CHOICES, **kind_kwargs)
    parser.add_argument(
        "--unitary", default=None, help="JSON file with a 4x4 [re, im] array"
    )
    parser.add_argument(
        "--strategy",
        choices=[s.value for s in InterceptStrategy],
        default=InterceptStrategy.MEASURE_PREPARE.value,
    )
    parser.add_argument(
        "--target",
        choices=[t.value for t in ChannelTarget],
        default=ChannelTarget.ALICE_CHANNEL.value,
    )
    parser.add_argument("--fraction", type=float, default=1.0)


def build_parser(defaults: Optional[FlagSettings] = None) -> argparse.ArgumentParser:
    defaults = defaults or FlagSettings()
    common = _common(defaults)
    parser = argparse.ArgumentParser(
        prog="ghz-qpc", description=f"{defaults.app_name}: GHZ-based private comparison"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="one protocol session")
    _protocol_flags(run, defaults)
    run.add_argument("--secret-a", required=True, help="bits x_1..x_N or a decimal value")
    run.add_argument("--secret-b", required=True)
    run.add_argument("--max-attempts", type=int, default=defaults.default_max_attempts)
    _attack_flags(run, "--attack", default="none")
    run.add_argument("--transcript", action="store_true", help="include the event log")
    run.add_argument("--save-transcript", metavar="DIR", default=None)

    attack = sub.add_parser("attack", parents=[common], help="detection experiment")
    _protocol_flags(attack, defaults, required=False)
    _attack_flags(attack, "--kind", required=True)
    attack.add_argument("--trials", type=int, default=defaults.default_trials)

    guess = sub.add_parser("guess", parents=[common], help="insider guess experiment")
    _protocol_flags(guess, defaults, required=False)
    guess.add_argument("--role", choices=[r.value for r in GuessRole], required=True)
    guess.add_argument("--max-attempts", type=int, default=defaults.default_max_attempts)
    guess.add_argument("--trials", type=int, default=defaults.default_trials)
    guess.add_argument(
        "--exploit-padding",
        action="store_true",
        help="read the key bit off the zero padding of the last group",
    )

    sub.add_parser("truth-table", parents=[common], help="check all 32 decode cases")

    efficiency = sub.add_parser("efficiency", parents=[common], help="qubit efficiency")
    efficiency.add_argument("--n", dest="group_sizes", type=int, nargs="+", default=None)
    efficiency.add_argument(
        "--N", dest="secret_length", type=int, default=None, help="trade-off table over n"
    )

    correctness = sub.add_parser("correctness", parents=[common], help="honest-run sweep")
    correctness.add_argument(
        "--max-N",
        dest="max_secret_length",
        type=int,
        default=defaults.exhaustive_full_up_to,
    )
    correctness.add_argument("--decoys", type=int, default=2)

    return parser
