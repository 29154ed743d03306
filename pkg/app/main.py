import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from .cli.commands import dispatch
from .cli.parser import build_parser
from .core.config import FlagSettings, applied
from .core.errors import InvalidArgumentError, UsageError

logger = logging.getLogger(__name__)


def configure_logging(verbose: bool = False, defaults: Optional[FlagSettings] = None):
    """Diagnostics go to stderr; stdout carries only the command output"""
    defaults = defaults or FlagSettings()
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else defaults.log_level,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _one_line(error: Exception) -> str:
    if isinstance(error, ValidationError):
        first = error.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        return f"{location}: {first['msg']}" if location else first["msg"]
    return str(error).splitlines()[0] if str(error) else type(error).__name__


def main(argv: Optional[List[str]] = None) -> int:
    defaults = FlagSettings()
    parser = build_parser(defaults)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.verbose, defaults)
    try:
        with applied(defaults):
            result = dispatch(args)
    except (UsageError, InvalidArgumentError, ValidationError) as e:
        print(f"error: {_one_line(e)}", file=sys.stderr)
        return 2

    sys.stdout.write(result.output + "\n")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
