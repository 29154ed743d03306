from .commands import COMMANDS, CommandResult, dispatch
from .parser import build_parser
