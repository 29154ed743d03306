class QpcError(Exception):
    """Base class for simulator errors"""


class InvalidArgumentError(QpcError, ValueError):
    """An operation was called outside its preconditions"""


class UsageError(QpcError):
    """Malformed command-line input (flags, secrets, unitary files)"""
