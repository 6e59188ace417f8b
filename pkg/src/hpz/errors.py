"""Exception hierarchy shared by every hpz module.

Each class carries the process exit code the command-line front end uses
for it. Code 2 is left to argument-parsing errors.
"""


class HPZError(Exception):
    """Base class for all errors raised by hpz."""

    exit_code = 10


class DimensionMismatch(HPZError, ValueError):
    exit_code = 11


class NonIntegerExponent(HPZError, ValueError):
    exit_code = 12


class NegativeExponent(HPZError, ValueError):
    exit_code = 13


class BudgetExceeded(HPZError, RuntimeError):
    exit_code = 14


class AllModesEmpty(HPZError, RuntimeError):
    exit_code = 15


class NoModeContains(HPZError, RuntimeError):
    exit_code = 16


class EmptyCloud(HPZError, ValueError):
    exit_code = 17


class ParseError(HPZError, ValueError):
    exit_code = 18


class SchemaError(HPZError, ValueError):
    exit_code = 19


class ContainmentFailure(HPZError, RuntimeError):
    """A simulated trajectory left the computed reachable sets."""

    exit_code = 20


class OpsCheckFailure(HPZError, RuntimeError):
    """The randomized operation suite reported a failing operation."""

    exit_code = 21


class OutputError(HPZError, OSError):
    """An output artifact could not be written."""

    exit_code = 22
