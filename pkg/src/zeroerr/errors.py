"""Exception hierarchy shared by every module.

The CLI maps the three top-level families onto exit codes:
``ParseError`` -> 2, ``DomainFailure`` -> 3, ``BudgetExhausted`` -> 4.
"""


class ZeroErrError(Exception):
    """Base class for all toolkit errors."""


class ParseError(ZeroErrError, ValueError):
    """Malformed input file or literal."""


class DomainFailure(ZeroErrError):
    """An input is well-formed but violates a mathematical precondition."""


class BudgetExhausted(ZeroErrError):
    """A bounded search or refinement ran out of its step budget."""

    def __init__(self, message: str, used: int = 0):
        super().__init__(message)
        self.used = used


# channel-core
class ChannelError(DomainFailure, ValueError):
    pass


class NonStochastic(ChannelError):
    pass


class NegativeEntry(ChannelError):
    pass


class AlphabetOverlap(ChannelError):
    pass


class DimensionMismatch(ChannelError):
    pass


class EmptyMessageSet(DomainFailure, ValueError):
    pass


# code-index
class InvalidCode(DomainFailure, ValueError):
    pass


# graph-capacity
class TooLarge(DomainFailure):
    pass


class TableIncomplete(DomainFailure):
    pass


# bss-core
class ArityMismatch(DomainFailure, TypeError):
    pass


class BSSDomainError(DomainFailure):
    """The program is undefined at the given argument."""


class Diverged(BudgetExhausted):
    pass


# decide
class PrecisionExhausted(BudgetExhausted):
    pass


# rse-sim
class ConfigInvalid(DomainFailure, ValueError):
    pass


class DecodingAmbiguity(DomainFailure):
    pass


class NotFound(DomainFailure):
    pass
