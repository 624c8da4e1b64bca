"""Exception hierarchy shared across the package."""


class TokenReplayError(Exception):
    """Base class for all errors raised by this package."""


class NotFound(TokenReplayError):
    """A place or transition identifier does not exist in the net."""


class NotEnabled(TokenReplayError):
    """Attempt to fire a transition that is not enabled."""


class ParseError(TokenReplayError):
    """Malformed input document (XML syntax, broken CSV header, ...)."""


class ValidationError(TokenReplayError):
    """Structurally well-formed input that violates model constraints."""


class ConfigError(TokenReplayError):
    """Invalid configuration (unknown column, unknown attribute, bad flag)."""


class RecordError(TokenReplayError):
    """A single malformed record inside an otherwise valid document."""


class NoTimestamps(TokenReplayError):
    """Duration requested for a case that carries no timestamps."""


class DegenerateReplay(TokenReplayError):
    """Replay produced zero consumed or produced tokens; fitness undefined."""


class EmptyLog(TokenReplayError):
    """Log-level operation invoked on a log without cases."""


class ContractViolation(TokenReplayError):
    """Internal accounting invariant broke; indicates a bug, not bad input."""


class BudgetExceeded(TokenReplayError):
    """Structural search ran out of budget. Carries partial results."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


class InsufficientData(TokenReplayError):
    """A diagnostic comparison group is empty or lacks timestamps."""


class SingleClass(TokenReplayError):
    """Root-cause analysis requested but only one class is present."""


class EmptyInput(TokenReplayError):
    """Training requested on an empty feature matrix."""


class SimulationStuck(TokenReplayError):
    """Random playout could not reach the final marking within its caps."""
