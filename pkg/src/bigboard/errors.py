"""Exception types shared across the board engines, server, and CLI."""

from __future__ import annotations


class BigBoardError(Exception):
    """Base class for all errors raised by this package."""


class TopologyError(BigBoardError):
    """A topology document failed to parse or violated a model invariant."""


class QueryError(BigBoardError):
    """A query expression failed to parse.

    ``position`` is the zero-based character offset of the offending token.
    """

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at {position})")
        self.position = position


class CommandRejected(BigBoardError):
    """A command was refused by the board state machine.

    Rejections are normal outcomes: the server journals them and replies
    with a rejection record rather than crashing the connection.
    ``reason_code`` is the stable machine-readable prefix ("validation"
    or "authorization").
    """

    reason_code = "validation"

    @property
    def reason(self) -> str:
        return f"{self.reason_code}: {self}"


class ValidationError(CommandRejected):
    """Payload or engine precondition failure (unknown id, bad range, ...)."""

    reason_code = "validation"


class TransitionError(ValidationError):
    """An alert was asked to make an illegal lifecycle transition."""


class AuthorizationError(CommandRejected):
    """The issuer's role does not permit this command kind."""

    reason_code = "authorization"


class JournalCorruption(BigBoardError):
    """The command journal is damaged before its final record."""


class StaleSubscription(BigBoardError):
    """The requested delta range is older than journal retention.

    Clients receiving this must discard their copy and re-checkout.
    """


class DeltaGapError(BigBoardError):
    """A client observed a non-contiguous delta sequence and must re-checkout."""


class ReplicaDivergence(BigBoardError):
    """A replica's digest stopped matching the server's after a delta.

    This means the replica's copy of the state machine disagrees with the
    authoritative one; the only safe recovery is a fresh checkout.
    """


class ConfigError(BigBoardError):
    """Server configuration file or environment override is invalid."""
