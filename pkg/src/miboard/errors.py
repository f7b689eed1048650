"""Typed errors with stable string codes shared across the stack.

The codes travel on the wire in Error/ChatRejected payloads and in CLI
diagnostics, so they are part of the external contract: never rename.
"""

from __future__ import annotations


class MiBoardError(Exception):
    """Base error. `code` is a stable machine-readable identifier."""

    code = "Internal"

    def __init__(self, detail: str = ""):
        self.detail = detail
        super().__init__(f"{self.code}: {detail}" if detail else self.code)


# -- rules engine ------------------------------------------------------------

class RulesError(MiBoardError):
    """An event the reducer refuses; state is left untouched."""


class WrongPhase(RulesError):
    code = "WrongPhase"


class NotYourTurn(RulesError):
    code = "NotYourTurn"


class UnknownSeat(RulesError):
    code = "UnknownSeat"


class IllegalPayload(RulesError):
    code = "IllegalPayload"


class GameAlreadyOver(RulesError):
    code = "GameAlreadyOver"


class AlreadyVoted(RulesError):
    code = "AlreadyVoted"


class ChatClosed(RulesError):
    code = "ChatClosed"


class ChatLimitReached(RulesError):
    code = "ChatLimitReached"


class InsufficientPoints(RulesError):
    code = "InsufficientPoints"


class CannotFreezeSelf(RulesError):
    code = "CannotFreezeSelf"


class UnknownTarget(RulesError):
    code = "UnknownTarget"


class InvalidPlayerCount(RulesError):
    code = "InvalidPlayerCount"


class EmptyCorpus(RulesError):
    code = "EmptyCorpus"


class BadConfig(RulesError):
    code = "BadConfig"


class DeckAndDiscardEmpty(RulesError):
    code = "DeckAndDiscardEmpty"


class RoomFull(MiBoardError):
    code = "RoomFull"


class GameAlreadyStarted(MiBoardError):
    code = "GameAlreadyStarted"


# -- wire codec --------------------------------------------------------------

class ProtocolError(MiBoardError):
    """A frame that cannot be decoded or is illegal for the phase."""


class MalformedJson(ProtocolError):
    code = "MalformedJson"


class UnknownTag(ProtocolError):
    code = "UnknownTag"


class MissingField(ProtocolError):
    code = "MissingField"


class FieldTypeMismatch(ProtocolError):
    code = "FieldTypeMismatch"


# -- corpus loader -----------------------------------------------------------

class CorpusError(MiBoardError):
    pass


class ParseError(CorpusError):
    code = "ParseError"


class NoTargetSentences(CorpusError):
    code = "NoTargetSentences"


class EmptySentence(CorpusError):
    code = "EmptySentence"


class DuplicateIndex(CorpusError):
    code = "DuplicateIndex"


# -- event log / replay ------------------------------------------------------

class LogError(MiBoardError):
    pass


class CorpusMismatch(LogError):
    code = "CorpusMismatch"


class CorruptLog(LogError):
    code = "CorruptLog"


class DivergentReplay(LogError):
    code = "DivergentReplay"
