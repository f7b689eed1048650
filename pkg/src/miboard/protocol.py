"""Wire protocol: tagged JSON messages and phase-legality validation.

One message per WebSocket text frame. The `t` field carries the tag;
commands also carry a client `seq` (monotonically increasing per
connection), server events echo the room's event sequence number.
Unknown tags are rejected, unknown fields are ignored so the two sides
can evolve independently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .errors import (
    AlreadyVoted, ChatClosed, ChatLimitReached, FieldTypeMismatch,
    MalformedJson, MissingField, NotYourTurn, UnknownTag, WrongPhase,
)
from .model import (
    BUY_CHANGE_STRATEGY, BUY_EXTRA_CARD, BUY_EXTRA_TURN, BUY_FREEZE,
    GameConfig, RoundState, Strategy, TurnPhase,
)

CHAT_MAX_CHARS = 500

STRATEGY_NAMES = tuple(s.value for s in Strategy)
PURCHASE_KINDS = (BUY_CHANGE_STRATEGY, BUY_EXTRA_TURN, BUY_FREEZE, BUY_EXTRA_CARD)


def _req(obj: dict, name: str, typ: type) -> Any:
    if name not in obj:
        raise MissingField(name)
    value = obj[name]
    if typ is int and isinstance(value, bool):
        raise FieldTypeMismatch(f"{name}: expected int, got bool")
    if not isinstance(value, typ):
        raise FieldTypeMismatch(f"{name}: expected {typ.__name__}, got {type(value).__name__}")
    return value


def _opt(obj: dict, name: str, typ: type) -> Any:
    if name not in obj or obj[name] is None:
        return None
    return _req(obj, name, typ)


# -- client commands ----------------------------------------------------------

@dataclass(frozen=True)
class CreateRoom:
    seq: int
    config: Optional[dict] = None
    tag = "create_room"

    def payload(self) -> dict:
        return {} if self.config is None else {"config": self.config}

    @staticmethod
    def from_obj(obj: dict) -> "CreateRoom":
        return CreateRoom(_req(obj, "seq", int), _opt(obj, "config", dict))


@dataclass(frozen=True)
class JoinRoom:
    seq: int
    room_id: str
    display_name: str
    tag = "join_room"

    def payload(self) -> dict:
        return {"room_id": self.room_id, "display_name": self.display_name}

    @staticmethod
    def from_obj(obj: dict) -> "JoinRoom":
        name = _req(obj, "display_name", str)
        if not 1 <= len(name) <= 80:
            raise FieldTypeMismatch("display_name: length must be 1..80")
        return JoinRoom(_req(obj, "seq", int), _req(obj, "room_id", str), name)


@dataclass(frozen=True)
class Ready:
    seq: int
    tag = "ready"

    def payload(self) -> dict:
        return {}

    @staticmethod
    def from_obj(obj: dict) -> "Ready":
        return Ready(_req(obj, "seq", int))


@dataclass(frozen=True)
class SubmitSelfExplanation:
    seq: int
    text: str
    tag = "submit_self_explanation"

    def payload(self) -> dict:
        return {"text": self.text}

    @staticmethod
    def from_obj(obj: dict) -> "SubmitSelfExplanation":
        return SubmitSelfExplanation(_req(obj, "seq", int), _req(obj, "text", str))


@dataclass(frozen=True)
class CastVote:
    seq: int
    strategy: str
    tag = "cast_vote"

    def payload(self) -> dict:
        return {"strategy": self.strategy}

    @staticmethod
    def from_obj(obj: dict) -> "CastVote":
        strategy = _req(obj, "strategy", str)
        if strategy not in STRATEGY_NAMES:
            raise FieldTypeMismatch(f"strategy: {strategy!r} is not a strategy name")
        return CastVote(_req(obj, "seq", int), strategy)


@dataclass(frozen=True)
class Chat:
    seq: int
    text: str
    tag = "chat"

    def payload(self) -> dict:
        return {"text": self.text}

    @staticmethod
    def from_obj(obj: dict) -> "Chat":
        text = _req(obj, "text", str)
        if not 1 <= len(text) <= CHAT_MAX_CHARS:
            raise FieldTypeMismatch(f"text: length must be 1..{CHAT_MAX_CHARS}")
        return Chat(_req(obj, "seq", int), text)


@dataclass(frozen=True)
class Purchase:
    seq: int
    buy_kind: str
    target: Optional[int] = None
    tag = "purchase"

    def payload(self) -> dict:
        obj: dict[str, Any] = {"kind": self.buy_kind}
        if self.target is not None:
            obj["target"] = self.target
        return obj

    @staticmethod
    def from_obj(obj: dict) -> "Purchase":
        buy_kind = _req(obj, "kind", str)
        if buy_kind not in PURCHASE_KINDS:
            raise FieldTypeMismatch(f"kind: {buy_kind!r} is not purchasable")
        return Purchase(_req(obj, "seq", int), buy_kind, _opt(obj, "target", int))


@dataclass(frozen=True)
class PlayCard:
    seq: int
    card_id: str
    target: Optional[int] = None
    tag = "play_card"

    def payload(self) -> dict:
        obj: dict[str, Any] = {"card_id": self.card_id}
        if self.target is not None:
            obj["target"] = self.target
        return obj

    @staticmethod
    def from_obj(obj: dict) -> "PlayCard":
        return PlayCard(_req(obj, "seq", int), _req(obj, "card_id", str), _opt(obj, "target", int))


@dataclass(frozen=True)
class Leave:
    seq: int
    tag = "leave"

    def payload(self) -> dict:
        return {}

    @staticmethod
    def from_obj(obj: dict) -> "Leave":
        return Leave(_req(obj, "seq", int))


ClientCommand = Union[
    CreateRoom, JoinRoom, Ready, SubmitSelfExplanation, CastVote, Chat,
    Purchase, PlayCard, Leave,
]


# -- server events ------------------------------------------------------------

@dataclass(frozen=True)
class RoomStateEvent:
    snapshot: dict
    seq: Optional[int] = None
    tag = "room_state"

    def payload(self) -> dict:
        return {"snapshot": self.snapshot}

    @staticmethod
    def from_obj(obj: dict) -> "RoomStateEvent":
        return RoomStateEvent(_req(obj, "snapshot", dict), _opt(obj, "seq", int))


@dataclass(frozen=True)
class PhaseChanged:
    phase: str
    countdown_seconds: Optional[int] = None
    deadline_epoch_ms: Optional[int] = None
    seq: Optional[int] = None
    tag = "phase_changed"

    def payload(self) -> dict:
        obj: dict[str, Any] = {"phase": self.phase}
        if self.countdown_seconds is not None:
            obj["countdown_seconds"] = self.countdown_seconds
        if self.deadline_epoch_ms is not None:
            obj["deadline_epoch_ms"] = self.deadline_epoch_ms
        return obj

    @staticmethod
    def from_obj(obj: dict) -> "PhaseChanged":
        return PhaseChanged(
            _req(obj, "phase", str), _opt(obj, "countdown_seconds", int),
            _opt(obj, "deadline_epoch_ms", int), _opt(obj, "seq", int),
        )


@dataclass(frozen=True)
class StrategyAssignedEvent:
    strategy: str
    seq: Optional[int] = None
    tag = "strategy_assigned"

    def payload(self) -> dict:
        return {"strategy": self.strategy}

    @staticmethod
    def from_obj(obj: dict) -> "StrategyAssignedEvent":
        return StrategyAssignedEvent(_req(obj, "strategy", str), _opt(obj, "seq", int))


@dataclass(frozen=True)
class ReaderBusy:
    reader_name: str
    seq: Optional[int] = None
    tag = "reader_busy"

    def payload(self) -> dict:
        return {"reader_name": self.reader_name}

    @staticmethod
    def from_obj(obj: dict) -> "ReaderBusy":
        return ReaderBusy(_req(obj, "reader_name", str), _opt(obj, "seq", int))


@dataclass(frozen=True)
class SelfExplanationPosted:
    seat: int
    text: str
    seq: Optional[int] = None
    tag = "self_explanation_posted"

    def payload(self) -> dict:
        return {"seat": self.seat, "text": self.text}

    @staticmethod
    def from_obj(obj: dict) -> "SelfExplanationPosted":
        return SelfExplanationPosted(_req(obj, "seat", int), _req(obj, "text", str), _opt(obj, "seq", int))


@dataclass(frozen=True)
class VotesRevealed:
    votes: dict  # seat (string key) -> strategy name or None
    assigned: str
    ballot: str  # "initial" | "revote"
    seq: Optional[int] = None
    tag = "votes_revealed"

    def payload(self) -> dict:
        return {"votes": self.votes, "assigned": self.assigned, "ballot": self.ballot}

    @staticmethod
    def from_obj(obj: dict) -> "VotesRevealed":
        return VotesRevealed(
            _req(obj, "votes", dict), _req(obj, "assigned", str),
            _req(obj, "ballot", str), _opt(obj, "seq", int),
        )


@dataclass(frozen=True)
class DebateStarted:
    seconds_remaining: int
    messages_remaining: dict  # seat (string key) -> remaining count
    seq: Optional[int] = None
    tag = "debate_started"

    def payload(self) -> dict:
        return {
            "seconds_remaining": self.seconds_remaining,
            "messages_remaining": self.messages_remaining,
        }

    @staticmethod
    def from_obj(obj: dict) -> "DebateStarted":
        return DebateStarted(
            _req(obj, "seconds_remaining", int),
            _req(obj, "messages_remaining", dict), _opt(obj, "seq", int),
        )


@dataclass(frozen=True)
class ChatPosted:
    seat: int
    text: str
    messages_remaining: int
    seq: Optional[int] = None
    tag = "chat_posted"

    def payload(self) -> dict:
        return {
            "seat": self.seat, "text": self.text,
            "messages_remaining": self.messages_remaining,
        }

    @staticmethod
    def from_obj(obj: dict) -> "ChatPosted":
        return ChatPosted(
            _req(obj, "seat", int), _req(obj, "text", str),
            _req(obj, "messages_remaining", int), _opt(obj, "seq", int),
        )


@dataclass(frozen=True)
class ChatRejected:
    reason: str
    seq: Optional[int] = None
    tag = "chat_rejected"

    def payload(self) -> dict:
        return {"reason": self.reason}

    @staticmethod
    def from_obj(obj: dict) -> "ChatRejected":
        return ChatRejected(_req(obj, "reason", str), _opt(obj, "seq", int))


@dataclass(frozen=True)
class TurnResolved:
    outcome: dict  # {"result": "majority"|"no_majority"|"forfeit", counts...}
    points_awarded: dict = field(default_factory=dict)  # seat (string key) -> delta
    dice: Optional[list] = None
    movement: Optional[dict] = None  # {"seat", "from", "to"}
    seq: Optional[int] = None
    tag = "turn_resolved"

    def payload(self) -> dict:
        obj: dict[str, Any] = {"outcome": self.outcome, "points_awarded": self.points_awarded}
        if self.dice is not None:
            obj["dice"] = self.dice
        if self.movement is not None:
            obj["movement"] = self.movement
        return obj

    @staticmethod
    def from_obj(obj: dict) -> "TurnResolved":
        return TurnResolved(
            _req(obj, "outcome", dict), _req(obj, "points_awarded", dict),
            _opt(obj, "dice", list), _opt(obj, "movement", dict), _opt(obj, "seq", int),
        )


@dataclass(frozen=True)
class CardDrawn:
    seat: int
    card: dict  # full card, or {"kind": "hidden"} for non-holders
    movement: Optional[dict] = None  # move cards: {"seat", "from", "to"}
    seq: Optional[int] = None
    tag = "card_drawn"

    def payload(self) -> dict:
        obj: dict[str, Any] = {"seat": self.seat, "card": self.card}
        if self.movement is not None:
            obj["movement"] = self.movement
        return obj

    @staticmethod
    def from_obj(obj: dict) -> "CardDrawn":
        return CardDrawn(
            _req(obj, "seat", int), _req(obj, "card", dict),
            _opt(obj, "movement", dict), _opt(obj, "seq", int),
        )


@dataclass(frozen=True)
class GameOverEvent:
    standings: list
    seq: Optional[int] = None
    tag = "game_over"

    def payload(self) -> dict:
        return {"standings": self.standings}

    @staticmethod
    def from_obj(obj: dict) -> "GameOverEvent":
        return GameOverEvent(_req(obj, "standings", list), _opt(obj, "seq", int))


@dataclass(frozen=True)
class ErrorEvent:
    code: str
    detail: str = ""
    seq: Optional[int] = None
    tag = "error"

    def payload(self) -> dict:
        return {"code": self.code, "detail": self.detail}

    @staticmethod
    def from_obj(obj: dict) -> "ErrorEvent":
        return ErrorEvent(_req(obj, "code", str), _req(obj, "detail", str), _opt(obj, "seq", int))


ServerEvent = Union[
    RoomStateEvent, PhaseChanged, StrategyAssignedEvent, ReaderBusy,
    SelfExplanationPosted, VotesRevealed, DebateStarted, ChatPosted,
    ChatRejected, TurnResolved, CardDrawn, GameOverEvent, ErrorEvent,
]

_COMMAND_TYPES = (
    CreateRoom, JoinRoom, Ready, SubmitSelfExplanation, CastVote, Chat,
    Purchase, PlayCard, Leave,
)
_EVENT_TYPES = (
    RoomStateEvent, PhaseChanged, StrategyAssignedEvent, ReaderBusy,
    SelfExplanationPosted, VotesRevealed, DebateStarted, ChatPosted,
    ChatRejected, TurnResolved, CardDrawn, GameOverEvent, ErrorEvent,
)
_DECODERS = {cls.tag: cls.from_obj for cls in _COMMAND_TYPES + _EVENT_TYPES}


def encode(message: Union[ClientCommand, ServerEvent]) -> bytes:
    obj: dict[str, Any] = {"t": message.tag}
    seq = getattr(message, "seq", None)
    if seq is not None:
        obj["seq"] = seq
    obj.update(message.payload())
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def decode(data: Union[bytes, str]) -> Union[ClientCommand, ServerEvent]:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedJson(str(exc)) from exc
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedJson(str(exc)) from exc
    if not isinstance(obj, dict):
        raise MalformedJson("frame is not a JSON object")
    tag = obj.get("t")
    if not isinstance(tag, str):
        raise MissingField("t")
    decoder = _DECODERS.get(tag)
    if decoder is None:
        raise UnknownTag(tag)
    return decoder(obj)


def is_command(message: Any) -> bool:
    return isinstance(message, _COMMAND_TYPES)


# -- phase legality -----------------------------------------------------------

# Resting phases in which point/card purchases may be made.
PURCHASE_PHASES = (
    TurnPhase.STRATEGY_ASSIGNED, TurnPhase.SELF_EXPLAINING,
    TurnPhase.VOTING, TurnPhase.DEBATING, TurnPhase.REVOTING,
)


def validate_for_phase(
    command: ClientCommand,
    phase: TurnPhase,
    seat: int,
    round_state: Optional[RoundState],
    config: GameConfig,
) -> None:
    """Raise a ProtocolError/RulesError if `command` is illegal right now.

    Mirrors the reducer's own gating so clients can be rejected before
    anything is logged; the reducer remains authoritative.
    """
    if isinstance(command, (CreateRoom, JoinRoom)):
        raise WrongPhase(f"{command.tag} is not valid inside a running game")
    if isinstance(command, Leave):
        return
    if round_state is None:
        raise WrongPhase("game is not in a round")
    reader = round_state.reader_seat

    if isinstance(command, Ready):
        if phase == TurnPhase.STRATEGY_ASSIGNED:
            if seat != reader:
                raise NotYourTurn("only the reader acknowledges the assignment")
            return
        if phase == TurnPhase.DEBATING:
            if seat == reader:
                raise NotYourTurn("only voters pass the debate")
            return
        raise WrongPhase(f"ready has no meaning in {phase.value}")

    if isinstance(command, SubmitSelfExplanation):
        if phase != TurnPhase.SELF_EXPLAINING:
            raise WrongPhase(f"cannot submit in {phase.value}")
        if seat != reader:
            raise NotYourTurn("only the reader submits the self-explanation")
        return

    if isinstance(command, CastVote):
        if phase not in (TurnPhase.VOTING, TurnPhase.REVOTING):
            raise WrongPhase(f"no ballot open in {phase.value}")
        if seat == reader:
            raise NotYourTurn("the reader does not vote on their own self-explanation")
        ballot = round_state.votes if phase == TurnPhase.VOTING else round_state.revotes
        if ballot.get(seat) is not None:
            raise AlreadyVoted("one vote per ballot")
        return

    if isinstance(command, Chat):
        if phase != TurnPhase.DEBATING:
            raise ChatClosed("chat opens during the debate")
        if round_state.debate_messages_used.get(seat, 0) >= config.debate_max_messages:
            raise ChatLimitReached(f"limit is {config.debate_max_messages} messages per debate")
        return

    if isinstance(command, (Purchase, PlayCard)):
        if phase not in PURCHASE_PHASES:
            raise WrongPhase(f"cannot spend during {phase.value}")
        if isinstance(command, Purchase) and command.buy_kind == BUY_CHANGE_STRATEGY:
            if seat != reader:
                raise NotYourTurn("only the reader may change the assigned strategy")
            if phase not in (TurnPhase.STRATEGY_ASSIGNED, TurnPhase.SELF_EXPLAINING):
                raise WrongPhase("strategy can only be changed before submission")
        return

    raise WrongPhase(f"unhandled command {command.tag}")
