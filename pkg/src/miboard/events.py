"""Reducer inputs (game events) and outputs (effects).

Game events are the only thing the reducer consumes and the only thing
the event log stores, so they have a stable JSON form. Effects are pure
descriptions the caller executes; they never touch I/O themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Union

from .errors import CorruptLog
from .model import Strategy


@dataclass(frozen=True)
class ReadyEvent:
    """Reader's assignment ack in StrategyAssigned; a voter's pass in Debating."""

    seat: int
    kind = "ready"


@dataclass(frozen=True)
class SubmitSelfExplanationEvent:
    seat: int
    text: str
    kind = "submit_self_explanation"


@dataclass(frozen=True)
class CastVoteEvent:
    seat: int
    strategy: Strategy
    kind = "cast_vote"


@dataclass(frozen=True)
class ChatEvent:
    seat: int
    text: str
    kind = "chat"


@dataclass(frozen=True)
class PurchaseEvent:
    seat: int
    buy_kind: str  # change_strategy | extra_turn | freeze | extra_card
    target_seat: Optional[int] = None
    kind = "purchase"


@dataclass(frozen=True)
class PlayCardEvent:
    seat: int
    card_id: str
    target_seat: Optional[int] = None
    kind = "play_card"


@dataclass(frozen=True)
class TimerFiredEvent:
    timer_kind: str  # self_explain | vote | debate
    kind = "timer_fired"


@dataclass(frozen=True)
class DisconnectEvent:
    seat: int
    kind = "disconnect"


@dataclass(frozen=True)
class ReconnectEvent:
    seat: int
    kind = "reconnect"


GameEvent = Union[
    ReadyEvent, SubmitSelfExplanationEvent, CastVoteEvent, ChatEvent,
    PurchaseEvent, PlayCardEvent, TimerFiredEvent, DisconnectEvent,
    ReconnectEvent,
]


def event_to_json_obj(event: GameEvent) -> dict:
    if isinstance(event, ReadyEvent):
        return {"kind": event.kind, "seat": event.seat}
    if isinstance(event, SubmitSelfExplanationEvent):
        return {"kind": event.kind, "seat": event.seat, "text": event.text}
    if isinstance(event, CastVoteEvent):
        return {"kind": event.kind, "seat": event.seat, "strategy": event.strategy.value}
    if isinstance(event, ChatEvent):
        return {"kind": event.kind, "seat": event.seat, "text": event.text}
    if isinstance(event, PurchaseEvent):
        obj = {"kind": event.kind, "seat": event.seat, "buy_kind": event.buy_kind}
        if event.target_seat is not None:
            obj["target_seat"] = event.target_seat
        return obj
    if isinstance(event, PlayCardEvent):
        obj = {"kind": event.kind, "seat": event.seat, "card_id": event.card_id}
        if event.target_seat is not None:
            obj["target_seat"] = event.target_seat
        return obj
    if isinstance(event, TimerFiredEvent):
        return {"kind": event.kind, "timer_kind": event.timer_kind}
    if isinstance(event, (DisconnectEvent, ReconnectEvent)):
        return {"kind": event.kind, "seat": event.seat}
    raise TypeError(f"not a game event: {event!r}")


def event_from_json_obj(obj: dict) -> GameEvent:
    try:
        kind = obj["kind"]
        if kind == "ready":
            return ReadyEvent(obj["seat"])
        if kind == "submit_self_explanation":
            return SubmitSelfExplanationEvent(obj["seat"], obj["text"])
        if kind == "cast_vote":
            return CastVoteEvent(obj["seat"], Strategy(obj["strategy"]))
        if kind == "chat":
            return ChatEvent(obj["seat"], obj["text"])
        if kind == "purchase":
            return PurchaseEvent(obj["seat"], obj["buy_kind"], obj.get("target_seat"))
        if kind == "play_card":
            return PlayCardEvent(obj["seat"], obj["card_id"], obj.get("target_seat"))
        if kind == "timer_fired":
            return TimerFiredEvent(obj["timer_kind"])
        if kind == "disconnect":
            return DisconnectEvent(obj["seat"])
        if kind == "reconnect":
            return ReconnectEvent(obj["seat"])
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptLog(f"bad event record: {exc}") from exc
    raise CorruptLog(f"unknown event kind {kind!r}")


def event_actor(event: GameEvent) -> str:
    """Actor tag for log records: seat:N, timer, or system."""
    if isinstance(event, TimerFiredEvent):
        return "timer"
    if isinstance(event, (DisconnectEvent, ReconnectEvent)):
        return "system"
    return f"seat:{event.seat}"


# -- effects -----------------------------------------------------------------

@dataclass(frozen=True)
class Broadcast:
    """Deliver `payload` (a protocol server event) to every seat."""

    payload: Any


@dataclass(frozen=True)
class SendTo:
    seat: int
    payload: Any


@dataclass(frozen=True)
class ArmTimer:
    timer_kind: str
    seconds: int


@dataclass(frozen=True)
class CancelTimer:
    timer_kind: str


@dataclass(frozen=True)
class GameEnded:
    standings: list


Effect = Union[Broadcast, SendTo, ArmTimer, CancelTimer, GameEnded]
