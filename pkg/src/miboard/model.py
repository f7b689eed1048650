"""Domain types for the game state, plus canonical serialization.

Canonical form: every state object maps to plain JSON types, dumped with
sorted keys, compact separators, and raw UTF-8. `state_hash` is the
sha256 hex digest of that encoding and is the replay-equivalence check.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from .errors import BadConfig


class Strategy(Enum):
    COMPREHENSION_MONITORING = "ComprehensionMonitoring"
    PARAPHRASING = "Paraphrasing"
    PREDICTION = "Prediction"
    ELABORATION = "Elaboration"
    BRIDGING = "Bridging"


ALL_STRATEGIES: tuple[Strategy, ...] = (
    Strategy.COMPREHENSION_MONITORING,
    Strategy.PARAPHRASING,
    Strategy.PREDICTION,
    Strategy.ELABORATION,
    Strategy.BRIDGING,
)


class TurnPhase(Enum):
    LOBBY = "Lobby"
    STRATEGY_ASSIGNED = "StrategyAssigned"
    SELF_EXPLAINING = "SelfExplaining"
    VOTING = "Voting"
    REVEAL = "Reveal"
    DEBATING = "Debating"
    REVOTING = "Revoting"
    RESOLVING = "Resolving"
    CARD_DRAW = "CardDraw"
    GAME_OVER = "GameOver"


# Card kinds. Move cards resolve immediately; the others are held powers.
CARD_MOVE = "move"
CARD_EXTRA_TURN = "extra_turn"
CARD_FREEZE = "freeze"
CARD_EXTRA_CARD = "extra_card"
POWER_KINDS = (CARD_EXTRA_TURN, CARD_FREEZE, CARD_EXTRA_CARD)

# Purchasable effects (purchase command `kind` values).
BUY_CHANGE_STRATEGY = "change_strategy"
BUY_EXTRA_TURN = "extra_turn"
BUY_FREEZE = "freeze"
BUY_EXTRA_CARD = "extra_card"

TIMER_SELF_EXPLAIN = "self_explain"
TIMER_VOTE = "vote"
TIMER_DEBATE = "debate"


@dataclass(frozen=True)
class EventCard:
    card_id: str
    kind: str
    delta: Optional[int] = None  # move cards only

    def to_json_obj(self) -> dict:
        obj: dict[str, Any] = {"card_id": self.card_id, "kind": self.kind}
        if self.kind == CARD_MOVE:
            obj["delta"] = self.delta
        return obj

    @staticmethod
    def from_json_obj(obj: dict) -> "EventCard":
        return EventCard(obj["card_id"], obj["kind"], obj.get("delta"))


@dataclass
class PlayerState:
    player_id: str
    seat: int
    points: int = 0
    board_position: int = 0
    previous_assigned_strategy: Optional[Strategy] = None
    frozen_turns: int = 0
    connected: bool = True
    hand: list[EventCard] = field(default_factory=list)

    def clone(self) -> "PlayerState":
        return PlayerState(
            self.player_id, self.seat, self.points, self.board_position,
            self.previous_assigned_strategy, self.frozen_turns,
            self.connected, list(self.hand),
        )

    def to_json_obj(self) -> dict:
        prev = self.previous_assigned_strategy
        return {
            "player_id": self.player_id,
            "seat": self.seat,
            "points": self.points,
            "board_position": self.board_position,
            "previous_assigned_strategy": prev.value if prev else None,
            "frozen_turns": self.frozen_turns,
            "connected": self.connected,
            "hand": [c.to_json_obj() for c in self.hand],
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "PlayerState":
        prev = obj.get("previous_assigned_strategy")
        return PlayerState(
            player_id=obj["player_id"],
            seat=obj["seat"],
            points=obj["points"],
            board_position=obj["board_position"],
            previous_assigned_strategy=Strategy(prev) if prev else None,
            frozen_turns=obj["frozen_turns"],
            connected=obj["connected"],
            hand=[EventCard.from_json_obj(c) for c in obj["hand"]],
        )


@dataclass
class RoundState:
    reader_seat: int
    assigned_strategy: Strategy
    target_sentence_index: int
    self_explanation: Optional[str] = None
    # Ballots map every non-reader seat to its vote; None = not cast /
    # abstained. `revotes` stays empty until the Revoting ballot opens.
    votes: dict[int, Optional[Strategy]] = field(default_factory=dict)
    revotes: dict[int, Optional[Strategy]] = field(default_factory=dict)
    debate_messages_used: dict[int, int] = field(default_factory=dict)
    debate_open: bool = False
    debate_passed: set[int] = field(default_factory=set)
    is_extra_turn: bool = False

    def clone(self) -> "RoundState":
        return RoundState(
            self.reader_seat, self.assigned_strategy, self.target_sentence_index,
            self.self_explanation, dict(self.votes), dict(self.revotes),
            dict(self.debate_messages_used), self.debate_open,
            set(self.debate_passed), self.is_extra_turn,
        )

    def to_json_obj(self) -> dict:
        enc = lambda b: {str(s): (v.value if v else None) for s, v in sorted(b.items())}
        return {
            "reader_seat": self.reader_seat,
            "assigned_strategy": self.assigned_strategy.value,
            "target_sentence_index": self.target_sentence_index,
            "self_explanation": self.self_explanation,
            "votes": enc(self.votes),
            "revotes": enc(self.revotes),
            "debate_messages_used": {str(s): n for s, n in sorted(self.debate_messages_used.items())},
            "debate_open": self.debate_open,
            "debate_passed": sorted(self.debate_passed),
            "is_extra_turn": self.is_extra_turn,
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "RoundState":
        dec = lambda b: {int(s): (Strategy(v) if v else None) for s, v in b.items()}
        return RoundState(
            reader_seat=obj["reader_seat"],
            assigned_strategy=Strategy(obj["assigned_strategy"]),
            target_sentence_index=obj["target_sentence_index"],
            self_explanation=obj["self_explanation"],
            votes=dec(obj["votes"]),
            revotes=dec(obj["revotes"]),
            debate_messages_used={int(s): n for s, n in obj["debate_messages_used"].items()},
            debate_open=obj["debate_open"],
            debate_passed=set(obj["debate_passed"]),
            is_extra_turn=obj["is_extra_turn"],
        )


DEFAULT_DECK_SPEC: tuple[dict, ...] = tuple(
    [{"kind": CARD_MOVE, "delta": d} for d in (1, 1, 2, 2, 3, -1, -1, -2)]
    + [{"kind": CARD_EXTRA_TURN}] * 4
    + [{"kind": CARD_FREEZE}] * 4
    + [{"kind": CARD_EXTRA_CARD}] * 4
)


@dataclass(frozen=True)
class GameConfig:
    points_reader_on_majority: int = 3
    points_voter_on_match: int = 1
    cost_change_strategy: int = 2
    cost_extra_turn: int = 5
    cost_freeze: int = 4
    cost_extra_card: int = 3
    debate_seconds: int = 180
    debate_max_messages: int = 3
    vote_seconds: int = 60
    self_explain_seconds: int = 300
    max_rounds: int = 40
    dice_faces: int = 6
    deck_spec: tuple[dict, ...] = DEFAULT_DECK_SPEC

    def validate(self) -> None:
        positive = (
            "points_reader_on_majority", "points_voter_on_match",
            "cost_change_strategy", "cost_extra_turn", "cost_freeze",
            "cost_extra_card", "debate_seconds", "debate_max_messages",
            "vote_seconds", "self_explain_seconds", "max_rounds", "dice_faces",
        )
        for name in positive:
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise BadConfig(f"{name} must be a positive integer, got {v!r}")
        for i, spec in enumerate(self.deck_spec):
            kind = spec.get("kind")
            if kind == CARD_MOVE:
                if not isinstance(spec.get("delta"), int):
                    raise BadConfig(f"deck_spec[{i}]: move card needs an integer delta")
            elif kind not in POWER_KINDS:
                raise BadConfig(f"deck_spec[{i}]: unknown card kind {kind!r}")

    def cost_of(self, buy_kind: str) -> int:
        return {
            BUY_CHANGE_STRATEGY: self.cost_change_strategy,
            BUY_EXTRA_TURN: self.cost_extra_turn,
            BUY_FREEZE: self.cost_freeze,
            BUY_EXTRA_CARD: self.cost_extra_card,
        }[buy_kind]

    def build_deck(self) -> list[EventCard]:
        return [
            EventCard(f"c{i:02d}", spec["kind"], spec.get("delta"))
            for i, spec in enumerate(self.deck_spec)
        ]

    def to_json_obj(self) -> dict:
        obj = {
            name: getattr(self, name)
            for name in (
                "points_reader_on_majority", "points_voter_on_match",
                "cost_change_strategy", "cost_extra_turn", "cost_freeze",
                "cost_extra_card", "debate_seconds", "debate_max_messages",
                "vote_seconds", "self_explain_seconds", "max_rounds", "dice_faces",
            )
        }
        obj["deck_spec"] = [dict(s) for s in self.deck_spec]
        return obj

    @staticmethod
    def from_json_obj(obj: dict) -> "GameConfig":
        kwargs = dict(obj)
        if "deck_spec" in kwargs:
            kwargs["deck_spec"] = tuple(dict(s) for s in kwargs["deck_spec"])
        unknown = set(kwargs) - set(GameConfig.__dataclass_fields__)
        if unknown:
            raise BadConfig(f"unknown config fields: {sorted(unknown)}")
        cfg = GameConfig(**kwargs)
        cfg.validate()
        return cfg


@dataclass
class CorpusRef:
    """What the reducer needs from a corpus: identity and target slots."""

    checksum: str
    target_indices: list[int]
    cursor: int = 0  # number of targets consumed so far

    def exhausted(self) -> bool:
        return self.cursor >= len(self.target_indices)

    def clone(self) -> "CorpusRef":
        return CorpusRef(self.checksum, list(self.target_indices), self.cursor)

    def to_json_obj(self) -> dict:
        return {
            "checksum": self.checksum,
            "target_indices": list(self.target_indices),
            "cursor": self.cursor,
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "CorpusRef":
        return CorpusRef(obj["checksum"], list(obj["target_indices"]), obj["cursor"])


@dataclass
class GameState:
    config: GameConfig
    players: list[PlayerState]
    phase: TurnPhase
    round: Optional[RoundState]
    corpus_ref: CorpusRef
    event_deck: list[EventCard]
    discard_pile: list[EventCard]
    rng_state: int
    round_number: int = 1
    pending_extra_turn_for: Optional[int] = None

    def seat_count(self) -> int:
        return len(self.players)

    def player(self, seat: int) -> PlayerState:
        return self.players[seat]

    def non_reader_seats(self) -> list[int]:
        assert self.round is not None
        return [p.seat for p in self.players if p.seat != self.round.reader_seat]

    def clone(self) -> "GameState":
        return GameState(
            config=self.config,  # frozen, shared
            players=[p.clone() for p in self.players],
            phase=self.phase,
            round=self.round.clone() if self.round else None,
            corpus_ref=self.corpus_ref.clone(),
            event_deck=list(self.event_deck),
            discard_pile=list(self.discard_pile),
            rng_state=self.rng_state,
            round_number=self.round_number,
            pending_extra_turn_for=self.pending_extra_turn_for,
        )

    def to_json_obj(self) -> dict:
        return {
            "config": self.config.to_json_obj(),
            "players": [p.to_json_obj() for p in self.players],
            "phase": self.phase.value,
            "round": self.round.to_json_obj() if self.round else None,
            "corpus_ref": self.corpus_ref.to_json_obj(),
            "event_deck": [c.to_json_obj() for c in self.event_deck],
            "discard_pile": [c.to_json_obj() for c in self.discard_pile],
            "rng_state": self.rng_state,
            "round_number": self.round_number,
            "pending_extra_turn_for": self.pending_extra_turn_for,
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "GameState":
        return GameState(
            config=GameConfig.from_json_obj(obj["config"]),
            players=[PlayerState.from_json_obj(p) for p in obj["players"]],
            phase=TurnPhase(obj["phase"]),
            round=RoundState.from_json_obj(obj["round"]) if obj["round"] else None,
            corpus_ref=CorpusRef.from_json_obj(obj["corpus_ref"]),
            event_deck=[EventCard.from_json_obj(c) for c in obj["event_deck"]],
            discard_pile=[EventCard.from_json_obj(c) for c in obj["discard_pile"]],
            rng_state=obj["rng_state"],
            round_number=obj["round_number"],
            pending_extra_turn_for=obj["pending_extra_turn_for"],
        )


@dataclass(frozen=True)
class VoteOutcome:
    matched_count: int
    eligible_count: int
    majority_matched: bool


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_state_json(state: GameState) -> str:
    return canonical_json(state.to_json_obj())


def state_hash(state: GameState) -> str:
    return hashlib.sha256(canonical_state_json(state).encode("utf-8")).hexdigest()
