"""Room core: the transport-free heart of a running game.

One RoomCore owns one game. It turns decoded client commands and timer
expiries into reducer events, appends every accepted event to the log
*before* any effect leaves the room (write-ahead), and hands the caller
concrete deliveries (who gets which server event) plus timer arm/cancel
requests. The live WebSocket server and the in-process bot simulator
both drive games exclusively through this class, which is what makes
the two paths equivalent.

Event log: JSON lines. First line is the header (seed, config, full
corpus + checksum, player ids); every other line is one record
{seq, wall_clock_ms, actor, event, state_hash} where state_hash is the
canonical hash *after* applying the event. Replay re-reduces the whole
file and verifies every hash.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Callable, Optional, TextIO, Union

from . import engine, protocol
from .corpus import TextCorpus, corpus_from_json_obj
from .errors import (
    CorruptLog, CorpusMismatch, DivergentReplay, MiBoardError, ProtocolError,
    RulesError,
)
from .events import (
    ArmTimer, Broadcast, CancelTimer, CastVoteEvent, ChatEvent,
    DisconnectEvent, GameEnded, GameEvent, PlayCardEvent, PurchaseEvent,
    ReadyEvent, ReconnectEvent, SendTo, SubmitSelfExplanationEvent,
    TimerFiredEvent, event_actor, event_from_json_obj, event_to_json_obj,
)
from .model import GameConfig, GameState, Strategy, TurnPhase, state_hash

LOG_FORMAT_VERSION = 1


# -- event log ----------------------------------------------------------------

@dataclass(frozen=True)
class LogRecord:
    seq: int
    wall_clock_ms: int
    actor: str
    event: GameEvent
    state_hash: str

    def to_json_obj(self) -> dict:
        return {
            "seq": self.seq,
            "wall_clock_ms": self.wall_clock_ms,
            "actor": self.actor,
            "event": event_to_json_obj(self.event),
            "state_hash": self.state_hash,
        }


def make_header(
    seed: int,
    config: GameConfig,
    corpus: TextCorpus,
    player_ids: list[str],
    room_id: str = "",
) -> dict:
    return {
        "miboard_log": LOG_FORMAT_VERSION,
        "room_id": room_id,
        "seed": seed,
        "config": config.to_json_obj(),
        "corpus": corpus.to_json_obj(),
        "corpus_checksum": corpus.checksum,
        "player_ids": list(player_ids),
    }


class LogWriter:
    """Append-only JSONL writer; keeps lines in memory and optionally
    mirrors them to a file, flushing each line before returning.

    Pass `existing_lines` to resume an already-written log (the header
    is then not re-written; the sink should be opened in append mode).
    """

    def __init__(
        self,
        header: dict,
        sink: Optional[TextIO] = None,
        existing_lines: Optional[list[str]] = None,
    ):
        self.header = header
        self.sink = sink
        if existing_lines is not None:
            self.lines = list(existing_lines)
        else:
            self.lines = []
            self._write(json.dumps(header, ensure_ascii=False, separators=(",", ":")))

    def _write(self, line: str) -> None:
        self.lines.append(line)
        if self.sink is not None:
            self.sink.write(line + "\n")
            self.sink.flush()

    def append(self, record: LogRecord) -> None:
        self._write(json.dumps(record.to_json_obj(), ensure_ascii=False, separators=(",", ":")))

    def close(self) -> None:
        if self.sink is not None:
            self.sink.close()
            self.sink = None


def read_log(source: Union[str, bytes, TextIO]) -> tuple[dict, list[LogRecord]]:
    """Parse a JSONL log. A partial final line (crash artifact) is
    dropped; anything else malformed raises CorruptLog."""
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    complete = text.endswith("\n")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorruptLog("empty log")

    def parse(line: str, what: str) -> dict:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptLog(f"{what}: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise CorruptLog(f"{what}: not an object")
        return obj

    try:
        header = parse(lines[0], "header")
    except CorruptLog:
        if len(lines) == 1 and not complete:
            raise CorruptLog("truncated header") from None
        raise
    if header.get("miboard_log") != LOG_FORMAT_VERSION:
        raise CorruptLog("missing or unsupported log version")

    records: list[LogRecord] = []
    last = len(lines) - 1
    for i, line in enumerate(lines[1:], start=1):
        try:
            obj = parse(line, f"record {i}")
            record = LogRecord(
                seq=obj["seq"],
                wall_clock_ms=obj["wall_clock_ms"],
                actor=obj["actor"],
                event=event_from_json_obj(obj["event"]),
                state_hash=obj["state_hash"],
            )
        except (CorruptLog, KeyError, TypeError):
            if i == last and not complete:
                break  # torn tail from a crash mid-append
            raise CorruptLog(f"record {i}: malformed") from None
        records.append(record)

    expected = 1
    for record in records:
        if record.seq != expected:
            raise CorruptLog(f"seq gap: expected {expected}, found {record.seq}")
        expected += 1
    return header, records


def state_from_header(header: dict) -> tuple[GameState, TextCorpus]:
    try:
        corpus = corpus_from_json_obj(header["corpus"])
        if corpus.checksum != header["corpus_checksum"]:
            raise CorpusMismatch(
                f"embedded corpus hashes to {corpus.checksum[:12]}..., "
                f"header says {str(header['corpus_checksum'])[:12]}..."
            )
        config = GameConfig.from_json_obj(header["config"])
        state = engine.new_game(config, list(header["player_ids"]), corpus, header["seed"])
    except CorpusMismatch:
        raise
    except (KeyError, TypeError, MiBoardError) as exc:
        raise CorruptLog(f"bad header: {exc}") from exc
    return state, corpus


def replay_log(
    source: Union[str, bytes, TextIO],
    on_step: Optional[Callable[[LogRecord, GameState, list], None]] = None,
) -> GameState:
    """Re-reduce every logged event from the header's initial state and
    verify each recorded hash. Returns the final state."""
    header, records = read_log(source)
    state, _corpus = state_from_header(header)
    for record in records:
        try:
            state, effects = engine.apply_event(state, record.event)
        except RulesError as exc:
            raise CorruptLog(f"seq {record.seq}: logged event rejected: {exc}") from exc
        if state_hash(state) != record.state_hash:
            raise DivergentReplay(f"state hash mismatch at seq {record.seq}")
        if on_step is not None:
            on_step(record, state, effects)
    return state


# -- deliveries and outcomes ---------------------------------------------------

@dataclass(frozen=True)
class Delivery:
    seats: Optional[tuple[int, ...]]  # None = every seat
    event: protocol.ServerEvent


@dataclass
class Outcome:
    accepted: bool
    error: Optional[protocol.ServerEvent] = None  # for the sender only
    deliveries: list[Delivery] = field(default_factory=list)
    timer_arms: list[tuple[str, int, int]] = field(default_factory=list)  # kind, seconds, gen
    timer_cancels: list[str] = field(default_factory=list)
    game_over: Optional[list] = None


def command_to_event(seat: int, command: protocol.ClientCommand) -> GameEvent:
    if isinstance(command, protocol.Ready):
        return ReadyEvent(seat)
    if isinstance(command, protocol.SubmitSelfExplanation):
        return SubmitSelfExplanationEvent(seat, command.text)
    if isinstance(command, protocol.CastVote):
        return CastVoteEvent(seat, Strategy(command.strategy))
    if isinstance(command, protocol.Chat):
        return ChatEvent(seat, command.text)
    if isinstance(command, protocol.Purchase):
        return PurchaseEvent(seat, command.buy_kind, command.target)
    if isinstance(command, protocol.PlayCard):
        return PlayCardEvent(seat, command.card_id, command.target)
    if isinstance(command, protocol.Leave):
        return DisconnectEvent(seat)
    raise ProtocolError(f"{command.tag} does not map to a game event")


class RoomCore:
    """Serialized game driver. Callers must apply events one at a time;
    the class itself holds no locks."""

    def __init__(
        self,
        state: GameState,
        corpus: TextCorpus,
        log: LogWriter,
        now_ms: Callable[[], int],
        room_id: str = "",
        player_names: Optional[list[str]] = None,
        timer_scale: float = 1.0,
    ):
        self.state = state
        self.corpus = corpus
        self.log = log
        self.now_ms = now_ms
        self.room_id = room_id
        self.player_names = player_names or [p.player_id for p in state.players]
        self.timer_scale = timer_scale
        self.server_seq = 0
        self.next_log_seq = len(self.log.lines)  # header occupies line 0
        self._gen = 0
        self.armed: dict[str, tuple[int, int]] = {}  # kind -> (gen, deadline_epoch_ms)
        # Current round's accepted chat lines; not rules state (the engine
        # only counts messages), kept so reconnect snapshots can restore
        # the debate transcript.
        self.chat_log: list[dict] = []

    # -- public entry points ---------------------------------------------

    def start_effects(self) -> Outcome:
        """Announce the opening round (game start is not itself an event)."""
        outcome = self._execute(engine.round_start_effects(self.state))
        self._add_snapshots(outcome)
        return outcome

    def handle_command(self, seat: int, command: protocol.ClientCommand) -> Outcome:
        try:
            protocol.validate_for_phase(
                command, self.state.phase, seat, self.state.round, self.state.config
            )
            event = command_to_event(seat, command)
        except MiBoardError as exc:
            return Outcome(accepted=False, error=self._map_error(command, exc))
        outcome = self._apply(event)
        if outcome.accepted and isinstance(command, (protocol.Purchase, protocol.PlayCard)):
            self._add_snapshots(outcome)  # points/hands/freeze changed
        return outcome

    def handle_timer(self, kind: str, gen: int) -> Optional[Outcome]:
        """Fire a timer if that arming is still current; stale arms no-op."""
        current = self.armed.get(kind)
        if current is None or current[0] != gen:
            return None
        del self.armed[kind]
        outcome = self._apply(TimerFiredEvent(kind))
        if not outcome.accepted:
            return None  # phase moved on; nothing to do
        return outcome

    def handle_connection_change(self, seat: int, connected: bool) -> Outcome:
        event = ReconnectEvent(seat) if connected else DisconnectEvent(seat)
        return self._apply(event)

    def game_over(self) -> bool:
        return self.state.phase == TurnPhase.GAME_OVER

    # -- internals ---------------------------------------------------------

    def _apply(self, event: GameEvent) -> Outcome:
        try:
            new_state, effects = engine.apply_event(self.state, event)
        except RulesError as exc:
            chatty = isinstance(event, ChatEvent)
            return Outcome(accepted=False, error=self._map_error(event, exc, chatty))
        record = LogRecord(
            seq=self.next_log_seq,
            wall_clock_ms=self.now_ms(),
            actor=event_actor(event),
            event=event,
            state_hash=state_hash(new_state),
        )
        self.log.append(record)  # write-ahead: on disk before any effect
        self.next_log_seq += 1
        round_before = self.state.round_number
        self.state = new_state
        if new_state.round_number != round_before:
            self.chat_log = []
        if isinstance(event, ChatEvent):
            self.chat_log.append({"seat": event.seat, "text": event.text})
        outcome = self._execute(effects)
        if any(
            isinstance(d.event, protocol.PhaseChanged)
            and d.event.phase == TurnPhase.STRATEGY_ASSIGNED.value
            for d in outcome.deliveries
        ):
            self._add_snapshots(outcome)  # fresh round: resync every client
        return outcome

    def _map_error(
        self, source: object, exc: MiBoardError, chatty: Optional[bool] = None
    ) -> protocol.ServerEvent:
        if chatty is None:
            chatty = isinstance(source, (protocol.Chat, ChatEvent))
        if chatty:
            return self._stamp(protocol.ChatRejected(exc.code))
        return self._stamp(protocol.ErrorEvent(exc.code, exc.detail))

    def _stamp(self, event: protocol.ServerEvent) -> protocol.ServerEvent:
        self.server_seq += 1
        return dataclasses.replace(event, seq=self.server_seq)

    def _execute(self, effects: list) -> Outcome:
        outcome = Outcome(accepted=True)
        for effect in effects:
            if isinstance(effect, Broadcast):
                outcome.deliveries.append(
                    Delivery(None, self._stamp(self._fill_deadline(effect.payload)))
                )
            elif isinstance(effect, SendTo):
                outcome.deliveries.append(
                    Delivery((effect.seat,), self._stamp(self._fill_deadline(effect.payload)))
                )
            elif isinstance(effect, ArmTimer):
                self._gen += 1
                deadline = self.now_ms() + int(effect.seconds * 1000 * self.timer_scale)
                self.armed[effect.timer_kind] = (self._gen, deadline)
                outcome.timer_arms.append((effect.timer_kind, effect.seconds, self._gen))
            elif isinstance(effect, CancelTimer):
                if effect.timer_kind in self.armed:
                    del self.armed[effect.timer_kind]
                    outcome.timer_cancels.append(effect.timer_kind)
            elif isinstance(effect, GameEnded):
                outcome.game_over = effect.standings
            else:
                raise TypeError(f"unknown effect {effect!r}")
        return outcome

    def _fill_deadline(self, event: protocol.ServerEvent) -> protocol.ServerEvent:
        if isinstance(event, protocol.PhaseChanged) and event.countdown_seconds is not None:
            deadline = self.now_ms() + int(
                event.countdown_seconds * 1000 * self.timer_scale
            )
            return dataclasses.replace(event, deadline_epoch_ms=deadline)
        return event

    def _add_snapshots(self, outcome: Outcome) -> None:
        for player in self.state.players:
            outcome.deliveries.append(
                Delivery((player.seat,), self._stamp(self.snapshot_event(player.seat)))
            )

    # -- snapshots ---------------------------------------------------------

    def snapshot_event(self, for_seat: int, token: Optional[str] = None) -> protocol.RoomStateEvent:
        return protocol.RoomStateEvent(self.build_snapshot(for_seat, token))

    def build_snapshot(self, for_seat: int, token: Optional[str] = None) -> dict:
        """Redacted full-state view for one seat: the assigned strategy is
        visible to the reader only until the reveal, ballots expose only
        your own vote while open, hands expose only your own cards."""
        st = self.state
        phase = st.phase
        snapshot: dict = {
            "room_id": self.room_id,
            "you": for_seat,
            "phase": phase.value,
            "round_number": st.round_number,
            "players": [
                {
                    "player_id": p.player_id,
                    "seat": p.seat,
                    "points": p.points,
                    "board_position": p.board_position,
                    "frozen_turns": p.frozen_turns,
                    "connected": p.connected,
                    "hand_count": len(p.hand),
                }
                for p in st.players
            ],
            "hand": [c.to_json_obj() for c in st.players[for_seat].hand],
            "config": st.config.to_json_obj(),
            "pending_extra_turn_for": st.pending_extra_turn_for,
            "deadlines": {
                kind: deadline for kind, (_gen, deadline) in sorted(self.armed.items())
            },
        }
        if token is not None:
            snapshot["token"] = token
        r = st.round
        if r is None:
            snapshot["round"] = None
            if phase == TurnPhase.GAME_OVER:
                snapshot["standings"] = engine.standings(st)
            return snapshot

        target = self.corpus.sentences[r.target_sentence_index]
        revealed = phase in (TurnPhase.DEBATING, TurnPhase.REVOTING)
        is_reader = for_seat == r.reader_seat
        ballot = r.votes if phase == TurnPhase.VOTING else r.revotes
        my_vote = ballot.get(for_seat)
        round_view: dict = {
            "reader_seat": r.reader_seat,
            "reader_name": st.players[r.reader_seat].player_id,
            "is_extra_turn": r.is_extra_turn,
            "target_sentence_index": r.target_sentence_index,
            "target_text": target.text,
            "context": [
                {"index": s.index, "text": s.text}
                for s in self.corpus.sentences[: r.target_sentence_index]
            ],
            "self_explanation": r.self_explanation,
            "assigned_strategy": (
                r.assigned_strategy.value if (is_reader or revealed) else None
            ),
            "debate_open": r.debate_open,
            "debate_messages_remaining": {
                str(s): st.config.debate_max_messages - n
                for s, n in sorted(r.debate_messages_used.items())
            },
            "voted": {str(s): (v is not None) for s, v in sorted(ballot.items())},
            "my_vote": my_vote.value if my_vote else None,
            "chat": list(self.chat_log),
        }
        if revealed:
            round_view["initial_votes"] = {
                str(s): (v.value if v else None) for s, v in sorted(r.votes.items())
            }
        snapshot["round"] = round_view
        return snapshot
