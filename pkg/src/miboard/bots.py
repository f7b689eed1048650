"""Headless scripted players and the game simulator.

Bots consume exactly the server events a human client would receive
(building a `ClientView`) and emit ordinary protocol commands. Policy
decisions are derived from keyed hashes of (policy seed, round, decision
point) rather than a sequential RNG stream, so the same policy makes the
same choices whether frames arrive one-by-one over a socket or batched
in-process.

`simulate_game` is the fast path: it drives a RoomCore directly under a
simulated clock (timers fire by jumping the clock, never by sleeping)
and records every frame each seat would have received, which is what
the secrecy and pacing audits scan.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import engine, protocol
from .corpus import TextCorpus
from .errors import MiBoardError
from .model import (
    BUY_CHANGE_STRATEGY, BUY_EXTRA_CARD, BUY_EXTRA_TURN, BUY_FREEZE,
    GameConfig, GameState, TurnPhase, state_hash,
)
from .room import Delivery, LogWriter, Outcome, RoomCore, make_header

STRATEGY_NAMES = protocol.STRATEGY_NAMES

# Canned player text. Deliberately free of strategy names so that frame
# scans can assert a strategy name never reaches a non-reader during a
# secret ballot.
NEUTRAL_SE_TEXTS = (
    "This sentence follows from what the text already told us.",
    "I tried to restate the idea in my own words to check it.",
    "I think the author is setting up what happens next.",
    "This connects back to the earlier part of the passage.",
    "I asked myself whether I really understood this part.",
)
NEUTRAL_CHAT_TEXTS = (
    "I read that line differently.",
    "Look again at the sentence before the target.",
    "The wording of the explanation is what convinced me.",
    "I still think my pick fits better.",
    "Fair enough, you may be right about this one.",
    "The explanation goes beyond the text itself.",
)


def _tagged_se(strategy_name: str, blurb: str) -> str:
    return f"[{strategy_name}] {blurb}"


def parse_se_tag(text: Optional[str]) -> Optional[str]:
    """Extract the bracketed strategy tag an honest bot embeds in its SE."""
    if not text or not text.startswith("["):
        return None
    end = text.find("]")
    if end < 0:
        return None
    tag = text[1:end]
    return tag if tag in STRATEGY_NAMES else None


def next_strategy(name: str) -> str:
    return STRATEGY_NAMES[(STRATEGY_NAMES.index(name) + 1) % len(STRATEGY_NAMES)]


def keyed_draw(seed: int, *key: object) -> int:
    """Stable 64-bit value from a seed and a structured key."""
    material = f"{seed}|" + "|".join(str(part) for part in key)
    return int.from_bytes(hashlib.sha256(material.encode()).digest()[:8], "big")


# -- the client-side view -------------------------------------------------------

class ClientView:
    """Mirror of what one seat knows, reconstructed purely from server
    events (plus optimistic notes about what this client already sent)."""

    def __init__(self, seat: int, now_ms: Callable[[], int] = lambda: 0):
        self.seat = seat
        self.now_ms = now_ms
        self.phase: str = TurnPhase.LOBBY.value
        self.phase_entered_ms: int = 0
        self.round_number: int = 0
        self.reader_seat: Optional[int] = None
        self.reader_name: Optional[str] = None
        self.assigned: Optional[str] = None
        self.se_text: Optional[str] = None
        self.target_text: Optional[str] = None
        self.my_vote_cast = False
        self.messages_remaining: int = 0
        self.points: int = 0
        self.hand: list[dict] = []
        self.seats: list[int] = []
        self.costs: dict[str, int] = {}
        self.pending_extra_turn_for: Optional[int] = None
        self.votes_revealed: Optional[dict] = None
        self.game_over = False
        self.standings: Optional[list] = None
        self.chat_rejections = 0
        self.last_error: Optional[tuple[str, str]] = None
        self.lobby_ready_sent = False
        self.token: Optional[str] = None

    @property
    def is_reader(self) -> bool:
        return self.reader_seat == self.seat

    def observe(self, event: protocol.ServerEvent) -> None:
        if isinstance(event, protocol.RoomStateEvent):
            self._sync_snapshot(event.snapshot)
        elif isinstance(event, protocol.PhaseChanged):
            self._enter_phase(event.phase)
        elif isinstance(event, protocol.StrategyAssignedEvent):
            self.assigned = event.strategy
        elif isinstance(event, protocol.SelfExplanationPosted):
            self.se_text = event.text
        elif isinstance(event, protocol.VotesRevealed):
            self.votes_revealed = event.votes
            self.assigned = event.assigned
        elif isinstance(event, protocol.DebateStarted):
            self.messages_remaining = event.messages_remaining.get(str(self.seat), 0)
        elif isinstance(event, protocol.ChatPosted):
            if event.seat == self.seat:
                self.messages_remaining = event.messages_remaining
        elif isinstance(event, protocol.ChatRejected):
            self.chat_rejections += 1
        elif isinstance(event, protocol.TurnResolved):
            delta = event.points_awarded.get(str(self.seat))
            if delta:
                self.points += delta
        elif isinstance(event, protocol.CardDrawn):
            card = event.card
            if event.seat == self.seat and card.get("kind") not in ("hidden", "move"):
                self.hand.append(card)
        elif isinstance(event, protocol.GameOverEvent):
            self.game_over = True
            self.standings = event.standings
        elif isinstance(event, protocol.ErrorEvent):
            self.last_error = (event.code, event.detail)

    def note_sent(self, command: protocol.ClientCommand) -> None:
        if isinstance(command, protocol.CastVote):
            self.my_vote_cast = True
        elif isinstance(command, protocol.Ready) and self.phase == TurnPhase.LOBBY.value:
            self.lobby_ready_sent = True

    def _enter_phase(self, phase: str) -> None:
        self.phase = phase
        self.phase_entered_ms = self.now_ms()
        if phase == TurnPhase.STRATEGY_ASSIGNED.value:
            self.assigned = None
            self.se_text = None
            self.votes_revealed = None
            self.my_vote_cast = False
        elif phase in (TurnPhase.VOTING.value, TurnPhase.REVOTING.value):
            self.my_vote_cast = False
        elif phase == TurnPhase.GAME_OVER.value:
            self.game_over = True

    def _sync_snapshot(self, snap: dict) -> None:
        self.seat = snap.get("you", self.seat)
        if snap.get("token"):
            self.token = snap["token"]
        self.phase = snap["phase"]
        self.round_number = snap["round_number"]
        self.seats = [p["seat"] for p in snap["players"]]
        me = next(p for p in snap["players"] if p["seat"] == self.seat)
        self.points = me["points"]
        self.hand = list(snap.get("hand", []))
        cfg = snap.get("config", {})
        self.costs = {
            BUY_CHANGE_STRATEGY: cfg.get("cost_change_strategy", 2),
            BUY_EXTRA_TURN: cfg.get("cost_extra_turn", 5),
            BUY_FREEZE: cfg.get("cost_freeze", 4),
            BUY_EXTRA_CARD: cfg.get("cost_extra_card", 3),
        }
        self.pending_extra_turn_for = snap.get("pending_extra_turn_for")
        r = snap.get("round")
        if r is None:
            if snap.get("standings") is not None:
                self.standings = snap["standings"]
            return
        self.reader_seat = r["reader_seat"]
        self.reader_name = r["reader_name"]
        self.target_text = r["target_text"]
        self.se_text = r["self_explanation"]
        self.assigned = r["assigned_strategy"] or self.assigned
        if self.phase == TurnPhase.STRATEGY_ASSIGNED.value:
            self.assigned = r["assigned_strategy"]
        self.my_vote_cast = r["voted"].get(str(self.seat), False)
        self.messages_remaining = r["debate_messages_remaining"].get(str(self.seat), 0)


# -- policies --------------------------------------------------------------------

class BotPolicy:
    name = "bot"
    stall_delay_ms: Optional[int] = None

    def decide(self, view: ClientView) -> Optional[protocol.ClientCommand]:
        raise NotImplementedError


class HonestPolicy(BotPolicy):
    """Reads promptly, tags its SE with the assigned strategy, votes the
    tag it sees. Honest tables agree unanimously and never debate."""

    name = "honest"

    def __init__(self) -> None:
        self._acked_round = -1
        self._submitted_round = -1
        self._passed_round = -1

    def decide(self, view: ClientView) -> Optional[protocol.ClientCommand]:
        if view.game_over:
            return None
        phase, rnd = view.phase, view.round_number
        if phase == TurnPhase.STRATEGY_ASSIGNED.value and view.is_reader:
            if self._acked_round != rnd:
                self._acked_round = rnd
                return protocol.Ready(0)
        elif phase == TurnPhase.SELF_EXPLAINING.value and view.is_reader:
            if self._submitted_round != rnd and view.assigned:
                self._submitted_round = rnd
                blurb = NEUTRAL_SE_TEXTS[rnd % len(NEUTRAL_SE_TEXTS)]
                return protocol.SubmitSelfExplanation(0, _tagged_se(view.assigned, blurb))
        elif phase in (TurnPhase.VOTING.value, TurnPhase.REVOTING.value):
            if not view.is_reader and not view.my_vote_cast:
                tag = parse_se_tag(view.se_text) or view.assigned or STRATEGY_NAMES[1]
                return protocol.CastVote(0, tag)
        elif phase == TurnPhase.DEBATING.value and not view.is_reader:
            if self._passed_round != rnd:
                self._passed_round = rnd
                return protocol.Ready(0)
        return None


class ContrarianPolicy(BotPolicy):
    """Votes against its own belief to force a debate every round, burns
    its full chat budget, and tries one message past the cap."""

    name = "contrarian"

    def __init__(self) -> None:
        self._acked_round = -1
        self._submitted_round = -1
        self._chats_sent: dict[int, int] = {}
        self._passed_round = -1

    def decide(self, view: ClientView) -> Optional[protocol.ClientCommand]:
        if view.game_over:
            return None
        phase, rnd = view.phase, view.round_number
        if phase == TurnPhase.STRATEGY_ASSIGNED.value and view.is_reader:
            if self._acked_round != rnd:
                self._acked_round = rnd
                return protocol.Ready(0)
        elif phase == TurnPhase.SELF_EXPLAINING.value and view.is_reader:
            if self._submitted_round != rnd and view.assigned:
                self._submitted_round = rnd
                blurb = NEUTRAL_SE_TEXTS[rnd % len(NEUTRAL_SE_TEXTS)]
                return protocol.SubmitSelfExplanation(0, _tagged_se(view.assigned, blurb))
        elif phase in (TurnPhase.VOTING.value, TurnPhase.REVOTING.value):
            if not view.is_reader and not view.my_vote_cast:
                belief = parse_se_tag(view.se_text) or view.assigned or STRATEGY_NAMES[0]
                return protocol.CastVote(0, next_strategy(belief))
        elif phase == TurnPhase.DEBATING.value and not view.is_reader:
            sent = self._chats_sent.get(rnd, 0)
            if sent < 4:  # the 4th attempt exists to be rejected
                self._chats_sent[rnd] = sent + 1
                text = NEUTRAL_CHAT_TEXTS[(rnd + sent) % len(NEUTRAL_CHAT_TEXTS)]
                return protocol.Chat(0, text)
            if self._passed_round != rnd:
                self._passed_round = rnd
                return protocol.Ready(0)
        return None


class RandomPolicy(BotPolicy):
    """Uniform-ish legal play with occasional abstentions and purchases;
    every choice is a keyed draw so replays and both transport paths see
    identical behavior. Canned texts carry no strategy names."""

    name = "random"

    def __init__(self, seed: int):
        self.seed = seed
        self._acked_round = -1
        self._submitted_round = -1
        self._bought_round = -1
        self._rerolled_round = -1
        self._chats_sent: dict[int, int] = {}
        self._passed_round = -1

    def _pct(self, *key: object) -> int:
        return keyed_draw(self.seed, *key) % 100

    def decide(self, view: ClientView) -> Optional[protocol.ClientCommand]:
        if view.game_over:
            return None
        phase, rnd = view.phase, view.round_number

        if phase == TurnPhase.STRATEGY_ASSIGNED.value:
            if view.is_reader and self._rerolled_round != rnd:
                self._rerolled_round = rnd
                cost = view.costs.get(BUY_CHANGE_STRATEGY, 2)
                if view.points >= cost and self._pct("reroll", rnd) < 12:
                    return protocol.Purchase(0, BUY_CHANGE_STRATEGY)
            if self._bought_round != rnd:
                self._bought_round = rnd
                cmd = self._maybe_power_purchase(view, rnd)
                if cmd is not None:
                    return cmd
            if view.is_reader and self._acked_round != rnd:
                self._acked_round = rnd
                return protocol.Ready(0)
        elif phase == TurnPhase.SELF_EXPLAINING.value and view.is_reader:
            if self._submitted_round != rnd:
                self._submitted_round = rnd
                text = NEUTRAL_SE_TEXTS[keyed_draw(self.seed, "se", rnd) % len(NEUTRAL_SE_TEXTS)]
                return protocol.SubmitSelfExplanation(0, text)
        elif phase in (TurnPhase.VOTING.value, TurnPhase.REVOTING.value):
            if not view.is_reader and not view.my_vote_cast:
                ballot = "revote" if phase == TurnPhase.REVOTING.value else "initial"
                if self._pct("votep", rnd, ballot) < 85:
                    pick = STRATEGY_NAMES[keyed_draw(self.seed, "vote", rnd, ballot) % 5]
                    return protocol.CastVote(0, pick)
                view.my_vote_cast = True  # chose to abstain; stay silent this ballot
        elif phase == TurnPhase.DEBATING.value:
            quota = keyed_draw(self.seed, "chats", rnd) % (2 if view.is_reader else 3)
            sent = self._chats_sent.get(rnd, 0)
            if sent < quota:
                self._chats_sent[rnd] = sent + 1
                text = NEUTRAL_CHAT_TEXTS[keyed_draw(self.seed, "chat", rnd, sent) % len(NEUTRAL_CHAT_TEXTS)]
                return protocol.Chat(0, text)
            if not view.is_reader and self._passed_round != rnd:
                self._passed_round = rnd
                # one in five voters sits the debate out, leaving the
                # debate timer to close the phase
                if self._pct("pass", rnd) < 80:
                    return protocol.Ready(0)
        return None

    def _maybe_power_purchase(self, view: ClientView, rnd: int) -> Optional[protocol.ClientCommand]:
        roll = self._pct("buy", rnd)
        held = {c.get("kind") for c in view.hand}
        others = [s for s in view.seats if s != view.seat]
        if roll < 6 and others:
            if BUY_FREEZE in held or view.points >= view.costs.get(BUY_FREEZE, 4):
                target = others[keyed_draw(self.seed, "freeze", rnd) % len(others)]
                return protocol.Purchase(0, BUY_FREEZE, target=target)
        elif roll < 11:
            if BUY_EXTRA_CARD in held or view.points >= view.costs.get(BUY_EXTRA_CARD, 3):
                return protocol.Purchase(0, BUY_EXTRA_CARD)
        elif roll < 14 and view.pending_extra_turn_for is None:
            if BUY_EXTRA_TURN in held or view.points >= view.costs.get(BUY_EXTRA_TURN, 5):
                return protocol.Purchase(0, BUY_EXTRA_TURN)
        return None


class StallPolicy(BotPolicy):
    """Emits nothing until `delay_ms` of phase time has passed (never,
    when None), then plays honestly. Exercises every timer path."""

    name = "stall"

    def __init__(self, delay_ms: Optional[int] = None):
        self.stall_delay_ms = delay_ms
        self._fallback = HonestPolicy()

    def decide(self, view: ClientView) -> Optional[protocol.ClientCommand]:
        if self.stall_delay_ms is None:
            return None
        if view.now_ms() - view.phase_entered_ms < self.stall_delay_ms:
            return None
        return self._fallback.decide(view)


def make_policy(spec: str, game_seed: int, seat: int) -> BotPolicy:
    """Build a policy from a CLI spec like `honest`, `random`,
    `contrarian`, `stall`, or `stall:1500`."""
    name, _, arg = spec.partition(":")
    if name == "honest":
        return HonestPolicy()
    if name == "contrarian":
        return ContrarianPolicy()
    if name == "random":
        seed = int(arg) if arg else keyed_draw(game_seed, "policy-seed", seat)
        return RandomPolicy(seed)
    if name == "stall":
        return StallPolicy(int(arg) if arg else None)
    raise ValueError(f"unknown policy {spec!r}")


# -- fast-path simulator ----------------------------------------------------------

class SimClock:
    def __init__(self, start_ms: int = 0):
        self.ms = start_ms

    def now_ms(self) -> int:
        return self.ms

    def advance_to(self, ms: int) -> None:
        if ms < self.ms:
            raise ValueError("simulated time cannot run backwards")
        self.ms = ms


@dataclass
class Transcript:
    header: dict
    log_text: str
    final_state: GameState
    final_hash: str
    stats: dict
    frames: dict[int, list[tuple[int, str]]]  # seat -> [(sim_ms, frame json)]
    rejections: list[dict]


class _StatsCollector:
    def __init__(self) -> None:
        self.debates = 0
        self.chat_messages = 0
        self.chat_rejections = 0
        self.forfeits = 0
        self.matched_rounds = 0
        self.unmatched_rounds = 0
        self.purchases: dict[str, int] = {}
        self.debate_durations_ms: list[int] = []
        self._debate_started_at: Optional[int] = None

    def saw_delivery(self, event: protocol.ServerEvent, now: int) -> None:
        if isinstance(event, protocol.PhaseChanged):
            if event.phase == TurnPhase.DEBATING.value:
                self.debates += 1
                self._debate_started_at = now
            elif event.phase == TurnPhase.REVOTING.value and self._debate_started_at is not None:
                self.debate_durations_ms.append(now - self._debate_started_at)
                self._debate_started_at = None
        elif isinstance(event, protocol.ChatPosted):
            self.chat_messages += 1
        elif isinstance(event, protocol.TurnResolved):
            result = event.outcome.get("result")
            if result == "forfeit":
                self.forfeits += 1
            elif result == "majority":
                self.matched_rounds += 1
            elif result == "no_majority":
                self.unmatched_rounds += 1

    def saw_purchase(self, kind: str) -> None:
        self.purchases[kind] = self.purchases.get(kind, 0) + 1


def simulate_game(
    policies: list[BotPolicy],
    config: GameConfig,
    corpus: TextCorpus,
    seed: int,
    log_sink=None,
    player_ids: Optional[list[str]] = None,
    max_steps: int = 200_000,
) -> Transcript:
    """Run a full game in-process under a simulated clock.

    Bots are polled in seat order; the first command found is applied and
    its effects delivered before anyone else is polled (matching the
    serialized per-room order a live server enforces). When nobody acts,
    the clock jumps to the next timer deadline or stall wake-up.
    """
    if player_ids is None:
        player_ids = [f"bot{seat}" for seat in range(len(policies))]
    state = engine.new_game(config, player_ids, corpus, seed)
    header = make_header(seed, config, corpus, player_ids, room_id="sim")
    writer = LogWriter(header, sink=log_sink)
    clock = SimClock()
    core = RoomCore(
        state, corpus, writer, clock.now_ms, room_id="sim", timer_scale=1.0
    )
    views = {
        seat: ClientView(seat, now_ms=clock.now_ms) for seat in range(len(policies))
    }
    frames: dict[int, list[tuple[int, str]]] = {seat: [] for seat in views}
    rejections: list[dict] = []
    stats = _StatsCollector()
    seq: dict[int, int] = {seat: 0 for seat in views}

    def deliver(outcome: Outcome) -> None:
        for d in outcome.deliveries:
            seats = d.seats if d.seats is not None else tuple(views)
            encoded = protocol.encode(d.event).decode("utf-8")
            for s in seats:
                frames[s].append((clock.ms, encoded))
                views[s].observe(d.event)
            stats.saw_delivery(d.event, clock.ms)

    deliver(core.start_effects())

    steps = 0
    while not core.game_over():
        steps += 1
        if steps > max_steps:
            raise RuntimeError(f"simulation exceeded {max_steps} steps")
        acted = False
        for seat, policy in enumerate(policies):
            command = policy.decide(views[seat])
            if command is None:
                continue
            seq[seat] += 1
            command = dataclasses.replace(command, seq=seq[seat])
            views[seat].note_sent(command)
            outcome = core.handle_command(seat, command)
            if outcome.accepted:
                if isinstance(command, (protocol.Purchase, protocol.PlayCard)):
                    kind = (
                        command.buy_kind
                        if isinstance(command, protocol.Purchase)
                        else "play_card"
                    )
                    stats.saw_purchase(kind)
                deliver(outcome)
            else:
                frames[seat].append(
                    (clock.ms, protocol.encode(outcome.error).decode("utf-8"))
                )
                views[seat].observe(outcome.error)
                rejections.append({
                    "seat": seat,
                    "command": command.tag,
                    "code": getattr(outcome.error, "reason", None)
                    or getattr(outcome.error, "code", None),
                    "sim_ms": clock.ms,
                })
            acted = True
            break
        if acted:
            continue

        next_at: Optional[int] = None
        next_timer: Optional[tuple[str, int]] = None
        for kind, (gen, deadline) in core.armed.items():
            if next_at is None or deadline < next_at:
                next_at, next_timer = deadline, (kind, gen)
        for seat, policy in enumerate(policies):
            if policy.stall_delay_ms is None:
                continue
            wake = views[seat].phase_entered_ms + policy.stall_delay_ms
            if wake > clock.ms and (next_at is None or wake < next_at):
                next_at, next_timer = wake, None
        if next_at is None:
            raise RuntimeError(f"simulation stuck in {core.state.phase.value}: nothing armed")
        clock.advance_to(next_at)
        if next_timer is not None:
            outcome = core.handle_timer(*next_timer)
            if outcome is not None:
                deliver(outcome)

    final_state = core.state
    rounds_played = final_state.round_number - 1
    stats_obj = {
        "v": 1,
        "seed": seed,
        "policies": [p.name for p in policies],
        "players": player_ids,
        "rounds": rounds_played,
        "debates": stats.debates,
        "chat_messages": stats.chat_messages,
        "chat_rejections": sum(1 for r in rejections if r["command"] == "chat"),
        "forfeits": stats.forfeits,
        "matched_rounds": stats.matched_rounds,
        "unmatched_rounds": stats.unmatched_rounds,
        "purchases": stats.purchases,
        "debate_durations_ms": stats.debate_durations_ms,
        "sim_duration_ms": clock.ms,
        "events_logged": len(writer.lines) - 1,
        "final_hash": state_hash(final_state),
        "standings": engine.standings(final_state),
    }
    return Transcript(
        header=header,
        log_text="\n".join(writer.lines) + "\n",
        final_state=final_state,
        final_hash=state_hash(final_state),
        stats=stats_obj,
        frames=frames,
        rejections=rejections,
    )


# -- socket path (real clients against a live server) -------------------------------

class SocketBot:
    """One bot on one real WebSocket connection. Joins, readies up, then
    plays its policy until the game ends or the server closes the socket."""

    def __init__(
        self,
        ws_url: str,
        name: str,
        policy: BotPolicy,
        poll_s: float = 0.05,
        token: Optional[str] = None,
    ):
        import threading
        import time

        self.ws_url = ws_url if token is None else f"{ws_url}&token={token}"
        self.name = name
        self.policy = policy
        self.poll_s = poll_s
        self.reconnecting = token is not None
        self.view = ClientView(-1, now_ms=lambda: int(time.time() * 1000))
        self.seated = threading.Event()
        self.done = threading.Event()
        self.error: Optional[BaseException] = None
        self.frames: list[str] = []
        self._seq = 0
        self._thread = threading.Thread(target=self._run, daemon=True, name=f"bot-{name}")

    def start(self) -> None:
        self._thread.start()

    def join(self, timeout: float) -> None:
        self._thread.join(timeout)

    def _send(self, ws, command: protocol.ClientCommand) -> None:
        self._seq += 1
        command = dataclasses.replace(command, seq=self._seq)
        self.view.note_sent(command)
        ws.send(protocol.encode(command).decode("utf-8"))

    def _run(self) -> None:
        from websockets.sync.client import connect
        from websockets.exceptions import ConnectionClosed

        try:
            with connect(self.ws_url, close_timeout=2) as ws:
                if not self.reconnecting:
                    self._send(ws, protocol.JoinRoom(0, "", self.name))
                while True:
                    try:
                        raw = ws.recv(timeout=self.poll_s)
                    except TimeoutError:
                        raw = None
                    except ConnectionClosed:
                        break
                    if raw is not None:
                        self.frames.append(raw if isinstance(raw, str) else raw.decode())
                        self.view.observe(protocol.decode(raw))
                        if self.view.seat >= 0:
                            self.seated.set()
                    if self.view.game_over:
                        break
                    if (
                        self.view.seat >= 0
                        and self.view.phase == TurnPhase.LOBBY.value
                        and not self.view.lobby_ready_sent
                    ):
                        self._send(ws, protocol.Ready(0))
                        continue
                    if self.view.seat >= 0 and self.view.phase != TurnPhase.LOBBY.value:
                        command = self.policy.decide(self.view)
                        if command is not None:
                            self._send(ws, command)
        except BaseException as exc:  # surfaced by the runner
            self.error = exc
        finally:
            self.done.set()


def run_socket_game(
    base_url: str,
    policies: list[BotPolicy],
    seed: int,
    corpus_obj: dict,
    config_obj: Optional[dict] = None,
    timeout_s: float = 60.0,
) -> tuple[str, str, list[SocketBot]]:
    """Create a room over HTTP, drive it to completion with real socket
    bots, and return (room_id, log_text, bots)."""
    import httpx

    ws_base = base_url.replace("http://", "ws://").replace("https://", "wss://")
    body = {"corpus": corpus_obj, "corpus_id": "inline", "seed": seed}
    if config_obj:
        body["config"] = config_obj
    response = httpx.post(f"{base_url}/rooms", json=body, timeout=10)
    response.raise_for_status()
    room_id = response.json()["room_id"]

    socket_bots = [
        SocketBot(f"{ws_base}/ws?room={room_id}", f"bot{i}", policy)
        for i, policy in enumerate(policies)
    ]
    for bot in socket_bots:  # sequential seating keeps seat order deterministic
        bot.start()
        if not bot.seated.wait(timeout=10):
            raise RuntimeError(f"{bot.name} never got seated (error: {bot.error})")
    for bot in socket_bots:
        bot.join(timeout_s)
        if bot.error is not None:
            raise RuntimeError(f"{bot.name} failed: {bot.error!r}")
        if not bot.done.is_set():
            raise RuntimeError(f"{bot.name} did not finish within {timeout_s}s")

    log_response = httpx.get(f"{base_url}/rooms/{room_id}/log", timeout=10)
    log_response.raise_for_status()
    return room_id, log_response.text, socket_bots


# -- post-hoc log audit -------------------------------------------------------------

@dataclass
class AuditReport:
    violations: list[str] = field(default_factory=list)
    rounds_seen: int = 0
    assignments: list[tuple[int, int, str]] = field(default_factory=list)  # round, seat, strategy

    @property
    def ok(self) -> bool:
        return not self.violations


def audit_log(log_text: str) -> AuditReport:
    """Replay a log and re-check the rules invariants step by step:
    non-negative points/positions, card-multiset conservation, legal
    phase-edge chains, and strategy non-repetition per reader.

    Non-repetition compares against the *final* strategy of a player's
    previous reading turn: a paid mid-round change replaces what the
    reader actually used, and every fresh draw (round start or reroll)
    must avoid it.
    """
    from .room import read_log, replay_log, state_from_header

    header, _records = read_log(log_text)
    initial_state, _corpus = state_from_header(header)
    expected_cards = sorted(
        c.card_id for c in initial_state.config.build_deck()
    )
    report = AuditReport()
    last_final: dict[int, str] = {}
    current = {"number": None, "seat": None, "strategy": None}
    tracker = {"phase": initial_state.phase}

    def check_draw(seat: int, strategy: str, number: int) -> None:
        if last_final.get(seat) == strategy:
            report.violations.append(
                f"round {number}: seat {seat} repeated strategy {strategy}"
            )

    def commit_round() -> None:
        if current["number"] is not None:
            last_final[current["seat"]] = current["strategy"]

    def note_round(state: GameState) -> None:
        r = state.round
        if r is None:
            commit_round()
            current["number"] = None
            return
        strategy = r.assigned_strategy.value
        if state.round_number != current["number"]:
            commit_round()
            current.update(
                number=state.round_number, seat=r.reader_seat, strategy=strategy
            )
            report.rounds_seen += 1
            check_draw(r.reader_seat, strategy, state.round_number)
            report.assignments.append((state.round_number, r.reader_seat, strategy))
        elif strategy != current["strategy"]:
            current["strategy"] = strategy  # paid reroll mid-round
            check_draw(r.reader_seat, strategy, state.round_number)

    note_round(initial_state)

    def on_step(record, state: GameState, effects: list) -> None:
        for p in state.players:
            if p.points < 0:
                report.violations.append(f"seq {record.seq}: seat {p.seat} points {p.points} < 0")
            if p.board_position < 0:
                report.violations.append(f"seq {record.seq}: seat {p.seat} position < 0")
        held = [c.card_id for p in state.players for c in p.hand]
        cards = sorted(
            [c.card_id for c in state.event_deck]
            + [c.card_id for c in state.discard_pile]
            + held
        )
        if cards != expected_cards:
            report.violations.append(f"seq {record.seq}: card multiset broken")
        phase = tracker["phase"]
        from .events import Broadcast as _B

        for effect in effects:
            payload = getattr(effect, "payload", None)
            if isinstance(effect, _B) and isinstance(payload, protocol.PhaseChanged):
                nxt = TurnPhase(payload.phase)
                if (phase, nxt) not in engine.LEGAL_PHASE_EDGES:
                    report.violations.append(
                        f"seq {record.seq}: illegal edge {phase.value} -> {nxt.value}"
                    )
                phase = nxt
        if phase != state.phase:
            report.violations.append(
                f"seq {record.seq}: phase chain ends at {phase.value}, state says {state.phase.value}"
            )
        tracker["phase"] = state.phase
        note_round(state)

    replay_log(log_text, on_step=on_step)
    return report
