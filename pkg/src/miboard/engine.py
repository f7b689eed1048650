"""Pure rules reducer.

`apply_event` is the single authoritative transition function: given a
state and one event it returns a brand-new state plus a list of effects
(broadcasts, private sends, timer arm/cancel requests) and never touches
I/O or wall clocks itself. A raised RulesError means the event was
rejected and the caller's state object is untouched, the reducer clones
before mutating anything.

Draw order is part of the replay contract: game setup shuffles the deck
then draws the first strategy; each subsequent round draws one strategy;
a matched turn draws two dice (first die, then second) and then the top
event card (reshuffling the discard first when the deck is empty);
a paid strategy change draws one strategy.
"""

from __future__ import annotations

from typing import Optional

from . import protocol
from .corpus import TextCorpus
from .errors import (
    AlreadyVoted, BadConfig, CannotFreezeSelf, ChatClosed, ChatLimitReached,
    DeckAndDiscardEmpty, EmptyCorpus, GameAlreadyOver, IllegalPayload,
    InsufficientPoints, InvalidPlayerCount, NotYourTurn, UnknownSeat,
    UnknownTarget, WrongPhase,
)
from .events import (
    ArmTimer, Broadcast, CancelTimer, CastVoteEvent, ChatEvent,
    DisconnectEvent, Effect, GameEnded, GameEvent, PlayCardEvent,
    PurchaseEvent, ReadyEvent, ReconnectEvent, SendTo,
    SubmitSelfExplanationEvent, TimerFiredEvent,
)
from .model import (
    ALL_STRATEGIES, BUY_CHANGE_STRATEGY, BUY_EXTRA_CARD, BUY_EXTRA_TURN,
    BUY_FREEZE, CARD_MOVE, CorpusRef, EventCard, GameConfig, GameState,
    PlayerState, RoundState, Strategy, TurnPhase, VoteOutcome, TIMER_DEBATE,
    TIMER_SELF_EXPLAIN, TIMER_VOTE,
)
from .rng import GameRng

# Every phase transition the reducer may perform, as (from, to) pairs.
# The forfeit edges (StrategyAssigned/SelfExplaining back to a new round
# or GameOver) realize the self-explain-timer forfeit rule.
LEGAL_PHASE_EDGES: frozenset[tuple[TurnPhase, TurnPhase]] = frozenset({
    (TurnPhase.STRATEGY_ASSIGNED, TurnPhase.SELF_EXPLAINING),
    (TurnPhase.STRATEGY_ASSIGNED, TurnPhase.STRATEGY_ASSIGNED),
    (TurnPhase.STRATEGY_ASSIGNED, TurnPhase.GAME_OVER),
    (TurnPhase.SELF_EXPLAINING, TurnPhase.VOTING),
    (TurnPhase.SELF_EXPLAINING, TurnPhase.STRATEGY_ASSIGNED),
    (TurnPhase.SELF_EXPLAINING, TurnPhase.GAME_OVER),
    (TurnPhase.VOTING, TurnPhase.REVEAL),
    (TurnPhase.REVEAL, TurnPhase.RESOLVING),
    (TurnPhase.REVEAL, TurnPhase.DEBATING),
    (TurnPhase.DEBATING, TurnPhase.REVOTING),
    (TurnPhase.REVOTING, TurnPhase.RESOLVING),
    (TurnPhase.RESOLVING, TurnPhase.CARD_DRAW),
    (TurnPhase.RESOLVING, TurnPhase.STRATEGY_ASSIGNED),
    (TurnPhase.RESOLVING, TurnPhase.GAME_OVER),
    (TurnPhase.CARD_DRAW, TurnPhase.STRATEGY_ASSIGNED),
    (TurnPhase.CARD_DRAW, TurnPhase.GAME_OVER),
})

# Phases in which the game sits waiting for input; the others resolve
# inside a single reduction.
RESTING_PHASES = (
    TurnPhase.STRATEGY_ASSIGNED, TurnPhase.SELF_EXPLAINING,
    TurnPhase.VOTING, TurnPhase.DEBATING, TurnPhase.REVOTING,
    TurnPhase.GAME_OVER,
)


# -- game construction --------------------------------------------------------

def new_game(
    config: GameConfig,
    player_ids: list[str],
    corpus: TextCorpus,
    seed: int,
) -> GameState:
    """Build the starting state: seat 0 reads first, deck shuffled, first
    target selected, first strategy drawn."""
    config.validate()
    if not 3 <= len(player_ids) <= 4:
        raise InvalidPlayerCount(f"need 3 or 4 players, got {len(player_ids)}")
    if len(set(player_ids)) != len(player_ids):
        raise BadConfig("player ids must be unique")
    targets = corpus.target_indices()
    if not targets:
        raise EmptyCorpus("corpus has no target sentences")

    rng = GameRng(seed)
    deck = config.build_deck()
    rng.shuffle(deck)
    state = GameState(
        config=config,
        players=[PlayerState(pid, seat) for seat, pid in enumerate(player_ids)],
        phase=TurnPhase.STRATEGY_ASSIGNED,
        round=None,
        corpus_ref=CorpusRef(corpus.checksum, targets, 0),
        event_deck=deck,
        discard_pile=[],
        rng_state=rng.getstate(),
    )
    _begin_round(state, reader_seat=0, is_extra_turn=False)
    return state


def round_start_effects(state: GameState) -> list[Effect]:
    """Effects announcing the current StrategyAssigned round.

    Pure projection of the state (no draws), so callers may emit it for a
    freshly built game without re-reducing anything.
    """
    if state.phase != TurnPhase.STRATEGY_ASSIGNED or state.round is None:
        raise WrongPhase(f"no round start to announce in {state.phase.value}")
    r = state.round
    return [
        SendTo(r.reader_seat, protocol.StrategyAssignedEvent(r.assigned_strategy.value)),
        Broadcast(protocol.PhaseChanged(
            TurnPhase.STRATEGY_ASSIGNED.value,
            countdown_seconds=state.config.self_explain_seconds,
        )),
        ArmTimer(TIMER_SELF_EXPLAIN, state.config.self_explain_seconds),
    ]


# -- the reducer ---------------------------------------------------------------

def apply_event(state: GameState, event: GameEvent) -> tuple[GameState, list[Effect]]:
    seat = getattr(event, "seat", None)
    if seat is not None and not 0 <= seat < state.seat_count():
        raise UnknownSeat(f"seat {seat} is not in this game")

    if isinstance(event, (DisconnectEvent, ReconnectEvent)):
        st = state.clone()
        st.players[event.seat].connected = isinstance(event, ReconnectEvent)
        return st, []

    if state.phase == TurnPhase.GAME_OVER:
        raise GameAlreadyOver("the game has ended")

    st = state.clone()
    if isinstance(event, ReadyEvent):
        effects = _ready(st, event.seat)
    elif isinstance(event, SubmitSelfExplanationEvent):
        effects = _submit_self_explanation(st, event.seat, event.text)
    elif isinstance(event, CastVoteEvent):
        effects = _cast_vote(st, event.seat, event.strategy)
    elif isinstance(event, ChatEvent):
        effects = _chat(st, event.seat, event.text)
    elif isinstance(event, PurchaseEvent):
        effects = _purchase(st, event.seat, event.buy_kind, event.target_seat)
    elif isinstance(event, PlayCardEvent):
        effects = _play_card(st, event.seat, event.card_id, event.target_seat)
    elif isinstance(event, TimerFiredEvent):
        effects = _timer_fired(st, event.timer_kind)
    else:
        raise IllegalPayload(f"unknown event {event!r}")
    return st, effects


# -- vote arithmetic (total functions) -----------------------------------------

def tally_votes(
    votes: dict[int, Optional[Strategy]], assigned: Strategy
) -> VoteOutcome:
    """Strict majority over all non-reader seats; abstentions count against."""
    eligible = len(votes)
    matched = sum(1 for v in votes.values() if v == assigned)
    return VoteOutcome(matched, eligible, matched * 2 > eligible)


def needs_debate(votes: dict[int, Optional[Strategy]], assigned: Strategy) -> bool:
    """True unless every eligible voter cast exactly the assigned strategy."""
    return any(v != assigned for v in votes.values())


# -- public single-step ops (each clones; the reducer uses the _inner forms) ---

def assign_strategy(state: GameState) -> tuple[GameState, Strategy]:
    """Draw a fresh strategy for the current reader, excluding only their
    previous reading turn's strategy."""
    if state.phase not in (TurnPhase.STRATEGY_ASSIGNED, TurnPhase.SELF_EXPLAINING):
        raise WrongPhase(f"cannot assign a strategy in {state.phase.value}")
    st = state.clone()
    assert st.round is not None
    prev = st.players[st.round.reader_seat].previous_assigned_strategy
    drawn = _draw_strategy(st, {prev} if prev else set())
    st.round.assigned_strategy = drawn
    return st, drawn


def roll_dice(state: GameState) -> tuple[GameState, int, int]:
    st = state.clone()
    d1, d2 = _roll_dice(st)
    return st, d1, d2


def score_and_move(
    state: GameState,
    outcome: VoteOutcome,
    final_votes: dict[int, Optional[Strategy]],
) -> tuple[GameState, list[Effect]]:
    """Apply the resolution step: points and dice movement on a majority
    (phase moves to CardDraw), otherwise straight to the next round."""
    if state.phase != TurnPhase.RESOLVING:
        raise WrongPhase(f"cannot resolve in {state.phase.value}")
    st = state.clone()
    effects = _score_and_move(st, outcome, final_votes)
    if st.phase != TurnPhase.CARD_DRAW:
        effects += _advance(st)
    return st, effects


def draw_event_card(
    state: GameState, seat: Optional[int] = None
) -> tuple[GameState, EventCard, list[Effect]]:
    """Draw the top event card for `seat` (default: the reader), then
    advance to the next round."""
    if state.phase != TurnPhase.CARD_DRAW:
        raise WrongPhase(f"cannot draw in {state.phase.value}")
    st = state.clone()
    assert st.round is not None
    beneficiary = st.round.reader_seat if seat is None else seat
    card, effects = _draw_card(st, beneficiary)
    if card is None:
        raise DeckAndDiscardEmpty("every card is held in a hand")
    effects += _advance(st)
    return st, card, effects


def purchase(
    state: GameState,
    seat: int,
    buy_kind: str,
    target_seat: Optional[int] = None,
) -> tuple[GameState, list[Effect]]:
    if not 0 <= seat < state.seat_count():
        raise UnknownSeat(f"seat {seat} is not in this game")
    st = state.clone()
    return st, _purchase(st, seat, buy_kind, target_seat)


def advance_round(state: GameState) -> tuple[GameState, list[Effect]]:
    """Rotate the reader (honoring extra turns and freezes) and open the
    next round, or end the game."""
    if state.phase not in (TurnPhase.RESOLVING, TurnPhase.CARD_DRAW):
        raise WrongPhase(f"cannot advance from {state.phase.value}")
    st = state.clone()
    return st, _advance(st)


def standings(state: GameState) -> list[dict]:
    """Ranked rows: farthest along the board wins, points break ties,
    remaining ties share a rank (competition ranking)."""
    ordered = sorted(
        state.players, key=lambda p: (-p.board_position, -p.points, p.seat)
    )
    rows = []
    rank = 0
    prev_key: Optional[tuple[int, int]] = None
    for i, p in enumerate(ordered):
        key = (p.board_position, p.points)
        if key != prev_key:
            rank = i + 1
            prev_key = key
        rows.append({
            "player_id": p.player_id,
            "seat": p.seat,
            "board_position": p.board_position,
            "points": p.points,
            "rank": rank,
        })
    return rows


# -- internals (operate on an already-cloned state) ----------------------------

def _with_rng(st: GameState) -> GameRng:
    return GameRng(st.rng_state)  # caller must write .getstate() back


def _draw_strategy(st: GameState, exclude: set[Strategy]) -> Strategy:
    candidates = [s for s in ALL_STRATEGIES if s not in exclude]
    rng = GameRng(0)
    rng.setstate(st.rng_state)
    pick = candidates[rng.randbelow(len(candidates))]
    st.rng_state = rng.getstate()
    return pick


def _roll_dice(st: GameState) -> tuple[int, int]:
    rng = GameRng(0)
    rng.setstate(st.rng_state)
    faces = st.config.dice_faces
    d1 = 1 + rng.randbelow(faces)
    d2 = 1 + rng.randbelow(faces)
    st.rng_state = rng.getstate()
    return d1, d2


def _begin_round(st: GameState, reader_seat: int, is_extra_turn: bool) -> list[Effect]:
    assert not st.corpus_ref.exhausted()
    sentence_index = st.corpus_ref.target_indices[st.corpus_ref.cursor]
    st.corpus_ref.cursor += 1
    prev = st.players[reader_seat].previous_assigned_strategy
    strategy = _draw_strategy(st, {prev} if prev else set())
    seats = [p.seat for p in st.players]
    st.round = RoundState(
        reader_seat=reader_seat,
        assigned_strategy=strategy,
        target_sentence_index=sentence_index,
        votes={s: None for s in seats if s != reader_seat},
        debate_messages_used={s: 0 for s in seats},
        is_extra_turn=is_extra_turn,
    )
    st.phase = TurnPhase.STRATEGY_ASSIGNED
    return round_start_effects(st)


def _ready(st: GameState, seat: int) -> list[Effect]:
    r = st.round
    assert r is not None
    if st.phase == TurnPhase.STRATEGY_ASSIGNED:
        if seat != r.reader_seat:
            raise NotYourTurn("waiting for the reader to start writing")
        st.phase = TurnPhase.SELF_EXPLAINING
        reader_name = st.players[r.reader_seat].player_id
        effects: list[Effect] = [
            SendTo(s, protocol.ReaderBusy(reader_name))
            for s in st.non_reader_seats()
        ]
        effects.append(Broadcast(protocol.PhaseChanged(TurnPhase.SELF_EXPLAINING.value)))
        return effects
    if st.phase == TurnPhase.DEBATING:
        if seat == r.reader_seat:
            raise NotYourTurn("the reader does not pass the debate")
        r.debate_passed.add(seat)
        if _all_voters_done(st):
            return _begin_revote(st)
        return []
    raise WrongPhase(f"ready has no meaning in {st.phase.value}")


def _submit_self_explanation(st: GameState, seat: int, text: str) -> list[Effect]:
    r = st.round
    assert r is not None
    if st.phase != TurnPhase.SELF_EXPLAINING:
        raise WrongPhase(f"cannot submit a self-explanation in {st.phase.value}")
    if seat != r.reader_seat:
        raise NotYourTurn("only the reader submits")
    if not text.strip():
        raise IllegalPayload("self-explanation must not be empty")
    r.self_explanation = text
    st.phase = TurnPhase.VOTING
    return [
        CancelTimer(TIMER_SELF_EXPLAIN),
        Broadcast(protocol.SelfExplanationPosted(seat, text)),
        Broadcast(protocol.PhaseChanged(
            TurnPhase.VOTING.value, countdown_seconds=st.config.vote_seconds,
        )),
        ArmTimer(TIMER_VOTE, st.config.vote_seconds),
    ]


def _cast_vote(st: GameState, seat: int, strategy: Strategy) -> list[Effect]:
    r = st.round
    assert r is not None
    if st.phase not in (TurnPhase.VOTING, TurnPhase.REVOTING):
        raise WrongPhase(f"no ballot open in {st.phase.value}")
    if seat == r.reader_seat:
        raise NotYourTurn("the reader does not vote")
    ballot = r.votes if st.phase == TurnPhase.VOTING else r.revotes
    if ballot[seat] is not None:
        raise AlreadyVoted("one vote per ballot")
    ballot[seat] = strategy
    if all(v is not None for v in ballot.values()):
        return _close_ballot(st)
    return []  # vote secrecy: nothing observable until the reveal


def _chat(st: GameState, seat: int, text: str) -> list[Effect]:
    r = st.round
    assert r is not None
    if st.phase != TurnPhase.DEBATING:
        raise ChatClosed("chat opens during the debate")
    if not 1 <= len(text) <= protocol.CHAT_MAX_CHARS:
        raise IllegalPayload(f"chat text must be 1..{protocol.CHAT_MAX_CHARS} characters")
    used = r.debate_messages_used[seat]
    if used >= st.config.debate_max_messages:
        raise ChatLimitReached(
            f"limit is {st.config.debate_max_messages} messages per debate"
        )
    r.debate_messages_used[seat] = used + 1
    remaining = st.config.debate_max_messages - (used + 1)
    effects: list[Effect] = [Broadcast(protocol.ChatPosted(seat, text, remaining))]
    if _all_voters_done(st):
        effects += _begin_revote(st)
    return effects


def _timer_fired(st: GameState, timer_kind: str) -> list[Effect]:
    if timer_kind == TIMER_SELF_EXPLAIN:
        if st.phase not in (TurnPhase.STRATEGY_ASSIGNED, TurnPhase.SELF_EXPLAINING):
            raise WrongPhase(f"self-explain timer is not armed in {st.phase.value}")
        return _forfeit(st)
    if timer_kind == TIMER_VOTE:
        if st.phase not in (TurnPhase.VOTING, TurnPhase.REVOTING):
            raise WrongPhase(f"vote timer is not armed in {st.phase.value}")
        return _close_ballot(st)  # missing votes stay None = abstentions
    if timer_kind == TIMER_DEBATE:
        if st.phase != TurnPhase.DEBATING:
            raise WrongPhase(f"debate timer is not armed in {st.phase.value}")
        return _begin_revote(st)
    raise IllegalPayload(f"unknown timer kind {timer_kind!r}")


def _forfeit(st: GameState) -> list[Effect]:
    effects: list[Effect] = [
        CancelTimer(TIMER_SELF_EXPLAIN),
        Broadcast(protocol.TurnResolved(outcome={"result": "forfeit"})),
    ]
    return effects + _advance(st)


def _all_voters_done(st: GameState) -> bool:
    r = st.round
    assert r is not None
    limit = st.config.debate_max_messages
    return all(
        s in r.debate_passed or r.debate_messages_used[s] >= limit
        for s in st.non_reader_seats()
    )


def _ballot_json(ballot: dict[int, Optional[Strategy]]) -> dict:
    return {str(s): (v.value if v else None) for s, v in sorted(ballot.items())}


def _close_ballot(st: GameState) -> list[Effect]:
    r = st.round
    assert r is not None
    effects: list[Effect] = [CancelTimer(TIMER_VOTE)]
    if st.phase == TurnPhase.VOTING:
        st.phase = TurnPhase.REVEAL
        effects += [
            Broadcast(protocol.VotesRevealed(
                _ballot_json(r.votes), r.assigned_strategy.value, "initial",
            )),
            Broadcast(protocol.PhaseChanged(TurnPhase.REVEAL.value)),
        ]
        if needs_debate(r.votes, r.assigned_strategy):
            return effects + _begin_debate(st)
        return effects + _resolve(st, r.votes)
    # Revoting closes straight into resolution; the revote is still
    # published but there is no second debate.
    effects.append(Broadcast(protocol.VotesRevealed(
        _ballot_json(r.revotes), r.assigned_strategy.value, "revote",
    )))
    return effects + _resolve(st, r.revotes)


def _begin_debate(st: GameState) -> list[Effect]:
    r = st.round
    assert r is not None
    st.phase = TurnPhase.DEBATING
    r.debate_open = True
    limit = st.config.debate_max_messages
    remaining = {
        str(p.seat): limit - r.debate_messages_used[p.seat] for p in st.players
    }
    return [
        Broadcast(protocol.DebateStarted(st.config.debate_seconds, remaining)),
        Broadcast(protocol.PhaseChanged(
            TurnPhase.DEBATING.value, countdown_seconds=st.config.debate_seconds,
        )),
        ArmTimer(TIMER_DEBATE, st.config.debate_seconds),
    ]


def _begin_revote(st: GameState) -> list[Effect]:
    r = st.round
    assert r is not None
    r.debate_open = False
    r.revotes = {s: None for s in st.non_reader_seats()}
    st.phase = TurnPhase.REVOTING
    return [
        CancelTimer(TIMER_DEBATE),
        Broadcast(protocol.PhaseChanged(
            TurnPhase.REVOTING.value, countdown_seconds=st.config.vote_seconds,
        )),
        ArmTimer(TIMER_VOTE, st.config.vote_seconds),
    ]


def _resolve(st: GameState, final_votes: dict[int, Optional[Strategy]]) -> list[Effect]:
    st.phase = TurnPhase.RESOLVING
    effects: list[Effect] = [Broadcast(protocol.PhaseChanged(TurnPhase.RESOLVING.value))]
    outcome = tally_votes(final_votes, st.round.assigned_strategy)
    effects += _score_and_move(st, outcome, final_votes)
    if st.phase == TurnPhase.CARD_DRAW:
        _, draw_effects = _draw_card(st, st.round.reader_seat)
        effects += draw_effects
    return effects + _advance(st)


def _score_and_move(
    st: GameState,
    outcome: VoteOutcome,
    final_votes: dict[int, Optional[Strategy]],
) -> list[Effect]:
    r = st.round
    assert r is not None
    cfg = st.config
    outcome_json = {
        "result": "majority" if outcome.majority_matched else "no_majority",
        "matched_count": outcome.matched_count,
        "eligible_count": outcome.eligible_count,
    }
    if not outcome.majority_matched:
        # No points, no movement, no card.
        return [Broadcast(protocol.TurnResolved(outcome=outcome_json))]

    reader = st.players[r.reader_seat]
    awarded: dict[str, int] = {str(reader.seat): cfg.points_reader_on_majority}
    reader.points += cfg.points_reader_on_majority
    for seat, vote in sorted(final_votes.items()):
        if vote == r.assigned_strategy:
            st.players[seat].points += cfg.points_voter_on_match
            awarded[str(seat)] = cfg.points_voter_on_match
    d1, d2 = _roll_dice(st)
    start = reader.board_position
    reader.board_position = start + d1 + d2
    st.phase = TurnPhase.CARD_DRAW
    return [
        Broadcast(protocol.TurnResolved(
            outcome=outcome_json,
            points_awarded=awarded,
            dice=[d1, d2],
            movement={"seat": reader.seat, "from": start, "to": reader.board_position},
        )),
        Broadcast(protocol.PhaseChanged(TurnPhase.CARD_DRAW.value)),
    ]


def _draw_card(st: GameState, seat: int) -> tuple[Optional[EventCard], list[Effect]]:
    """Draw for `seat`; returns (None, []) when every card is in a hand."""
    if not st.event_deck:
        if not st.discard_pile:
            return None, []
        st.event_deck = list(st.discard_pile)
        st.discard_pile = []
        rng = GameRng(0)
        rng.setstate(st.rng_state)
        rng.shuffle(st.event_deck)
        st.rng_state = rng.getstate()
    card = st.event_deck.pop(0)
    if card.kind == CARD_MOVE:
        player = st.players[seat]
        start = player.board_position
        player.board_position = max(0, start + card.delta)
        st.discard_pile.append(card)
        movement = {"seat": seat, "from": start, "to": player.board_position}
        return card, [Broadcast(protocol.CardDrawn(seat, card.to_json_obj(), movement))]
    st.players[seat].hand.append(card)
    effects: list[Effect] = [SendTo(seat, protocol.CardDrawn(seat, card.to_json_obj()))]
    hidden = {"kind": "hidden"}
    effects += [
        SendTo(p.seat, protocol.CardDrawn(seat, hidden))
        for p in st.players if p.seat != seat
    ]
    return card, effects


def _advance(st: GameState) -> list[Effect]:
    """Round-end bookkeeping, then the next round or the end of the game."""
    r = st.round
    assert r is not None
    st.players[r.reader_seat].previous_assigned_strategy = r.assigned_strategy
    st.round_number += 1
    if st.corpus_ref.exhausted() or st.round_number > st.config.max_rounds:
        st.phase = TurnPhase.GAME_OVER
        st.round = None
        rows = standings(st)
        return [
            Broadcast(protocol.PhaseChanged(TurnPhase.GAME_OVER.value)),
            Broadcast(protocol.GameOverEvent(rows)),
            GameEnded(rows),
        ]

    next_reader: Optional[int] = None
    is_extra = False
    if st.pending_extra_turn_for is not None:
        seat = st.pending_extra_turn_for
        st.pending_extra_turn_for = None
        if st.players[seat].frozen_turns > 0:
            # A bonus round is a reading turn, so a freeze consumes it.
            st.players[seat].frozen_turns -= 1
        else:
            next_reader = seat
            is_extra = True
    if next_reader is None:
        n = st.seat_count()
        nxt = (r.reader_seat + 1) % n
        while st.players[nxt].frozen_turns > 0:
            st.players[nxt].frozen_turns -= 1
            nxt = (nxt + 1) % n
        next_reader = nxt
    return _begin_round(st, next_reader, is_extra)


def _purchase(
    st: GameState, seat: int, buy_kind: str, target_seat: Optional[int]
) -> list[Effect]:
    if st.phase not in protocol.PURCHASE_PHASES:
        raise WrongPhase(f"cannot spend during {st.phase.value}")
    r = st.round
    assert r is not None
    cfg = st.config

    if buy_kind == BUY_CHANGE_STRATEGY:
        if seat != r.reader_seat:
            raise NotYourTurn("only the reader may change the assigned strategy")
        if st.phase not in (TurnPhase.STRATEGY_ASSIGNED, TurnPhase.SELF_EXPLAINING):
            raise WrongPhase("strategy can only be changed before submission")
        _spend_points(st, seat, cfg.cost_change_strategy)
        exclude = {r.assigned_strategy}
        prev = st.players[seat].previous_assigned_strategy
        if prev is not None:
            exclude.add(prev)
        r.assigned_strategy = _draw_strategy(st, exclude)
        return [SendTo(seat, protocol.StrategyAssignedEvent(r.assigned_strategy.value))]

    if buy_kind not in (BUY_EXTRA_TURN, BUY_FREEZE, BUY_EXTRA_CARD):
        raise IllegalPayload(f"unknown purchase kind {buy_kind!r}")
    _validate_power(st, seat, buy_kind, target_seat)
    # A held power card is consumed in preference to points.
    hand = st.players[seat].hand
    card_index = next((i for i, c in enumerate(hand) if c.kind == buy_kind), None)
    if card_index is not None:
        st.discard_pile.append(hand.pop(card_index))
    else:
        _spend_points(st, seat, cfg.cost_of(buy_kind))
    return _apply_power(st, seat, buy_kind, target_seat)


def _play_card(
    st: GameState, seat: int, card_id: str, target_seat: Optional[int]
) -> list[Effect]:
    if st.phase not in protocol.PURCHASE_PHASES:
        raise WrongPhase(f"cannot play a card during {st.phase.value}")
    hand = st.players[seat].hand
    card_index = next((i for i, c in enumerate(hand) if c.card_id == card_id), None)
    if card_index is None:
        raise IllegalPayload(f"card {card_id!r} is not in your hand")
    kind = hand[card_index].kind
    _validate_power(st, seat, kind, target_seat)
    st.discard_pile.append(hand.pop(card_index))
    return _apply_power(st, seat, kind, target_seat)


def _validate_power(
    st: GameState, seat: int, power_kind: str, target_seat: Optional[int]
) -> None:
    if power_kind == BUY_EXTRA_TURN and st.pending_extra_turn_for is not None:
        raise IllegalPayload("an extra turn is already pending")
    if power_kind == BUY_FREEZE:
        if target_seat is None:
            raise UnknownTarget("freeze needs a target seat")
        if not 0 <= target_seat < st.seat_count():
            raise UnknownTarget(f"seat {target_seat} is not in this game")
        if target_seat == seat:
            raise CannotFreezeSelf("cannot freeze yourself")


def _apply_power(
    st: GameState, seat: int, power_kind: str, target_seat: Optional[int]
) -> list[Effect]:
    if power_kind == BUY_EXTRA_TURN:
        st.pending_extra_turn_for = seat
        return []
    if power_kind == BUY_FREEZE:
        st.players[target_seat].frozen_turns += 1
        return []
    # extra card: immediate draw for the purchaser
    _, effects = _draw_card(st, seat)
    return effects


def _spend_points(st: GameState, seat: int, cost: int) -> None:
    player = st.players[seat]
    if player.points < cost:
        raise InsufficientPoints(f"need {cost} points, have {player.points}")
    player.points -= cost
