/**
 * ClientViewModel: everything this seat knows, reconstructed purely from
 * the ordered server event stream. Holds no authoritative rule state;
 * the server is always right and a fresh room_state snapshot resets us.
 *
 * Secrecy note: the round's strategy arrives on two separate paths and
 * is kept in two separate fields on purpose. `privateAssigned` comes
 * from the reader-only strategy_assigned event; `revealedAssigned` from
 * the public votes_revealed broadcast. Non-reader screens only ever read
 * the revealed field, so the private one cannot leak into their DOM.
 */

import {
  Card,
  ClientCommand,
  Movement,
  Phase,
  PlayerRow,
  RoundView,
  ServerEvent,
  Snapshot,
  StandingRow,
  Strategy,
  TurnOutcome,
} from "./protocol.js";

export interface ChatEntry {
  seat: number;
  name: string;
  text: string;
}

export class ClientViewModel {
  mySeat = -1;
  roomId = "";
  token: string | null = null;
  phase: Phase = "Lobby";
  roundNumber = 0;
  players: PlayerRow[] = [];
  hand: Card[] = [];
  costs: Record<string, number> = {
    change_strategy: 2,
    extra_turn: 5,
    freeze: 4,
    extra_card: 3,
  };
  debateMaxMessages = 3;
  pendingExtraTurnFor: number | null = null;

  readerSeat: number | null = null;
  readerName = "";
  targetText = "";
  context: string[] = [];
  seText: string | null = null;

  /** Reader-only knowledge (strategy_assigned). Never rendered to voters. */
  privateAssigned: Strategy | null = null;
  /** Public knowledge after the reveal (votes_revealed). */
  revealedAssigned: Strategy | null = null;

  myVoteCast = false;
  myVote: Strategy | null = null;
  votesRevealed: Record<string, Strategy | null> | null = null;
  revealBallot: "initial" | "revote" | null = null;

  chat: ChatEntry[] = [];
  messagesRemaining: Record<number, number> = {};
  debateSecondsTotal = 0;

  /** Server-provided absolute deadline for the running phase timer. */
  deadlineEpochMs: number | null = null;

  lastOutcome: TurnOutcome | null = null;
  lastPointsAwarded: Record<string, number> = {};
  lastDice: [number, number] | null = null;
  lastMovement: Movement | null = null;
  lastCard: { seat: number; card: Card; movement?: Movement } | null = null;

  standings: StandingRow[] | null = null;
  gameOver = false;

  socketConnected = false;
  lastError: { code: string; detail: string } | null = null;
  lastChatRejection: string | null = null;

  get isReader(): boolean {
    return this.mySeat >= 0 && this.readerSeat === this.mySeat;
  }

  get myMessagesRemaining(): number {
    return this.messagesRemaining[this.mySeat] ?? this.debateMaxMessages;
  }

  playerName(seat: number): string {
    return this.players.find((p) => p.seat === seat)?.player_id ?? `seat ${seat}`;
  }

  myPoints(): number {
    return this.players.find((p) => p.seat === this.mySeat)?.points ?? 0;
  }

  observe(event: ServerEvent): void {
    switch (event.t) {
      case "room_state":
        this.syncSnapshot(event.snapshot);
        break;
      case "phase_changed":
        this.enterPhase(event.phase, event.deadline_epoch_ms ?? null);
        break;
      case "strategy_assigned":
        this.privateAssigned = event.strategy;
        break;
      case "reader_busy":
        this.readerName = event.reader_name;
        break;
      case "self_explanation_posted":
        this.seText = event.text;
        break;
      case "votes_revealed":
        this.votesRevealed = event.votes;
        this.revealedAssigned = event.assigned;
        this.revealBallot = event.ballot;
        break;
      case "debate_started":
        this.debateSecondsTotal = event.seconds_remaining;
        this.chat = [];
        for (const [seat, left] of Object.entries(event.messages_remaining)) {
          this.messagesRemaining[Number(seat)] = left;
        }
        break;
      case "chat_posted":
        this.chat.push({
          seat: event.seat,
          name: this.playerName(event.seat),
          text: event.text,
        });
        this.messagesRemaining[event.seat] = event.messages_remaining;
        break;
      case "chat_rejected":
        this.lastChatRejection = event.reason;
        break;
      case "turn_resolved":
        this.lastOutcome = event.outcome;
        this.lastPointsAwarded = event.points_awarded ?? {};
        this.lastDice = event.dice ?? null;
        this.lastMovement = event.movement ?? null;
        for (const [seat, delta] of Object.entries(event.points_awarded ?? {})) {
          const row = this.players.find((p) => p.seat === Number(seat));
          if (row) row.points += delta;
        }
        if (event.movement) {
          const row = this.players.find((p) => p.seat === event.movement!.seat);
          if (row) row.board_position = event.movement.to;
        }
        break;
      case "card_drawn":
        this.lastCard = { seat: event.seat, card: event.card, movement: event.movement };
        if (event.seat === this.mySeat && event.card.card_id && event.card.kind !== "move") {
          this.hand.push(event.card);
        }
        if (event.movement) {
          const row = this.players.find((p) => p.seat === event.movement!.seat);
          if (row) row.board_position = event.movement.to;
        }
        break;
      case "game_over":
        this.gameOver = true;
        this.standings = event.standings;
        break;
      case "error":
        this.lastError = { code: event.code, detail: event.detail };
        break;
    }
  }

  /** Optimistic local marks for commands we just sent. */
  noteSent(command: ClientCommand): void {
    if (command.t === "cast_vote") {
      this.myVoteCast = true;
      this.myVote = command.strategy;
    }
  }

  connectionLost(): void {
    this.socketConnected = false;
  }

  connectionUp(): void {
    this.socketConnected = true;
  }

  private enterPhase(phase: Phase, deadline: number | null): void {
    this.phase = phase;
    this.deadlineEpochMs = deadline ?? this.deadlineEpochMs;
    switch (phase) {
      case "StrategyAssigned":
        this.privateAssigned = null;
        this.revealedAssigned = null;
        this.votesRevealed = null;
        this.revealBallot = null;
        this.seText = null;
        this.myVoteCast = false;
        this.myVote = null;
        this.chat = [];
        this.lastOutcome = null;
        this.lastDice = null;
        this.lastMovement = null;
        this.lastCard = null;
        break;
      case "Voting":
      case "Revoting":
        this.myVoteCast = false;
        this.myVote = null;
        break;
      case "GameOver":
        this.gameOver = true;
        break;
    }
    if (deadline !== null) {
      this.deadlineEpochMs = deadline;
    }
  }

  private syncSnapshot(snap: Snapshot): void {
    this.roomId = snap.room_id;
    this.mySeat = snap.you;
    if (snap.token) this.token = snap.token;
    this.phase = snap.phase;
    this.roundNumber = snap.round_number;
    this.players = snap.players.map((p) => ({ ...p }));
    this.hand = snap.hand.map((c) => ({ ...c }));
    this.pendingExtraTurnFor = snap.pending_extra_turn_for;
    const cfg = snap.config as Record<string, number>;
    if (cfg) {
      this.costs = {
        change_strategy: cfg.cost_change_strategy ?? this.costs.change_strategy,
        extra_turn: cfg.cost_extra_turn ?? this.costs.extra_turn,
        freeze: cfg.cost_freeze ?? this.costs.freeze,
        extra_card: cfg.cost_extra_card ?? this.costs.extra_card,
      };
      this.debateMaxMessages = cfg.debate_max_messages ?? this.debateMaxMessages;
      this.debateSecondsTotal = cfg.debate_seconds ?? this.debateSecondsTotal;
    }
    const deadlines = Object.values(snap.deadlines ?? {});
    this.deadlineEpochMs = deadlines.length ? Math.min(...deadlines) : null;
    if (snap.standings) this.standings = snap.standings;
    if (snap.phase === "GameOver") this.gameOver = true;
    this.syncRound(snap.round);
  }

  private syncRound(round: RoundView | null): void {
    if (round === null) {
      this.readerSeat = null;
      return;
    }
    this.readerSeat = round.reader_seat;
    this.readerName = round.reader_name;
    this.targetText = round.target_text;
    this.context = round.context.map((s) => s.text);
    this.seText = round.self_explanation;
    this.myVote = round.my_vote;
    this.myVoteCast = round.my_vote !== null || (round.voted[String(this.mySeat)] ?? false);
    for (const [seat, left] of Object.entries(round.debate_messages_remaining)) {
      this.messagesRemaining[Number(seat)] = left;
    }
    if (round.chat) {
      this.chat = round.chat.map((entry) => ({
        seat: entry.seat,
        name: this.playerName(entry.seat),
        text: entry.text,
      }));
    }
    // The snapshot field is already redacted per recipient: it is the
    // assignment only for the reader (or once publicly revealed).
    if (round.assigned_strategy !== null) {
      if (this.mySeat === round.reader_seat) {
        this.privateAssigned = round.assigned_strategy;
      } else {
        this.revealedAssigned = round.assigned_strategy;
      }
    }
    if (round.initial_votes) {
      this.votesRevealed = round.initial_votes;
      this.revealBallot = "initial";
    }
  }
}
