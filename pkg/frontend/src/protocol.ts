/**
 * Wire protocol types: one JSON object per WebSocket text frame, tagged
 * by `t`. Mirrors the server's tag table (docs/protocol.md). Unknown
 * fields are preserved-by-ignoring; unknown tags throw on decode.
 */

export const STRATEGIES = [
  "ComprehensionMonitoring",
  "Paraphrasing",
  "Prediction",
  "Elaboration",
  "Bridging",
] as const;

export type Strategy = (typeof STRATEGIES)[number];

export type Phase =
  | "Lobby"
  | "StrategyAssigned"
  | "SelfExplaining"
  | "Voting"
  | "Reveal"
  | "Debating"
  | "Revoting"
  | "Resolving"
  | "CardDraw"
  | "GameOver";

export interface PlayerRow {
  player_id: string;
  seat: number;
  points: number;
  board_position: number;
  frozen_turns: number;
  connected: boolean;
  hand_count: number;
  ready?: boolean;
}

export interface Card {
  card_id?: string;
  kind: string;
  delta?: number;
}

export interface SentenceRef {
  index: number;
  text: string;
}

export interface RoundView {
  reader_seat: number;
  reader_name: string;
  is_extra_turn: boolean;
  target_sentence_index: number;
  target_text: string;
  context: SentenceRef[];
  self_explanation: string | null;
  assigned_strategy: Strategy | null;
  debate_open: boolean;
  debate_messages_remaining: Record<string, number>;
  voted: Record<string, boolean>;
  my_vote: Strategy | null;
  chat?: { seat: number; text: string }[];
  initial_votes?: Record<string, Strategy | null>;
}

export interface StandingRow {
  player_id: string;
  seat: number;
  board_position: number;
  points: number;
  rank: number;
}

export interface Snapshot {
  room_id: string;
  you: number;
  phase: Phase;
  round_number: number;
  players: PlayerRow[];
  hand: Card[];
  config: Record<string, unknown>;
  round: RoundView | null;
  pending_extra_turn_for: number | null;
  deadlines: Record<string, number>;
  token?: string | null;
  standings?: StandingRow[];
}

export interface TurnOutcome {
  result: "majority" | "no_majority" | "forfeit";
  matched_count?: number;
  eligible_count?: number;
}

export interface Movement {
  seat: number;
  from: number;
  to: number;
}

export type ServerEvent =
  | { t: "room_state"; seq?: number; snapshot: Snapshot }
  | {
      t: "phase_changed";
      seq?: number;
      phase: Phase;
      countdown_seconds?: number;
      deadline_epoch_ms?: number;
    }
  | { t: "strategy_assigned"; seq?: number; strategy: Strategy }
  | { t: "reader_busy"; seq?: number; reader_name: string }
  | { t: "self_explanation_posted"; seq?: number; seat: number; text: string }
  | {
      t: "votes_revealed";
      seq?: number;
      votes: Record<string, Strategy | null>;
      assigned: Strategy;
      ballot: "initial" | "revote";
    }
  | {
      t: "debate_started";
      seq?: number;
      seconds_remaining: number;
      messages_remaining: Record<string, number>;
    }
  | {
      t: "chat_posted";
      seq?: number;
      seat: number;
      text: string;
      messages_remaining: number;
    }
  | { t: "chat_rejected"; seq?: number; reason: string }
  | {
      t: "turn_resolved";
      seq?: number;
      outcome: TurnOutcome;
      points_awarded: Record<string, number>;
      dice?: [number, number];
      movement?: Movement;
    }
  | { t: "card_drawn"; seq?: number; seat: number; card: Card; movement?: Movement }
  | { t: "game_over"; seq?: number; standings: StandingRow[] }
  | { t: "error"; seq?: number; code: string; detail: string };

export type PurchaseKind =
  | "change_strategy"
  | "extra_turn"
  | "freeze"
  | "extra_card";

export type ClientCommand =
  | { t: "join_room"; seq: number; room_id: string; display_name: string }
  | { t: "ready"; seq: number }
  | { t: "submit_self_explanation"; seq: number; text: string }
  | { t: "cast_vote"; seq: number; strategy: Strategy }
  | { t: "chat"; seq: number; text: string }
  | { t: "purchase"; seq: number; kind: PurchaseKind; target?: number }
  | { t: "play_card"; seq: number; card_id: string; target?: number }
  | { t: "leave"; seq: number };

type DistributiveOmit<T, K extends PropertyKey> = T extends unknown
  ? Omit<T, K>
  : never;

/** A command before the socket stamps its per-connection seq. */
export type UnseqCommand = DistributiveOmit<ClientCommand, "seq">;

const SERVER_TAGS = new Set([
  "room_state", "phase_changed", "strategy_assigned", "reader_busy",
  "self_explanation_posted", "votes_revealed", "debate_started",
  "chat_posted", "chat_rejected", "turn_resolved", "card_drawn",
  "game_over", "error",
]);

export function decodeServerEvent(raw: string): ServerEvent {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch (err) {
    throw new Error(`malformed frame: ${String(err)}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new Error("frame is not a JSON object");
  }
  const tag = (obj as { t?: unknown }).t;
  if (typeof tag !== "string" || !SERVER_TAGS.has(tag)) {
    throw new Error(`unknown server event tag: ${String(tag)}`);
  }
  return obj as ServerEvent;
}

export function encodeCommand(command: ClientCommand): string {
  return JSON.stringify(command);
}

export const CHAT_MAX_CHARS = 500;
