/**
 * render_phase: project the view model into a ScreenContract, a complete
 * declarative description of what the player sees and which inputs are
 * live. The DOM layer renders contracts verbatim and adds nothing, so
 * contract-level tests cover what reaches the screen.
 *
 * Secrecy rule enforced here: every non-reader screen is built without
 * touching viewModel.privateAssigned; the strategy only appears for
 * voters via the revealed field after votes_revealed.
 */

import { STRATEGIES, StandingRow, Strategy } from "./protocol.js";
import { ChatEntry, ClientViewModel } from "./view_model.js";

export interface StrategyButton {
  strategy: Strategy;
  enabled: boolean;
  selected: boolean;
}

export interface VoteRow {
  seat: number;
  name: string;
  vote: Strategy | null;
  matchedAssigned: boolean;
}

export interface BoardSeat {
  seat: number;
  name: string;
  position: number;
  points: number;
  frozenTurns: number;
  connected: boolean;
  handCount: number;
  isReader: boolean;
  isYou: boolean;
}

export type Screen =
  | { kind: "lobby"; roomId: string; players: { name: string; ready: boolean }[]; readyEnabled: boolean }
  | {
      kind: "strategy_assigned";
      youAreReader: true;
      assigned: Strategy;
      startEnabled: true;
      rerollCost: number;
      rerollEnabled: boolean;
      targetText: string;
      contextSentences: string[];
    }
  | {
      kind: "waiting_for_reader";
      statusText: string;
      readerName: string;
      inputsEnabled: false;
      showsCountdown: true;
    }
  | {
      kind: "self_explaining";
      youAreReader: true;
      assigned: Strategy;
      targetText: string;
      contextSentences: string[];
      editorEnabled: true;
      submitEnabled: true;
    }
  | {
      kind: "voting";
      selfExplanation: string;
      strategyButtons: StrategyButton[];
      waitingText: string | null;
      youAreReader: boolean;
    }
  | { kind: "reveal"; assigned: Strategy; votes: VoteRow[] }
  | {
      kind: "debating";
      chat: ChatEntry[];
      chatInputEnabled: boolean;
      counterText: string;
      myMessagesRemaining: number;
      perSeatRemaining: { seat: number; name: string; remaining: number }[];
      passEnabled: boolean;
      debateSecondsTotal: number;
      selfExplanation: string | null;
      assigned: Strategy | null;
    }
  | {
      kind: "resolving";
      result: "majority" | "no_majority" | "forfeit";
      dice: [number, number] | null;
      movement: { seat: number; from: number; to: number } | null;
      pointsAwarded: { seat: number; name: string; delta: number }[];
    }
  | { kind: "card_draw"; cardKind: string; cardDelta: number | null; holderName: string }
  | { kind: "game_over"; standings: StandingRow[] };

export interface ScreenContract {
  screen: Screen;
  board: BoardSeat[];
  roundNumber: number;
  phase: string;
  /** Absolute server deadline the countdown is derived from (never a
   * locally-started timer), null when no timer runs. */
  deadlineEpochMs: number | null;
  reconnectBanner: boolean;
  errorToast: string | null;
}

function board(viewModel: ClientViewModel): BoardSeat[] {
  return viewModel.players.map((p) => ({
    seat: p.seat,
    name: p.player_id,
    position: p.board_position,
    points: p.points,
    frozenTurns: p.frozen_turns,
    connected: p.connected,
    handCount: p.hand_count,
    isReader: p.seat === viewModel.readerSeat,
    isYou: p.seat === viewModel.mySeat,
  }));
}

function voteRows(viewModel: ClientViewModel): VoteRow[] {
  const assigned = viewModel.revealedAssigned;
  return Object.entries(viewModel.votesRevealed ?? {}).map(([seat, vote]) => ({
    seat: Number(seat),
    name: viewModel.playerName(Number(seat)),
    vote,
    matchedAssigned: vote !== null && vote === assigned,
  }));
}

function ballotScreen(viewModel: ClientViewModel): Screen {
  if (viewModel.isReader) {
    return {
      kind: "voting",
      selfExplanation: viewModel.seText ?? "",
      strategyButtons: STRATEGIES.map((strategy) => ({
        strategy,
        enabled: false,
        selected: false,
      })),
      waitingText: "waiting for the table to vote",
      youAreReader: true,
    };
  }
  const cast = viewModel.myVoteCast;
  return {
    kind: "voting",
    selfExplanation: viewModel.seText ?? "",
    strategyButtons: STRATEGIES.map((strategy) => ({
      strategy,
      enabled: !cast,
      selected: viewModel.myVote === strategy,
    })),
    waitingText: cast ? "vote cast, waiting for others" : null,
    youAreReader: false,
  };
}

export function renderPhase(viewModel: ClientViewModel): ScreenContract {
  let screen: Screen;
  switch (viewModel.phase) {
    case "Lobby":
      screen = {
        kind: "lobby",
        roomId: viewModel.roomId,
        players: viewModel.players.map((p) => ({
          name: p.player_id,
          ready: p.ready ?? false,
        })),
        readyEnabled: true,
      };
      break;

    case "StrategyAssigned":
      if (viewModel.isReader) {
        screen = {
          kind: "strategy_assigned",
          youAreReader: true,
          assigned: viewModel.privateAssigned ?? "Paraphrasing",
          startEnabled: true,
          rerollCost: viewModel.costs.change_strategy,
          rerollEnabled: viewModel.myPoints() >= viewModel.costs.change_strategy,
          targetText: viewModel.targetText,
          contextSentences: viewModel.context,
        };
      } else {
        screen = waitingScreen(viewModel, "is choosing how to start");
      }
      break;

    case "SelfExplaining":
      if (viewModel.isReader) {
        screen = {
          kind: "self_explaining",
          youAreReader: true,
          assigned: viewModel.privateAssigned ?? "Paraphrasing",
          targetText: viewModel.targetText,
          contextSentences: viewModel.context,
          editorEnabled: true,
          submitEnabled: true,
        };
      } else {
        screen = waitingScreen(viewModel, "is writing a self-explanation");
      }
      break;

    case "Voting":
    case "Revoting":
      screen = ballotScreen(viewModel);
      break;

    case "Reveal":
      screen = {
        kind: "reveal",
        assigned: viewModel.revealedAssigned ?? "Paraphrasing",
        votes: voteRows(viewModel),
      };
      break;

    case "Debating": {
      const remaining = viewModel.myMessagesRemaining;
      screen = {
        kind: "debating",
        chat: viewModel.chat,
        chatInputEnabled: remaining > 0,
        counterText: `${remaining} of ${viewModel.debateMaxMessages} messages left`,
        myMessagesRemaining: remaining,
        perSeatRemaining: viewModel.players.map((p) => ({
          seat: p.seat,
          name: p.player_id,
          remaining: viewModel.messagesRemaining[p.seat] ?? viewModel.debateMaxMessages,
        })),
        passEnabled: !viewModel.isReader,
        debateSecondsTotal: viewModel.debateSecondsTotal,
        selfExplanation: viewModel.seText,
        assigned: viewModel.revealedAssigned,
      };
      break;
    }

    case "Resolving":
      screen = {
        kind: "resolving",
        result: viewModel.lastOutcome?.result ?? "no_majority",
        dice: viewModel.lastDice,
        movement: viewModel.lastMovement,
        pointsAwarded: Object.entries(viewModel.lastPointsAwarded).map(
          ([seat, delta]) => ({
            seat: Number(seat),
            name: viewModel.playerName(Number(seat)),
            delta,
          })
        ),
      };
      break;

    case "CardDraw":
      screen = {
        kind: "card_draw",
        cardKind: viewModel.lastCard?.card.kind ?? "hidden",
        cardDelta: viewModel.lastCard?.card.delta ?? null,
        holderName: viewModel.playerName(viewModel.lastCard?.seat ?? 0),
      };
      break;

    case "GameOver":
    default:
      screen = { kind: "game_over", standings: viewModel.standings ?? [] };
      break;
  }

  return {
    screen,
    board: board(viewModel),
    roundNumber: viewModel.roundNumber,
    phase: viewModel.phase,
    deadlineEpochMs: viewModel.deadlineEpochMs,
    reconnectBanner: !viewModel.socketConnected,
    errorToast: viewModel.lastError ? viewModel.lastError.detail : null,
  };
}

/** The explicit replacement for a static screen: who we are waiting on,
 * what they are doing, and a live countdown. */
function waitingScreen(viewModel: ClientViewModel, doing: string): Screen {
  return {
    kind: "waiting_for_reader",
    statusText: `waiting: ${viewModel.readerName} ${doing}`,
    readerName: viewModel.readerName,
    inputsEnabled: false,
    showsCountdown: true,
  };
}

/** Seconds left on the server deadline; countdowns derive only from the
 * server-sent absolute time so local clock skew cannot stretch a debate. */
export function remainingSeconds(
  deadlineEpochMs: number | null,
  nowMs: number
): number | null {
  if (deadlineEpochMs === null) return null;
  return Math.max(0, Math.ceil((deadlineEpochMs - nowMs) / 1000));
}
