/**
 * guard_input: block obviously-illegal actions before they hit the
 * network, mirroring the server's phase validation. Purely a courtesy:
 * the server re-validates everything and stays authoritative.
 */

import { ClientCommand, CHAT_MAX_CHARS } from "./protocol.js";
import { ClientViewModel } from "./view_model.js";

export type GuardResult = { allow: true } | { allow: false; reason: string };

const ALLOW: GuardResult = { allow: true };

function block(reason: string): GuardResult {
  return { allow: false, reason };
}

export function guardInput(
  command: ClientCommand,
  viewModel: ClientViewModel
): GuardResult {
  if (viewModel.gameOver && command.t !== "leave") {
    return block("the game is over");
  }
  switch (command.t) {
    case "join_room":
      return viewModel.phase === "Lobby" ? ALLOW : block("game already running");

    case "ready":
      if (viewModel.phase === "Lobby") return ALLOW;
      if (viewModel.phase === "StrategyAssigned") {
        return viewModel.isReader ? ALLOW : block("waiting for the reader");
      }
      if (viewModel.phase === "Debating") {
        return viewModel.isReader
          ? block("the reader does not pass the debate")
          : ALLOW;
      }
      return block("nothing to be ready for right now");

    case "submit_self_explanation":
      if (viewModel.phase !== "SelfExplaining") {
        return block("not writing right now");
      }
      if (!viewModel.isReader) return block("only the reader writes");
      if (!command.text.trim()) return block("write your self-explanation first");
      return ALLOW;

    case "cast_vote":
      if (viewModel.phase !== "Voting" && viewModel.phase !== "Revoting") {
        return block("no ballot is open");
      }
      if (viewModel.isReader) return block("the reader does not vote");
      if (viewModel.myVoteCast) return block("you already voted this ballot");
      return ALLOW;

    case "chat":
      if (viewModel.phase !== "Debating") {
        return block("chat opens during debate");
      }
      if (viewModel.myMessagesRemaining <= 0) {
        return block(`0 of ${viewModel.debateMaxMessages} messages left`);
      }
      if (!command.text.length || command.text.length > CHAT_MAX_CHARS) {
        return block(`message must be 1..${CHAT_MAX_CHARS} characters`);
      }
      return ALLOW;

    case "purchase": {
      const inRound = ["StrategyAssigned", "SelfExplaining", "Voting", "Debating", "Revoting"];
      if (!inRound.includes(viewModel.phase)) {
        return block("cannot spend right now");
      }
      if (command.kind === "change_strategy") {
        if (!viewModel.isReader) return block("only the reader can change strategy");
        if (!["StrategyAssigned", "SelfExplaining"].includes(viewModel.phase)) {
          return block("strategy is locked after submission");
        }
      }
      if (command.kind === "freeze") {
        if (command.target === undefined) return block("pick a player to freeze");
        if (command.target === viewModel.mySeat) return block("cannot freeze yourself");
      }
      if (command.kind === "extra_turn" && viewModel.pendingExtraTurnFor !== null) {
        return block("an extra turn is already pending");
      }
      const holdsCard = viewModel.hand.some((c) => c.kind === command.kind);
      const cost = viewModel.costs[command.kind] ?? 0;
      if (!holdsCard && viewModel.myPoints() < cost) {
        return block(`costs ${cost} points`);
      }
      return ALLOW;
    }

    case "play_card": {
      const card = viewModel.hand.find((c) => c.card_id === command.card_id);
      if (!card) return block("that card is not in your hand");
      if (card.kind === "freeze") {
        if (command.target === undefined) return block("pick a player to freeze");
        if (command.target === viewModel.mySeat) return block("cannot freeze yourself");
      }
      if (card.kind === "extra_turn" && viewModel.pendingExtraTurnFor !== null) {
        return block("an extra turn is already pending");
      }
      return ALLOW;
    }

    case "leave":
      return ALLOW;
  }
}
