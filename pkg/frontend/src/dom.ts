/**
 * DOM projector: renders a ScreenContract verbatim. No game logic lives
 * here; anything this file shows, the contract said to show.
 */

import { ScreenContract, remainingSeconds } from "./screen.js";

export interface DomCallbacks {
  onReady(): void;
  onSubmitSe(text: string): void;
  onVote(strategy: string): void;
  onChat(text: string): void;
  onPass(): void;
  onReroll(): void;
}

function el(
  doc: Document,
  tag: string,
  attrs: Record<string, string> = {},
  text = ""
): HTMLElement {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) node.textContent = text;
  return node;
}

export function renderContract(
  contract: ScreenContract,
  root: HTMLElement,
  callbacks: DomCallbacks,
  nowMs: number = Date.now()
): void {
  const doc = root.ownerDocument;
  root.textContent = "";

  if (contract.reconnectBanner) {
    root.appendChild(
      el(doc, "div", { "data-testid": "reconnect-banner", class: "banner" },
        "connection lost, reconnecting...")
    );
  }
  if (contract.errorToast) {
    root.appendChild(
      el(doc, "div", { "data-testid": "error-toast", class: "toast" }, contract.errorToast)
    );
  }

  const header = el(doc, "div", { class: "header" });
  header.appendChild(
    el(doc, "span", { "data-testid": "round-number" }, `round ${contract.roundNumber}`)
  );
  const seconds = remainingSeconds(contract.deadlineEpochMs, nowMs);
  if (seconds !== null) {
    header.appendChild(
      el(doc, "span", { "data-testid": "countdown", class: "countdown" }, `${seconds}s`)
    );
  }
  root.appendChild(header);

  const boardBox = el(doc, "div", { "data-testid": "board", class: "board" });
  for (const seat of contract.board) {
    const row = el(doc, "div", {
      class: "board-seat",
      "data-seat": String(seat.seat),
    });
    const marks = [
      seat.isReader ? "reader" : "",
      seat.isYou ? "you" : "",
      seat.frozenTurns > 0 ? `frozen x${seat.frozenTurns}` : "",
      seat.connected ? "" : "offline",
    ].filter(Boolean).join(", ");
    row.textContent =
      `${seat.name}: square ${seat.position}, ${seat.points} pts` +
      (marks ? ` (${marks})` : "");
    boardBox.appendChild(row);
  }
  root.appendChild(boardBox);

  const main = el(doc, "div", { "data-testid": "screen", "data-kind": contract.screen.kind });
  root.appendChild(main);
  const screen = contract.screen;

  switch (screen.kind) {
    case "lobby": {
      main.appendChild(el(doc, "h2", {}, `room ${screen.roomId}`));
      for (const player of screen.players) {
        main.appendChild(
          el(doc, "div", { class: "lobby-player" },
            `${player.name} ${player.ready ? "(ready)" : ""}`)
        );
      }
      const ready = el(doc, "button", { "data-testid": "ready-button" }, "ready");
      if (!screen.readyEnabled) ready.setAttribute("disabled", "");
      ready.addEventListener("click", () => callbacks.onReady());
      main.appendChild(ready);
      break;
    }

    case "strategy_assigned": {
      main.appendChild(
        el(doc, "div", { "data-testid": "assigned-strategy" },
          `your strategy: ${screen.assigned}`)
      );
      const reroll = el(
        doc, "button", { "data-testid": "reroll-button" },
        `change strategy (${screen.rerollCost} pts)`
      );
      if (!screen.rerollEnabled) reroll.setAttribute("disabled", "");
      reroll.addEventListener("click", () => callbacks.onReroll());
      main.appendChild(reroll);
      const start = el(doc, "button", { "data-testid": "start-button" }, "start writing");
      start.addEventListener("click", () => callbacks.onReady());
      main.appendChild(start);
      break;
    }

    case "waiting_for_reader": {
      // The explicit reader-busy status; deliberately not a static screen.
      main.appendChild(
        el(doc, "div", { "data-testid": "reader-busy", class: "busy-pulse" },
          screen.statusText)
      );
      break;
    }

    case "self_explaining": {
      main.appendChild(
        el(doc, "div", { "data-testid": "assigned-strategy" },
          `write with: ${screen.assigned}`)
      );
      const context = el(doc, "div", { "data-testid": "context" });
      for (const sentence of screen.contextSentences) {
        context.appendChild(el(doc, "p", {}, sentence));
      }
      main.appendChild(context);
      main.appendChild(
        el(doc, "p", { "data-testid": "target-sentence", class: "target" },
          screen.targetText)
      );
      const editor = el(doc, "textarea", { "data-testid": "se-editor" });
      if (!screen.editorEnabled) editor.setAttribute("disabled", "");
      main.appendChild(editor);
      const submit = el(doc, "button", { "data-testid": "se-submit" }, "post it");
      if (!screen.submitEnabled) submit.setAttribute("disabled", "");
      submit.addEventListener("click", () =>
        callbacks.onSubmitSe((editor as HTMLTextAreaElement).value)
      );
      main.appendChild(submit);
      break;
    }

    case "voting": {
      main.appendChild(
        el(doc, "blockquote", { "data-testid": "posted-se" }, screen.selfExplanation)
      );
      const buttons = el(doc, "div", { "data-testid": "strategy-buttons" });
      for (const button of screen.strategyButtons) {
        const node = el(
          doc, "button",
          {
            "data-testid": `vote-${button.strategy}`,
            "data-selected": button.selected ? "true" : "false",
          },
          button.strategy
        );
        if (!button.enabled) node.setAttribute("disabled", "");
        node.addEventListener("click", () => callbacks.onVote(button.strategy));
        buttons.appendChild(node);
      }
      main.appendChild(buttons);
      if (screen.waitingText) {
        main.appendChild(
          el(doc, "div", { "data-testid": "vote-waiting" }, screen.waitingText)
        );
      }
      break;
    }

    case "reveal": {
      main.appendChild(
        el(doc, "div", { "data-testid": "revealed-assigned" },
          `assigned strategy: ${screen.assigned}`)
      );
      for (const row of screen.votes) {
        main.appendChild(
          el(doc, "div", { class: row.matchedAssigned ? "vote match" : "vote" },
            `${row.name}: ${row.vote ?? "abstained"}`)
        );
      }
      break;
    }

    case "debating": {
      if (screen.selfExplanation) {
        main.appendChild(
          el(doc, "blockquote", { "data-testid": "posted-se" }, screen.selfExplanation)
        );
      }
      if (screen.assigned) {
        main.appendChild(
          el(doc, "div", { "data-testid": "revealed-assigned" },
            `assigned strategy: ${screen.assigned}`)
        );
      }
      const log = el(doc, "div", { "data-testid": "chat-log" });
      for (const entry of screen.chat) {
        log.appendChild(el(doc, "div", { class: "chat-line" }, `${entry.name}: ${entry.text}`));
      }
      main.appendChild(log);
      for (const row of screen.perSeatRemaining) {
        main.appendChild(
          el(doc, "span", { class: "chat-budget", "data-seat": String(row.seat) },
            `${row.name}: ${row.remaining}`)
        );
      }
      main.appendChild(
        el(doc, "div", { "data-testid": "chat-counter" }, screen.counterText)
      );
      const input = el(doc, "input", { "data-testid": "chat-input", type: "text" });
      if (!screen.chatInputEnabled) input.setAttribute("disabled", "");
      main.appendChild(input);
      const send = el(doc, "button", { "data-testid": "chat-send" }, "send");
      if (!screen.chatInputEnabled) send.setAttribute("disabled", "");
      send.addEventListener("click", () =>
        callbacks.onChat((input as HTMLInputElement).value)
      );
      main.appendChild(send);
      const pass = el(doc, "button", { "data-testid": "pass-button" }, "done debating");
      if (!screen.passEnabled) pass.setAttribute("disabled", "");
      pass.addEventListener("click", () => callbacks.onPass());
      main.appendChild(pass);
      break;
    }

    case "resolving": {
      const label =
        screen.result === "majority"
          ? "majority! points and movement"
          : screen.result === "forfeit"
            ? "turn forfeited"
            : "no majority, no movement";
      main.appendChild(el(doc, "div", { "data-testid": "outcome" }, label));
      if (screen.dice) {
        main.appendChild(
          el(doc, "div", { "data-testid": "dice", class: "dice-anim" },
            `dice: ${screen.dice[0]} + ${screen.dice[1]}`)
        );
      }
      if (screen.movement) {
        main.appendChild(
          el(doc, "div", { "data-testid": "movement", class: "token-anim" },
            `square ${screen.movement.from} -> ${screen.movement.to}`)
        );
      }
      for (const award of screen.pointsAwarded) {
        main.appendChild(el(doc, "div", { class: "award" }, `${award.name} +${award.delta}`));
      }
      break;
    }

    case "card_draw": {
      const text =
        screen.cardKind === "move"
          ? `event card: move ${screen.cardDelta! > 0 ? "+" : ""}${screen.cardDelta}`
          : screen.cardKind === "hidden"
            ? `${screen.holderName} drew a power card`
            : `power card: ${screen.cardKind.replace("_", " ")}`;
      main.appendChild(el(doc, "div", { "data-testid": "card", class: "card-anim" }, text));
      break;
    }

    case "game_over": {
      main.appendChild(el(doc, "h2", {}, "game over"));
      for (const row of screen.standings) {
        main.appendChild(
          el(doc, "div", { class: "standing" },
            `#${row.rank} ${row.player_id}: square ${row.board_position}, ${row.points} pts`)
        );
      }
      break;
    }
  }
}
