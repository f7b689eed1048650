/**
 * Entry point: join form, then the event loop
 * socket event -> view model -> render_phase -> DOM.
 *
 * A 1 s tick re-renders so countdowns (derived from server deadlines)
 * stay live, and the reader-busy banner pulses on a 5 s tick so waiting
 * players always see motion rather than a static screen.
 */

import { guardInput } from "./guard.js";
import { ClientCommand, UnseqCommand } from "./protocol.js";
import { renderContract } from "./dom.js";
import { renderPhase } from "./screen.js";
import { GameSocket } from "./net.js";
import { ClientViewModel } from "./view_model.js";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function showToast(root: HTMLElement, text: string): void {
  const toast = document.createElement("div");
  toast.className = "toast";
  toast.setAttribute("data-testid", "guard-toast");
  toast.textContent = text;
  root.prepend(toast);
  setTimeout(() => toast.remove(), 2500);
}

function startGame(server: string, roomId: string, name: string): void {
  const root = byId<HTMLDivElement>("app");
  const viewModel = new ClientViewModel();
  viewModel.roomId = roomId;

  const wsBase = server.replace(/^http/, "ws").replace(/\/$/, "");
  const socket = new GameSocket(wsBase, roomId, {
    onEvent: (event) => {
      viewModel.observe(event);
      draw();
    },
    onOpen: () => {
      viewModel.connectionUp();
      if (!socket.token) {
        socket.send({ t: "join_room", room_id: roomId, display_name: name });
      }
      draw();
    },
    onClose: () => {
      viewModel.connectionLost();
      draw();
    },
  });

  const sendGuarded = (command: UnseqCommand): void => {
    const full = { ...command, seq: 0 } as ClientCommand;
    const verdict = guardInput(full, viewModel);
    if (!verdict.allow) {
      showToast(root, verdict.reason);
      return;
    }
    socket.send(command);
    viewModel.noteSent(full);
    draw();
  };

  const callbacks = {
    onReady: () => sendGuarded({ t: "ready" }),
    onSubmitSe: (text: string) => sendGuarded({ t: "submit_self_explanation", text }),
    onVote: (strategy: string) =>
      sendGuarded({ t: "cast_vote", strategy: strategy as never }),
    onChat: (text: string) => sendGuarded({ t: "chat", text }),
    onPass: () => sendGuarded({ t: "ready" }),
    onReroll: () => sendGuarded({ t: "purchase", kind: "change_strategy" }),
  };

  function draw(): void {
    renderContract(renderPhase(viewModel), root, callbacks, Date.now());
  }

  setInterval(draw, 1000); // countdown refresh
  setInterval(() => {
    // advisory pulse so the waiting screen visibly breathes
    const busy = root.querySelector('[data-testid="reader-busy"]');
    busy?.classList.toggle("busy-pulse-alt");
  }, 5000);

  socket.connect();
  draw();
}

function initJoinForm(): void {
  const form = byId<HTMLFormElement>("join-form");
  form.addEventListener("submit", async (submitEvent) => {
    submitEvent.preventDefault();
    const server = byId<HTMLInputElement>("server").value || window.location.origin;
    const name = byId<HTMLInputElement>("name").value || "player";
    let roomId = byId<HTMLInputElement>("room").value.trim();
    try {
      const health = await fetch(`${server}/health`);
      if (!health.ok) throw new Error(String(health.status));
    } catch {
      showToast(byId("app"), `cannot reach ${server}`);
      return;
    }
    if (!roomId) {
      const created = await fetch(`${server}/rooms`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({}),
      });
      if (!created.ok) {
        showToast(byId("app"), "could not create a room (is a corpus configured?)");
        return;
      }
      roomId = (await created.json()).room_id;
    }
    byId("join-panel").style.display = "none";
    startGame(server, roomId, name);
  });
}

if (typeof document !== "undefined" && document.getElementById("join-form")) {
  initJoinForm();
}
