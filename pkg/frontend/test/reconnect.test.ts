/**
 * Reconnect idempotence: drop the socket mid-debate, resume from the
 * server's reattach snapshot, and land on the same screen contract an
 * uninterrupted client shows, remaining-message counts included.
 */

import { describe, expect, it } from "vitest";

import { renderPhase } from "../src/screen.js";
import { ClientViewModel } from "../src/view_model.js";
import { ReconnectFixture, loadFixture } from "./helpers.js";

const fixture = loadFixture<ReconnectFixture>("reconnect_debate.json");

function uninterruptedModel(): ClientViewModel {
  const viewModel = new ClientViewModel();
  viewModel.connectionUp();
  for (const event of fixture.frames_seat2) viewModel.observe(event);
  return viewModel;
}

describe("mid-debate reconnect", () => {
  it("shows the reconnect banner while the socket is down", () => {
    const viewModel = uninterruptedModel();
    viewModel.connectionLost();
    const contract = renderPhase(viewModel);
    expect(contract.reconnectBanner).toBe(true);
  });

  it("resumes to the same debate screen with the same counters", () => {
    const unbroken = uninterruptedModel();
    const unbrokenContract = renderPhase(unbroken);
    expect(unbrokenContract.screen.kind).toBe("debating");

    // fresh client: lost everything, reattaches with only the snapshot
    const resumed = new ClientViewModel();
    resumed.connectionLost();
    resumed.observe({ t: "room_state", seq: 99, snapshot: fixture.reattach_snapshot });
    resumed.connectionUp();
    const resumedContract = renderPhase(resumed);

    expect(resumedContract.screen.kind).toBe("debating");
    expect(resumedContract.reconnectBanner).toBe(false);
    const a = unbrokenContract.screen as Record<string, unknown>;
    const b = resumedContract.screen as Record<string, unknown>;
    expect(b.myMessagesRemaining).toBe(a.myMessagesRemaining);
    expect(b.counterText).toBe(a.counterText);
    expect(b.perSeatRemaining).toEqual(a.perSeatRemaining);
    expect(b.chat).toEqual(a.chat);
    expect(b.assigned).toEqual(a.assigned);
    expect(b.selfExplanation).toEqual(a.selfExplanation);
    expect(resumedContract.board).toEqual(unbrokenContract.board);
    expect(resumedContract.roundNumber).toBe(unbrokenContract.roundNumber);
  });

  it("the resumed counter matches the server's snapshot value exactly", () => {
    const remaining =
      fixture.reattach_snapshot.round!.debate_messages_remaining["2"];
    const resumed = new ClientViewModel();
    resumed.observe({ t: "room_state", seq: 1, snapshot: fixture.reattach_snapshot });
    resumed.connectionUp();
    const contract = renderPhase(resumed);
    expect((contract.screen as { myMessagesRemaining: number }).myMessagesRemaining).toBe(
      remaining
    );
    expect(remaining).toBe(2); // fixture: seat 2 spent one of three messages
  });
});
